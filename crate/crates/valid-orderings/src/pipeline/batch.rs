//! Many independent instances over one group, optionally in parallel.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::group::Group;
use crate::rng::derive;
use crate::subset::Subset;

use super::{solve, SolverParams, Solution, Status};

/// Counts over a batch. Identical for every thread count, since each instance
/// gets its own seed and results are collected in input order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BatchSummary {
    pub total: usize,
    pub ordered: usize,
    /// Instances proved to have no valid ordering, by their elements.
    pub nonexistence: Vec<Vec<usize>>,
    /// Instances where every route gave up, by their elements.
    pub failures: Vec<Vec<usize>>,
    /// How many instances each route solved.
    pub routes: BTreeMap<String, usize>,
}

impl BatchSummary {
    /// `"127/127 ordered, 0 failures"`, plus nonexistence witnesses if any.
    pub fn line(&self) -> String {
        let mut s = format!("{}/{} ordered, {} failures", self.ordered, self.total, self.failures.len());
        if !self.nonexistence.is_empty() {
            s.push_str(&format!(", {} without a valid ordering", self.nonexistence.len()));
        }
        s
    }
}

/// Solves every instance; instance `i` runs with seed `derive(params.seed, i)`.
/// `params.parallel` spreads instances over the rayon pool (each solve itself
/// stays sequential).
pub fn solve_batch(g: &Group, instances: &[Subset], params: &SolverParams) -> Result<(Vec<Solution>, BatchSummary)> {
    params.validate()?;
    let inner = SolverParams { parallel: false, ..params.clone() };
    let one = |(i, s): (usize, &Subset)| {
        let p = SolverParams { seed: derive(params.seed, i as u64), ..inner.clone() };
        solve(g, s, &p)
    };
    let sols: Vec<Solution> = if params.parallel {
        instances.par_iter().enumerate().map(one).collect::<Result<_>>()?
    } else {
        instances.iter().enumerate().map(one).collect::<Result<_>>()?
    };
    let mut sum = BatchSummary { total: sols.len(), ..BatchSummary::default() };
    for (sol, s) in sols.iter().zip(instances) {
        match sol.status {
            Status::Ok => {
                sum.ordered += 1;
                *sum.routes.entry(sol.trace.route.name().to_string()).or_default() += 1;
            }
            Status::None => sum.nonexistence.push(s.to_vec()),
            Status::Fail => sum.failures.push(s.to_vec()),
        }
    }
    Ok((sols, sum))
}
