//! End-to-end solver: route dispatch, the fallback ladder and unconditional
//! verification.
//!
//! Every route assembles one rainbow path in the Cayley graph and reads the
//! ordering off it. A path that misses exactly one colour `c` still gives a
//! full ordering (`c` first, then the colours), so routes only need to place
//! all but one colour.

mod batch;
mod dense;
mod ninety_nine;
mod params;
mod search;
mod sparse;
mod trace;
mod walk;

use rand::seq::SliceRandom;
use serde::Serialize;

pub use batch::{solve_batch, BatchSummary};
pub use dense::{solve_dense_f2n, solve_dense_general};
pub use ninety_nine::{ninety_nine_path, LongPath};
pub use params::{SolverParams, PARAM_KEYS};
pub use sparse::{link_cosets, solve_sparse_f2n, CosetLinks};
pub use trace::{Attempt, QuotientStep, Route, SolveTrace, Stage, Status};

use crate::error::{Error, Result};
use crate::group::Group;
use crate::orderings::{brute_force, check_valid, greedy_order, is_permutation_of, ordering_from_rainbow, BruteOptions};
use crate::orderings::{Ordering, RainbowPath};
use crate::rng::{derive, Rng};
use crate::subset::Subset;

/// Restarts and per-restart node budget of the randomized search that ends
/// the greedy stage.
const SEARCH_RESTARTS: usize = 8;
const SEARCH_NODES: u64 = 200_000;

/// What a successful route hands back.
#[derive(Clone, Debug)]
pub struct RouteRun {
    pub ordering: Ordering,
    /// The route that actually produced the ordering.
    pub route: Route,
    pub inner_route: Option<Route>,
    pub quotient_steps: Vec<QuotientStep>,
    pub stages: Vec<Stage>,
    pub repairs: usize,
}

impl RouteRun {
    fn new(route: Route, ordering: Ordering, stages: Vec<Stage>, repairs: usize) -> RouteRun {
        RouteRun { ordering, route, inner_route: None, quotient_steps: Vec::new(), stages, repairs }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub status: Status,
    pub ordering: Option<Ordering>,
    pub trace: SolveTrace,
}

/// A route attempt either finishes or names the colours it could not place,
/// which the caller forces into an earlier stage on the next try.
enum Outcome<T> {
    Done(T),
    Leftover(Subset),
}

fn stage(name: &str, seed: u64, retries: usize, detail: String) -> Stage {
    Stage { name: name.to_string(), seed, retries, detail }
}

/// A uniformly random subset of `ceil(frac |s|)` elements.
fn sample_fraction(s: &Subset, frac: f64, r: &mut Rng) -> Subset {
    let k = ((frac * s.len() as f64).ceil() as usize).min(s.len());
    let elems = s.to_vec();
    Subset::from_indices(s.universe(), elems.choose_multiple(r, k).copied())
}

/// The left coset `x H`.
fn left_coset(g: &Group, x: usize, h: &Subset) -> Subset {
    Subset::from_indices(g.order(), h.iter().map(|y| g.mul(x, y)))
}

/// Concatenates route segments, asserting that each starts where the previous
/// one ends and that colour sets are disjoint.
fn join(g: &Group, parts: &[&RainbowPath]) -> Result<RainbowPath> {
    let mut out = parts[0].clone();
    let mut colours = out.colour_set(g.order());
    for p in &parts[1..] {
        let c = p.colour_set(g.order());
        if !c.is_disjoint(&colours) {
            return Err(Error::Internal("joined segments share a colour".into()));
        }
        colours.union_with(&c);
        out.append(p)?;
    }
    out.check(g)?;
    Ok(out)
}

/// Reads the ordering off a finished path. The path must use exactly
/// `S ∖ {leftover}`.
fn finish(g: &Group, s: &Subset, path: &RainbowPath, leftover: Option<usize>) -> Result<Ordering> {
    let mut want = s.clone();
    if let Some(c) = leftover {
        if !want.remove(c) {
            return Err(Error::Internal("leftover colour is not in S".into()));
        }
    }
    if path.colour_set(g.order()) != want || path.len() != want.len() {
        return Err(Error::Internal("assembled path does not use exactly the colours of S".into()));
    }
    let ord = ordering_from_rainbow(g, path, leftover)?;
    if !is_permutation_of(&ord, s) {
        return Err(Error::Internal("assembled ordering does not cover S".into()));
    }
    Ok(ord)
}

/// Places the colours `l` on `path` by extending its end and 2-for-1
/// insertions through `free`. Succeeds when at most one colour is left.
fn patch(g: &Group, path: &RainbowPath, free: &Subset, l: &Subset, r: &mut Rng) -> Option<(RainbowPath, Option<usize>)> {
    let mut cv = walk::Canvas::new(g, free.clone(), l);
    let mut path = path.clone();
    while cv.unused.len() > 1 && cv.extend(&mut path, r) + cv.polish(&mut path) > 0 {}
    (cv.unused.len() <= 1).then(|| (path, cv.unused.items().first().copied()))
}

/// Greedy extension with 2-for-1 insertion repair from random starts. Leaves
/// at most one colour off the path (none when `S` holds the identity, which
/// then leads and the path starts there).
fn canvas_order(g: &Group, s: &Subset, seed: u64, restarts: usize) -> Option<Ordering> {
    let id = g.identity();
    let has_id = s.contains(id);
    let mut colours = s.clone();
    colours.remove(id);
    let slack = usize::from(!has_id);
    for a in 0..restarts.max(1) {
        let mut r = crate::rng::rng(derive(seed, a as u64));
        let start = if has_id { id } else { rand::Rng::gen_range(&mut r, 0..g.order()) };
        let mut free = Subset::full(g.order());
        free.remove(start);
        let mut cv = walk::Canvas::new(g, free, &colours);
        let mut path = RainbowPath::trivial(start);
        while cv.unused.len() > slack && cv.extend(&mut path, &mut r) + cv.polish(&mut path) > 0 {}
        if cv.unused.len() > slack {
            continue;
        }
        let lead = cv.unused.items().first().copied();
        let mut ord = ordering_from_rainbow(g, &path, lead).ok()?;
        if has_id {
            ord.insert(0, id);
        }
        if verified(g, s, &ord) {
            return Some(ord);
        }
    }
    None
}

fn no_identity(g: &Group, s: &Subset) -> Result<()> {
    if s.contains(g.identity()) {
        return Err(Error::Precondition("subset contains the identity".into()));
    }
    Ok(())
}

fn verified(g: &Group, s: &Subset, ord: &[usize]) -> bool {
    is_permutation_of(ord, s) && check_valid(g, ord).valid
}

/// The route the dispatcher picks before any fallback.
pub fn dispatch(g: &Group, s: &Subset, params: &SolverParams) -> Route {
    let n = g.order() as f64;
    let k = s.len();
    if k == 0 {
        return Route::Trivial;
    }
    if k <= params.brute_cap || s.contains(g.identity()) {
        return Route::Brute;
    }
    if g.cube_dim().is_some() {
        if k as f64 >= n - n.powf(1.0 - params.gamma) {
            Route::UltraDenseFallback
        } else if k as f64 >= params.dense_fraction * n {
            Route::DenseF2n
        } else {
            Route::Quotient
        }
    } else if k as f64 >= n.powf(1.0 - params.general_exponent) && g.order() <= crate::group::SUBGROUP_ENUM_CAP {
        Route::DenseGeneral
    } else {
        Route::GreedyFallback
    }
}

fn run_route(g: &Group, s: &Subset, route: Route, params: &SolverParams, seed: u64) -> Result<RouteRun> {
    match route {
        Route::DenseF2n => solve_dense_f2n(g, s, params, seed),
        Route::UltraDenseFallback => {
            let mut run = solve_dense_f2n(g, s, params, seed)?;
            run.route = Route::UltraDenseFallback;
            Ok(run)
        }
        Route::DenseGeneral => solve_dense_general(g, s, params, seed),
        Route::Quotient => solve_sparse_f2n(g, s, params, None, seed),
        Route::SparseStructured | Route::SparseExpanding => solve_sparse_f2n(g, s, params, Some(route), seed),
        Route::Trivial | Route::Brute | Route::GreedyFallback => {
            Err(Error::Internal(format!("{route} is not a randomized route")))
        }
    }
}

fn brute(g: &Group, s: &Subset, params: &SolverParams) -> Result<Option<Ordering>> {
    let opts = BruteOptions { allow_id: params.allow_id, cap: params.brute_cap, parallel: params.parallel, node_budget: None };
    brute_force(g, s, &opts)
}

/// Solves one instance. Errors only for bad input (parameters, a subset from
/// another group, the identity without `allow_id`); everything else is
/// reported through the status: `ok` with a verified ordering, `none` with an
/// exhaustive proof, or `fail`.
pub fn solve(g: &Group, s: &Subset, params: &SolverParams) -> Result<Solution> {
    params.validate()?;
    if s.universe() != g.order() {
        return Err(Error::Input(format!("subset universe {} does not match group order {}", s.universe(), g.order())));
    }
    if s.contains(g.identity()) && !params.allow_id {
        return Err(Error::Precondition("subset contains the identity; pass allow_id to order it first".into()));
    }
    let seed = params.seed;
    let mut trace = SolveTrace::new(g.kind_name(), g.order(), s.len(), seed);
    let accept = |trace: &mut SolveTrace, route: Route, ord: Ordering| -> Option<Solution> {
        if !verified(g, s, &ord) {
            trace.note = Some(format!("{route} produced an ordering that failed verification"));
            return None;
        }
        trace.route = route;
        trace.status = Status::Ok;
        trace.verified = true;
        Some(Solution { status: Status::Ok, ordering: Some(ord), trace: trace.clone() })
    };

    let primary = match params.route {
        Some(Route::Trivial) if !s.is_empty() => {
            return Err(Error::Input("the trivial route only applies to the empty set".into()));
        }
        Some(r) if !s.is_empty() => r,
        _ => dispatch(g, s, params),
    };

    if primary == Route::Trivial {
        return Ok(accept(&mut trace, Route::Trivial, Vec::new()).expect("empty ordering verifies"));
    }

    let mut brute_tried = false;
    if primary == Route::Brute {
        brute_tried = true;
        match brute(g, s, params) {
            Ok(Some(ord)) => {
                trace.attempts.push(Attempt { route: Route::Brute, seed, outcome: "ordered".into(), stages: Vec::new() });
                if let Some(sol) = accept(&mut trace, Route::Brute, ord) {
                    return Ok(sol);
                }
            }
            Ok(None) => {
                trace.attempts.push(Attempt { route: Route::Brute, seed, outcome: "exhausted".into(), stages: Vec::new() });
                trace.route = Route::Brute;
                trace.status = Status::None;
                trace.verified = true;
                trace.note = Some(format!("exhaustive search over {} elements found no valid ordering", s.len()));
                return Ok(Solution { status: Status::None, ordering: None, trace });
            }
            Err(e) => {
                trace.attempts.push(Attempt { route: Route::Brute, seed, outcome: e.to_string(), stages: Vec::new() });
            }
        }
    } else if primary != Route::GreedyFallback {
        for a in 0..=params.route_retries {
            let sd = if a == 0 { seed } else { derive(seed, a as u64) };
            match run_route(g, s, primary, params, sd) {
                Ok(run) => {
                    trace.attempts.push(Attempt { route: run.route, seed: sd, outcome: "ordered".into(), stages: run.stages });
                    trace.retries = a;
                    trace.repairs += run.repairs;
                    trace.inner_route = run.inner_route;
                    trace.quotient_steps = run.quotient_steps;
                    if let Some(sol) = accept(&mut trace, run.route, run.ordering) {
                        return Ok(sol);
                    }
                }
                Err(e) => {
                    trace.attempts.push(Attempt { route: primary, seed: sd, outcome: e.to_string(), stages: Vec::new() });
                    trace.retries = a;
                }
            }
        }
    }

    let gseed = derive(seed, 0x9ee0);
    let mut greedy = greedy_order(g, s, gseed, params.greedy_restarts);
    let mut outcome = if greedy.is_some() { "ordered" } else { "gave up" };
    if greedy.is_none() {
        greedy = canvas_order(g, s, derive(gseed, 1), params.greedy_restarts);
        if greedy.is_some() {
            outcome = "ordered after insertion repair";
        }
    }
    if greedy.is_none() {
        greedy = search::search_order(g, s, derive(gseed, 2), SEARCH_RESTARTS, SEARCH_NODES);
        if greedy.is_some() {
            outcome = "ordered by randomized search";
        }
    }
    trace.attempts.push(Attempt { route: Route::GreedyFallback, seed: gseed, outcome: outcome.into(), stages: Vec::new() });
    if let Some(ord) = greedy {
        if let Some(sol) = accept(&mut trace, Route::GreedyFallback, ord) {
            return Ok(sol);
        }
    }

    if !brute_tried && s.len() <= params.brute_cap {
        match brute(g, s, params) {
            Ok(Some(ord)) => {
                trace.attempts.push(Attempt { route: Route::Brute, seed, outcome: "ordered".into(), stages: Vec::new() });
                if let Some(sol) = accept(&mut trace, Route::Brute, ord) {
                    return Ok(sol);
                }
            }
            Ok(None) => {
                trace.attempts.push(Attempt { route: Route::Brute, seed, outcome: "exhausted".into(), stages: Vec::new() });
                trace.route = Route::Brute;
                trace.status = Status::None;
                trace.verified = true;
                trace.note = Some(format!("exhaustive search over {} elements found no valid ordering", s.len()));
                return Ok(Solution { status: Status::None, ordering: None, trace });
            }
            Err(e) => {
                trace.attempts.push(Attempt { route: Route::Brute, seed, outcome: e.to_string(), stages: Vec::new() });
            }
        }
    }

    trace.route = primary;
    trace.status = Status::Fail;
    if trace.note.is_none() {
        trace.note = Some("all routes and fallbacks gave up; this says nothing about existence".into());
    }
    Ok(Solution { status: Status::Fail, ordering: None, trace })
}
