use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Trivial,
    Brute,
    Quotient,
    DenseF2n,
    UltraDenseFallback,
    SparseStructured,
    SparseExpanding,
    DenseGeneral,
    GreedyFallback,
}

impl Route {
    pub const ALL: [Route; 9] = [
        Route::Trivial,
        Route::Brute,
        Route::Quotient,
        Route::DenseF2n,
        Route::UltraDenseFallback,
        Route::SparseStructured,
        Route::SparseExpanding,
        Route::DenseGeneral,
        Route::GreedyFallback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::Trivial => "trivial",
            Route::Brute => "brute",
            Route::Quotient => "quotient",
            Route::DenseF2n => "dense-f2n",
            Route::UltraDenseFallback => "ultra-dense-fallback",
            Route::SparseStructured => "sparse-structured",
            Route::SparseExpanding => "sparse-expanding",
            Route::DenseGeneral => "dense-general",
            Route::GreedyFallback => "greedy-fallback",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Route::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Route::ALL.iter().map(|r| r.name()).collect();
            Error::Input(format!("unknown route {s}; known: {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// A verified ordering.
    Ok,
    /// Exhaustive search proved that no ordering exists.
    None,
    /// Every route and fallback gave up. Never a claim about existence.
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::None => "none",
            Status::Fail => "fail",
        })
    }
}

/// One randomized stage: what ran, with which seed, how many retries it used
/// and a short summary of its artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub name: String,
    pub seed: u64,
    pub retries: usize,
    pub detail: String,
}

/// One route attempt and how it ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub route: Route,
    pub seed: u64,
    pub outcome: String,
    pub stages: Vec<Stage>,
}

/// A projection `F_2^n -> F_2^n / <v>` taken because `v` is not in `S + S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientStep {
    pub v: usize,
    pub dim_after: usize,
}

/// Everything a solve call did. Contains no timings, so equal seeds give equal traces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveTrace {
    pub group: String,
    pub order: usize,
    pub size: usize,
    pub seed: u64,
    pub status: Status,
    /// The route that produced the answer.
    pub route: Route,
    /// For the quotient route: the route used on the reduced instance.
    pub inner_route: Option<Route>,
    pub quotient_steps: Vec<QuotientStep>,
    pub attempts: Vec<Attempt>,
    pub retries: usize,
    pub repairs: usize,
    pub verified: bool,
    pub note: Option<String>,
}

impl SolveTrace {
    pub fn new(group: &str, order: usize, size: usize, seed: u64) -> SolveTrace {
        SolveTrace {
            group: group.to_string(),
            order,
            size,
            seed,
            status: Status::Fail,
            route: Route::Trivial,
            inner_route: None,
            quotient_steps: Vec::new(),
            attempts: Vec::new(),
            retries: 0,
            repairs: 0,
            verified: false,
            note: None,
        }
    }

    /// Plain-text rendering for `--trace`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out += &format!("trace group={} order={} size={} seed={}\n", self.group, self.order, self.size, self.seed);
        out += &format!("route {}", self.route);
        if let Some(inner) = self.inner_route {
            out += &format!(" (inner {inner})");
        }
        out += &format!("\nstatus {} verified={} retries={} repairs={}\n", self.status, self.verified, self.retries, self.repairs);
        for q in &self.quotient_steps {
            out += &format!("quotient v={} dim={}\n", q.v, q.dim_after);
        }
        for a in &self.attempts {
            out += &format!("attempt {} seed={} -> {}\n", a.route, a.seed, a.outcome);
            for s in &a.stages {
                out += &format!("  stage {} seed={} retries={} {}\n", s.name, s.seed, s.retries, s.detail);
            }
        }
        if let Some(n) = &self.note {
            out += &format!("note {n}\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn route_names_round_trip() {
        for r in Route::ALL {
            assert_eq!(r.name().parse::<Route>().unwrap(), r);
        }
        assert!("fast".parse::<Route>().is_err());
    }
}
