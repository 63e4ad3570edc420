use serde::Serialize;

use crate::error::{Error, Result};
use crate::orderings::{DEFAULT_BRUTE_CAP, DEFAULT_GREEDY_RESTARTS};
use crate::rng::DEFAULT_SEED;

use super::trace::Route;

/// Solver knobs. The defaults are desk-scale stand-ins for the asymptotic
/// constants; verification and retries, not the constants, make routes sound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverParams {
    /// Regularity slack: `|S ∩ H| >= (1 - eps)|S|`.
    pub eps: f64,
    /// Piece size in the decomposition, as a fraction of `|S|`. Also sets the
    /// ultra-dense line `|S| >= N - N^(1 - gamma)`.
    pub gamma: f64,
    /// Doubling cap for structured pieces.
    pub k: f64,
    /// Junk allowance of the decomposition.
    pub alpha: f64,
    /// Coset overlap parameter: new cosets may meet old ones in `nu^(1/4) s` points.
    pub nu: f64,
    /// The 99% path may miss `mu * |pool|` colours.
    pub mu: f64,
    /// Fraction of free vertices held back for the tails stage.
    pub p: f64,
    /// Fraction of the remaining vertices offered to the 99% stage.
    pub q: f64,
    /// Fraction of the main colours set aside as the absorber's reservoir.
    pub q_prime: f64,
    /// Sparse-cut level the 99% stage expects of its colour set.
    pub zeta: f64,
    /// Sparse-cut level requested from the general-group certificate.
    pub eta: f64,
    /// Dense when `|S| >= dense_fraction * N` (F_2^n).
    pub dense_fraction: f64,
    /// General groups take the dense route when `|S| >= N^(1 - general_exponent)`.
    pub general_exponent: f64,
    pub seed: u64,
    /// Re-randomizations of a failed route.
    pub route_retries: usize,
    /// Attempts of the 99% path builder per call.
    pub path_retries: usize,
    /// Re-runs with leftover colours forced into the junk set.
    pub repair_retries: usize,
    pub greedy_restarts: usize,
    pub brute_cap: usize,
    pub allow_id: bool,
    /// Parallel brute force for single large instances.
    pub parallel: bool,
    /// Skip the dispatcher and run this route (the fallback ladder still applies).
    pub route: Option<Route>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            eps: 0.125,
            gamma: 0.125,
            k: 8.0,
            alpha: 0.25,
            nu: 1.0 / 256.0,
            mu: 1.0 / 16.0,
            p: 0.125,
            q: 0.875,
            q_prime: 0.25,
            zeta: 1.0 / 64.0,
            eta: 1.0 / 64.0,
            dense_fraction: 1.0 / 16.0,
            general_exponent: 0.125,
            seed: DEFAULT_SEED,
            route_retries: 3,
            path_retries: 8,
            repair_retries: 3,
            greedy_restarts: DEFAULT_GREEDY_RESTARTS,
            brute_cap: DEFAULT_BRUTE_CAP,
            allow_id: false,
            parallel: false,
            route: None,
        }
    }
}

/// Names accepted by [`SolverParams::set`].
pub const PARAM_KEYS: &[&str] = &[
    "eps",
    "gamma",
    "K",
    "alpha",
    "nu",
    "mu",
    "p",
    "q",
    "q'",
    "zeta",
    "eta",
    "dense_fraction",
    "general_exponent",
    "seed",
    "route_retries",
    "path_retries",
    "repair_retries",
    "greedy_restarts",
    "brute_cap",
    "route",
];

impl SolverParams {
    /// Checks ranges: fractions in (0, 1], `p + q <= 1`, and `q' <= 1 - mu q / 4`.
    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("eps", self.eps),
            ("gamma", self.gamma),
            ("alpha", self.alpha),
            ("nu", self.nu),
            ("mu", self.mu),
            ("p", self.p),
            ("q", self.q),
            ("q'", self.q_prime),
            ("zeta", self.zeta),
            ("eta", self.eta),
            ("dense_fraction", self.dense_fraction),
            ("general_exponent", self.general_exponent),
        ];
        for (name, x) in unit {
            if !(x > 0.0 && x <= 1.0) {
                return Err(Error::Input(format!("{name} = {x} must lie in (0, 1]")));
            }
        }
        if self.eps >= 1.0 {
            return Err(Error::Input("eps must be below 1".into()));
        }
        if self.k < 1.0 || !self.k.is_finite() {
            return Err(Error::Input(format!("K = {} must be at least 1", self.k)));
        }
        if self.p + self.q > 1.0 + 1e-12 {
            return Err(Error::Input(format!("p + q = {} exceeds 1", self.p + self.q)));
        }
        if self.q_prime > 1.0 - self.mu * self.q / 4.0 {
            return Err(Error::Input("q' must be at most 1 - mu q / 4".into()));
        }
        Ok(())
    }

    /// Sets one parameter from a `key=value` pair; unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut next = self.clone();
        next.assign(key, value)?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    fn assign(&mut self, key: &str, value: &str) -> Result<()> {
        let float = || value.parse::<f64>().map_err(|_| Error::Input(format!("{key}: not a number: {value}")));
        let count = || value.parse::<usize>().map_err(|_| Error::Input(format!("{key}: not a count: {value}")));
        match key {
            "eps" => self.eps = float()?,
            "gamma" => self.gamma = float()?,
            "K" | "k" => self.k = float()?,
            "alpha" => self.alpha = float()?,
            "nu" => self.nu = float()?,
            "mu" => self.mu = float()?,
            "p" => self.p = float()?,
            "q" => self.q = float()?,
            "q'" | "q_prime" => self.q_prime = float()?,
            "zeta" => self.zeta = float()?,
            "eta" => self.eta = float()?,
            "dense_fraction" => self.dense_fraction = float()?,
            "general_exponent" => self.general_exponent = float()?,
            "seed" => {
                self.seed = value.parse::<u64>().map_err(|_| Error::Input(format!("seed: not an integer: {value}")))?
            }
            "route_retries" => self.route_retries = count()?,
            "path_retries" => self.path_retries = count()?,
            "repair_retries" => self.repair_retries = count()?,
            "greedy_restarts" => self.greedy_restarts = count()?,
            "brute_cap" => self.brute_cap = count()?,
            "route" => self.route = Some(value.parse()?),
            _ => return Err(Error::Input(format!("unknown parameter {key}; known: {}", PARAM_KEYS.join(", ")))),
        }
        Ok(())
    }
}
