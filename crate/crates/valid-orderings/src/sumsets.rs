//! Sumsets, doubling, expansion testing and the structure/randomness split.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use itertools::Itertools;
use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, Subgroup};
use crate::linalg::XorBasis;
use crate::rng::{derive, rng, Rng};
use crate::spectral::wht_i64;
use crate::subset::Subset;

pub const RESERVOIR_RETRIES: usize = 1000;
pub const DEFAULT_EXPANSION_BUDGET: usize = 2000;

/// Exact product set `{a*b}`.
pub fn sumset(g: &Group, a: &Subset, b: &Subset) -> Subset {
    match g.cube_dim() {
        Some(n) if n <= 20 && a.len() * b.len() > 4 * g.order() => sumset_wht(a, b),
        _ => sumset_naive(g, a, b),
    }
}

pub fn sumset_naive(g: &Group, a: &Subset, b: &Subset) -> Subset {
    let mut out = Subset::empty(g.order());
    let bl = b.to_vec();
    for x in a.iter() {
        for &y in &bl {
            out.insert(g.mul(x, y));
        }
    }
    out
}

/// Support of the XOR-convolution of the two indicators, via exact integer
/// transforms. Both sets must live in a universe of size `2^n`, `n <= 20`.
pub fn sumset_wht(a: &Subset, b: &Subset) -> Subset {
    let n = a.universe();
    let mut fa: Vec<i64> = vec![0; n];
    let mut fb: Vec<i64> = vec![0; n];
    a.iter().for_each(|x| fa[x] = 1);
    b.iter().for_each(|x| fb[x] = 1);
    wht_i64(&mut fa).expect("power of two");
    wht_i64(&mut fb).expect("power of two");
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    wht_i64(&mut fa).expect("power of two");
    // fa now holds N times the number of representations
    Subset::from_indices(n, (0..n).filter(|&x| fa[x] > 0))
}

/// `|S+S| / |S|` as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Doubling {
    pub sumset: usize,
    pub size: usize,
}

impl Doubling {
    pub fn ratio(&self) -> f64 {
        self.sumset as f64 / self.size as f64
    }

    /// `|S+S| <= K |S|`.
    pub fn at_most(&self, k: f64) -> bool {
        self.sumset as f64 <= k * self.size as f64 + 1e-9
    }
}

impl fmt::Display for Doubling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sumset, self.size)
    }
}

pub fn doubling(g: &Group, s: &Subset) -> Result<Doubling> {
    if s.is_empty() {
        return Err(Error::Input("doubling of the empty set".into()));
    }
    Ok(Doubling { sumset: sumset(g, s, s).len(), size: s.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RuzsaCheck {
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

/// `|V+T|^2 >= |V| |T+T|`.
pub fn ruzsa_check(g: &Group, v: &Subset, t: &Subset) -> Result<RuzsaCheck> {
    if !g.is_abelian() {
        return Err(Error::Unsupported("the Ruzsa inequality is stated for abelian groups".into()));
    }
    let vt = sumset(g, v, t).len() as u128;
    let tt = sumset(g, t, t).len() as u128;
    let lhs = vt * vt;
    let rhs = v.len() as u128 * tt;
    Ok(RuzsaCheck { lhs, rhs, holds: lhs >= rhs })
}

fn frac_ceil(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// A random `X ⊆ S` of size `ceil(gamma |S|)` with `|X+X| >= (gamma^2 / 2) |S+S|`.
pub fn reservoir(g: &Group, s: &Subset, gamma: f64, seed: u64) -> Result<Subset> {
    if gamma * (s.len() as f64) < 2.0 - 1e-9 {
        return Err(Error::Precondition("reservoir needs gamma |S| >= 2".into()));
    }
    let m = frac_ceil(gamma * s.len() as f64).min(s.len());
    let target = gamma * gamma / 2.0 * sumset(g, s, s).len() as f64;
    let elems = s.to_vec();
    let mut r = rng(seed);
    for _ in 0..RESERVOIR_RETRIES {
        let x = Subset::from_indices(g.order(), elems.choose_multiple(&mut r, m).copied());
        if sumset(g, &x, &x).len() as f64 >= target {
            return Ok(x);
        }
    }
    Err(Error::Internal("reservoir sampling exhausted its retries".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Trial {
    pub hash: u64,
    pub size: usize,
    pub sumset: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Verdict {
    CertifiedExhaustive,
    CertifiedSampled { samples: usize },
    Refuted { witness: Vec<usize> },
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub gamma: f64,
    pub k: f64,
    pub trials: Vec<Trial>,
    pub verdict: Verdict,
}

impl ExpansionReport {
    pub fn certified(&self) -> bool {
        !matches!(self.verdict, Verdict::Refuted { .. })
    }
}

fn subset_hash(elems: &[usize]) -> u64 {
    let mut h = DefaultHasher::new();
    elems.hash(&mut h);
    h.finish()
}

fn binomial_at_most(n: usize, k: usize, cap: usize) -> bool {
    let k = k.min(n - k.min(n));
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > cap as u128 {
            return false;
        }
    }
    true
}

/// Greedily grows a set from `seed_elem`, adding the element of `pool` that
/// enlarges the sumset least, until it has `m` elements.
fn greedy_growth(g: &Group, pool: &[usize], m: usize, seed_elem: usize, r: &mut Rng) -> Vec<usize> {
    let mut chosen = vec![seed_elem];
    let mut sums = Subset::from_indices(g.order(), [g.mul(seed_elem, seed_elem)]);
    let mut available: Vec<usize> = pool.iter().copied().filter(|&x| x != seed_elem).collect();
    while chosen.len() < m && !available.is_empty() {
        // sample candidates to keep this cheap on big pools
        let probe: Vec<usize> = if available.len() > 48 {
            (0..available.len()).choose_multiple(r, 48)
        } else {
            (0..available.len()).collect()
        };
        let cost = |x: usize| -> usize {
            let mut extra = 0;
            let mut seen = Subset::empty(g.order());
            for &y in chosen.iter().chain(std::iter::once(&x)) {
                for z in [g.mul(x, y), g.mul(y, x)] {
                    if !sums.contains(z) && seen.insert(z) {
                        extra += 1;
                    }
                }
            }
            extra
        };
        let best = probe.into_iter().min_by_key(|&i| (cost(available[i]), i)).expect("nonempty");
        let x = available.swap_remove(best);
        for &y in chosen.iter().chain(std::iter::once(&x)) {
            sums.insert(g.mul(x, y));
            sums.insert(g.mul(y, x));
        }
        chosen.push(x);
    }
    chosen
}

/// Grows a span from a few random elements of `pool` until it holds `m` of
/// them; returns `pool ∩ span`.
fn span_probe(pool: &Subset, m: usize, r: &mut Rng) -> (XorBasis, Vec<usize>) {
    let elems = pool.to_vec();
    let start = r.gen_range(1..=3).min(elems.len());
    let mut basis = XorBasis::from_vectors(elems.choose_multiple(r, start).copied());
    let inside = |b: &XorBasis| elems.iter().copied().filter(|&x| b.contains(x)).collect::<Vec<_>>();
    let mut members = inside(&basis);
    while members.len() < m {
        let outside: Vec<usize> = elems.iter().copied().filter(|&x| !basis.contains(x)).collect();
        if outside.is_empty() {
            break;
        }
        let probe: Vec<usize> = outside.choose_multiple(r, 24).copied().collect();
        let next = probe
            .into_iter()
            .map(|x| {
                let mut b = basis.clone();
                b.insert(x);
                (inside(&b).len(), x)
            })
            .max_by_key(|&(cnt, x)| (cnt, std::cmp::Reverse(x)))
            .expect("nonempty probe");
        basis.insert(next.1);
        members = inside(&basis);
    }
    (basis, members)
}

/// Tests whether every `ceil(gamma |E|)`-subset `E'` has `|E'+E'| >= K |E'|`.
pub fn test_everywhere_expanding(
    g: &Group,
    e: &Subset,
    gamma: f64,
    k: f64,
    budget: usize,
    seed: u64,
) -> ExpansionReport {
    let elems = e.to_vec();
    let m = frac_ceil(gamma.min(1.0) * elems.len() as f64).min(elems.len());
    let mut trials = Vec::new();
    let judge = |cand: &[usize], trials: &mut Vec<Trial>| -> bool {
        let s = Subset::from_indices(g.order(), cand.iter().copied());
        let size = sumset(g, &s, &s).len();
        let pass = size as f64 >= k * cand.len() as f64 - 1e-9;
        let mut sorted = cand.to_vec();
        sorted.sort_unstable();
        trials.push(Trial { hash: subset_hash(&sorted), size: cand.len(), sumset: size, pass });
        pass
    };
    if m == 0 {
        return ExpansionReport { gamma, k, trials, verdict: Verdict::CertifiedExhaustive };
    }
    if binomial_at_most(elems.len(), m, budget) {
        for cand in elems.iter().copied().combinations(m) {
            if !judge(&cand, &mut trials) {
                return ExpansionReport { gamma, k, trials, verdict: Verdict::Refuted { witness: cand } };
            }
        }
        return ExpansionReport { gamma, k, trials, verdict: Verdict::CertifiedExhaustive };
    }
    let mut r = rng(seed);
    for i in 0..budget {
        let cand: Vec<usize> = match i % 4 {
            // adversarial: sets that live in small spans, or grow with small sumset
            1 if g.cube_dim().is_some() => {
                let (_, members) = span_probe(e, m, &mut r);
                let mut c = members;
                c.shuffle(&mut r);
                c.truncate(m);
                if c.len() < m {
                    continue;
                }
                c
            }
            3 => {
                let s0 = *elems.choose(&mut r).expect("nonempty");
                greedy_growth(g, &elems, m, s0, &mut r)
            }
            _ => elems.choose_multiple(&mut r, m).copied().collect(),
        };
        if !judge(&cand, &mut trials) {
            let mut w = cand;
            w.sort_unstable();
            return ExpansionReport { gamma, k, trials, verdict: Verdict::Refuted { witness: w } };
        }
    }
    let samples = trials.len();
    ExpansionReport { gamma, k, trials, verdict: Verdict::CertifiedSampled { samples } }
}

#[derive(Clone, Debug)]
pub struct Piece {
    pub elems: Subset,
    pub doubling: Doubling,
    pub container: Subgroup,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub pieces: Vec<Piece>,
    pub expander: Subset,
    pub report: Option<ExpansionReport>,
    /// Leftover elements, at most `alpha |S|` of them.
    pub junk: Subset,
    pub gamma: f64,
    pub k: f64,
    pub alpha: f64,
}

impl Decomposition {
    /// Checks disjointness, coverage, size floors and doubling caps.
    pub fn check(&self, g: &Group, s: &Subset) -> Result<()> {
        let floor = frac_ceil(self.gamma * s.len() as f64);
        let mut covered = Subset::empty(g.order());
        for p in &self.pieces {
            if !p.elems.is_disjoint(&covered) {
                return Err(Error::Internal("pieces overlap".into()));
            }
            if p.elems.len() < floor || !p.doubling.at_most(self.k) {
                return Err(Error::Internal("piece violates its size floor or doubling cap".into()));
            }
            if !p.elems.is_subset(p.container.members()) {
                return Err(Error::Internal("piece escapes its container".into()));
            }
            covered.union_with(&p.elems);
        }
        for part in [&self.expander, &self.junk] {
            if !part.is_disjoint(&covered) {
                return Err(Error::Internal("decomposition parts overlap".into()));
            }
            covered.union_with(part);
        }
        if covered != *s {
            return Err(Error::Internal("decomposition does not cover S".into()));
        }
        if self.junk.len() as f64 > self.alpha * s.len() as f64 + 1e-9 {
            return Err(Error::Internal("too much junk".into()));
        }
        Ok(())
    }
}

/// Looks for a piece of at least `m` elements of `pool` with doubling at most `k`.
fn find_piece(g: &Group, pool: &Subset, m: usize, k: f64, r: &mut Rng) -> Option<Subset> {
    if pool.len() < m || m == 0 {
        return None;
    }
    let elems = pool.to_vec();
    for attempt in 0..64 {
        let cand: Vec<usize> = if attempt % 4 == 3 {
            let s0 = *elems.choose(r).expect("nonempty");
            greedy_growth(g, &elems, m, s0, r)
        } else {
            let (mut basis, mut members) = span_probe(pool, m, r);
            if members.len() < m {
                continue;
            }
            let mut whole = Subset::from_indices(g.order(), members.iter().copied());
            if doubling(g, &whole).is_ok_and(|d| d.at_most(k)) {
                // saturate: keep enlarging the span while the slice stays dense and structured
                loop {
                    let best = elems
                        .iter()
                        .copied()
                        .filter(|&x| !basis.contains(x))
                        .map(|x| {
                            let mut b = basis.clone();
                            b.insert(x);
                            let inside = elems.iter().filter(|&&y| b.contains(y)).count();
                            (inside, std::cmp::Reverse(x), b)
                        })
                        .max_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
                    let Some((_, _, b)) = best else { break };
                    let bigger = Subset::from_indices(g.order(), elems.iter().copied().filter(|&y| b.contains(y)));
                    // stop once the slice thins out inside its span
                    let thinner = 4 * bigger.len() * (1 << basis.dim()) < 3 * whole.len() * (1 << b.dim());
                    if thinner || !doubling(g, &bigger).is_ok_and(|d| d.at_most(k)) {
                        break;
                    }
                    basis = b;
                    whole = bigger;
                }
                return Some(whole);
            }
            members.shuffle(r);
            members.truncate(m);
            members
        };
        let s = Subset::from_indices(g.order(), cand);
        if s.len() >= m && doubling(g, &s).is_ok_and(|d| d.at_most(k)) {
            return Some(s);
        }
    }
    None
}

/// Splits `S` into small-doubling pieces, an expanding remainder, and junk.
pub fn decompose(g: &Group, s: &Subset, gamma: f64, k: f64, alpha: f64, seed: u64) -> Result<Decomposition> {
    if g.cube_dim().is_none() {
        return Err(Error::Unsupported("decompose needs F_2^n".into()));
    }
    let m = frac_ceil(gamma * s.len() as f64).max(1);
    let mut r = rng(derive(seed, 0xdec0));
    let mut remaining = s.clone();
    let mut pieces = Vec::new();
    while let Some(p) = find_piece(g, &remaining, m, k, &mut r) {
        remaining.difference_with(&p);
        let container = g.span(&p);
        let d = doubling(g, &p)?;
        pieces.push(Piece { elems: p, doubling: d, container });
    }
    let (expander, junk, report) = if remaining.len() as f64 <= alpha * s.len() as f64 {
        (g.empty_subset(), remaining, None)
    } else {
        let rep = test_everywhere_expanding(
            g,
            &remaining,
            gamma / alpha,
            k / alpha,
            DEFAULT_EXPANSION_BUDGET,
            derive(seed, 0xe4a),
        );
        (remaining, g.empty_subset(), Some(rep))
    };
    let out = Decomposition { pieces, expander, report, junk, gamma, k, alpha };
    out.check(g, s)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2(n: usize) -> Group {
        Group::boolean_cube(n).unwrap()
    }

    #[test]
    fn sumset_examples() {
        let g = f2(3);
        let a = g.subset_of([1, 2, 4]).unwrap();
        assert_eq!(sumset(&g, &a, &a).to_vec(), vec![0, 3, 5, 6]);
        assert_eq!(doubling(&g, &a).unwrap(), Doubling { sumset: 4, size: 3 });
        let g4 = f2(4);
        let h = g4.subset_of([0, 3, 5, 6]).unwrap();
        assert_eq!(sumset_wht(&h, &h), h);
        assert_eq!(doubling(&g4, &h).unwrap().ratio(), 1.0);
        assert!(doubling(&g4, &g4.empty_subset()).is_err());
    }

    #[test]
    fn basis_doubling() {
        let g = f2(10);
        let b = g.subset_of((0..10).map(|i| 1 << i)).unwrap();
        let d = doubling(&g, &b).unwrap();
        assert_eq!(d.to_string(), "46/10");
    }

    #[test]
    fn wht_sumset_matches_naive() {
        let g = f2(8);
        let mut r = rng(5);
        for _ in 0..20 {
            let a = Subset::from_indices(256, (0..256).choose_multiple(&mut r, 40));
            let b = Subset::from_indices(256, (0..256).choose_multiple(&mut r, 30));
            assert_eq!(sumset_wht(&a, &b), sumset_naive(&g, &a, &b));
        }
    }

    #[test]
    fn ruzsa_examples() {
        let g = f2(4);
        let v = g.subset_of([0, 3, 5, 6]).unwrap();
        let c = ruzsa_check(&g, &v, &v).unwrap();
        assert_eq!(c.lhs, c.rhs);
        let z = g.subset_of([0]).unwrap();
        let t = g.subset_of([1, 2, 12]).unwrap();
        assert!(ruzsa_check(&g, &z, &t).unwrap().holds);
        let s3 = crate::group::named::symmetric(3).unwrap();
        assert!(matches!(ruzsa_check(&s3, &v, &v), Err(Error::Unsupported(_))));
    }

    #[test]
    fn reservoir_bound() {
        let g = f2(6);
        let x = reservoir(&g, &g.nonidentity(), 0.125, 1).unwrap();
        assert_eq!(x.len(), 8);
        let g10 = f2(10);
        let mut r = rng(9);
        let s = Subset::from_indices(1024, (1..1024).choose_multiple(&mut r, 64));
        let x = reservoir(&g10, &s, 0.25, 2).unwrap();
        assert!(sumset(&g10, &x, &x).len() as f64 >= 0.25 * 0.25 / 2.0 * sumset(&g10, &s, &s).len() as f64);
        let pair = g10.subset_of([1, 2, 3, 4]).unwrap();
        assert_eq!(reservoir(&g10, &pair, 0.5, 3).unwrap().len(), 2);
        assert!(reservoir(&g10, &pair, 0.25, 3).is_err());
    }

    #[test]
    fn expansion_examples() {
        let g = f2(4);
        let e = g.subset_of([3, 5, 6]).unwrap();
        let rep = test_everywhere_expanding(&g, &e, 1.0, 2.0, 100, 1);
        assert_eq!(rep.verdict, Verdict::Refuted { witness: vec![3, 5, 6] });
        let g12 = f2(12);
        let basis = g12.subset_of((0..8).map(|i| 1 << i)).unwrap();
        // four independent vectors give 1 + 6 = 7 sums
        let rep = test_everywhere_expanding(&g12, &basis, 0.5, 1.75, 100, 1);
        assert_eq!(rep.verdict, Verdict::CertifiedExhaustive);
        assert_eq!(rep.trials.len(), 70);
        let rep = test_everywhere_expanding(&g12, &basis, 0.5, 2.0, 100, 1);
        assert!(matches!(rep.verdict, Verdict::Refuted { ref witness } if witness.len() == 4));
        let mut r = rng(4);
        let e = Subset::from_indices(4096, (1..4096).choose_multiple(&mut r, 8));
        let rep = test_everywhere_expanding(&g12, &e, 0.5, 1.75, 100, 1);
        assert_eq!(rep.verdict, Verdict::CertifiedExhaustive);
        let rep = test_everywhere_expanding(&g12, &e, 0.5, 3.0, 100, 1);
        assert!(!rep.certified());
    }

    #[test]
    fn decomposition_examples() {
        let g = f2(8);
        let a: Vec<usize> = XorBasis::from_vectors([1, 2, 4]).elements();
        let b: Vec<usize> = XorBasis::from_vectors([8, 16, 32]).elements();
        let s = g.subset_of(a.iter().chain(&b).copied().filter(|&x| x != 0)).unwrap();
        let d = decompose(&g, &s, 0.4, 4.0, 0.25, 1).unwrap();
        assert_eq!(d.pieces.len(), 2);
        assert!(d.expander.is_empty());
        let sub = g.subset_of(a.iter().copied().filter(|&x| x != 0)).unwrap();
        let d = decompose(&g, &sub, 0.125, 8.0, 0.25, 1).unwrap();
        assert_eq!(d.pieces.len(), 1);
        assert_eq!(d.pieces[0].elems, sub);
    }

    #[test]
    fn random_set_is_unstructured() {
        let g = f2(16);
        let mut r = rng(11);
        let s = Subset::from_indices(1 << 16, (1..1 << 16).choose_multiple(&mut r, 32));
        // ten generic elements have 46 > 4 * 10 sums, so no piece qualifies
        let d = decompose(&g, &s, 0.3, 4.0, 0.25, 1).unwrap();
        assert!(d.pieces.is_empty());
        assert_eq!(d.expander, s);
        assert!(d.report.is_some());
    }
}
