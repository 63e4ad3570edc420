//! Finding a subgroup on which the colour set is mildly quasirandom.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, Subgroup};
use crate::linalg::XorBasis;
use crate::rng::rng;
use crate::spectral::{certified_gap, certify_no_sparse_cut, spectrum, CutCertificate, SpectrumData};
use crate::subset::Subset;

/// One density-increment step.
#[derive(Clone, Debug, Serialize)]
pub struct Increment {
    pub step: usize,
    /// The character, as an element of F_2^n in coordinates of the current subgroup.
    pub character: usize,
    pub coefficient: i64,
    pub threshold: f64,
    pub size_before: usize,
    pub size_after: usize,
    pub dim_after: usize,
}

#[derive(Clone, Debug)]
pub struct RegularityResult {
    pub h: Subgroup,
    /// `S ∩ H`.
    pub s_in: Subset,
    /// Certificate for `Cayley_H(S ∩ H)`.
    pub certificate: CutCertificate,
    pub increments: Vec<Increment>,
}

fn local_subset(h_elems: &[usize], s: &Subset) -> Subset {
    Subset::from_indices(h_elems.len(), h_elems.iter().enumerate().filter(|(_, &x)| s.contains(x)).map(|(i, _)| i))
}

/// Density increment over F_2^n. Descends while some nontrivial character has
/// coefficient at least `(1 - eps / 2^j) |S_j|`, then certifies the final
/// subgroup at `eta = eps * sigma / 2`.
pub fn regularize_f2n(g: &Group, s: &Subset, eps: f64) -> Result<RegularityResult> {
    let n = g.cube_dim().ok_or_else(|| Error::Unsupported("regularize_f2n needs F_2^n".into()))?;
    if s.is_empty() {
        return Err(Error::Precondition("regularity needs a nonempty set".into()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Input(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    let sigma = s.len() as f64 / g.order() as f64;
    let delta = eps * sigma / 2.0;
    let mut basis = XorBasis::from_vectors((0..n).map(|i| 1 << i));
    let mut s_j = s.clone();
    let mut increments = Vec::new();
    for j in 0.. {
        let h = Subgroup::from_basis(g, basis.clone());
        let (local, map) = g.restrict(&h);
        let t = local_subset(&map, &s_j);
        let threshold = (1.0 - eps / f64::powi(2.0, j)) * t.len() as f64;
        let spec = spectrum(&local, &t)?;
        let SpectrumData::Fourier(c) = &spec.data else { unreachable!("cube spectrum is Fourier") };
        let best = (1..c.len()).max_by(|&a, &b| c[a].cmp(&c[b]).then(b.cmp(&a)));
        match best {
            Some(xi) if c[xi] as f64 >= threshold => {
                // annihilator of xi inside H_j, mapped back to global vectors
                let mut next = XorBasis::new();
                for coords in 0..local.order() {
                    if (coords & xi).count_ones() % 2 == 0 {
                        next.insert(map[coords]);
                    }
                }
                let next_members = Subset::from_indices(g.order(), next.elements());
                let s_next = s_j.intersection(&next_members);
                let floor = (1.0 - eps / f64::powi(2.0, j + 1)) * s_j.len() as f64;
                if (s_next.len() as f64) < floor - 1e-9 {
                    return Err(Error::Internal(format!("increment step {j} lost too much of S")));
                }
                increments.push(Increment {
                    step: j as usize,
                    character: xi,
                    coefficient: c[xi],
                    threshold,
                    size_before: s_j.len(),
                    size_after: s_next.len(),
                    dim_after: next.dim(),
                });
                basis = next;
                s_j = s_next;
            }
            _ => {
                let certificate = certify_no_sparse_cut(&local, &t, delta)?;
                if !certificate.holds() {
                    return Err(Error::Internal("final subgroup failed its certificate".into()));
                }
                if (s_j.len() as f64) < (1.0 - eps) * s.len() as f64 - 1e-9 {
                    return Err(Error::Internal("regularity kept too little of S".into()));
                }
                return Ok(RegularityResult { h, s_in: s_j, certificate, increments });
            }
        }
    }
    unreachable!()
}

/// Searches subgroups of index at most `1 / ((1 - eps) sigma)` for the one
/// containing `(1 - eps)|S|` of `S` with the largest spectral gap.
pub fn regularize_general(g: &Group, s: &Subset, eps: f64) -> Result<RegularityResult> {
    if s.is_empty() {
        return Err(Error::Precondition("regularity needs a nonempty set".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Input(format!("eps = {eps} must lie in (0, 1)")));
    }
    let sigma = s.len() as f64 / g.order() as f64;
    let max_index = (1.0 / ((1.0 - eps) * sigma) + 1e-9).floor().max(1.0) as usize;
    let need = (1.0 - eps) * s.len() as f64 - 1e-9;
    let candidates: Vec<Subgroup> = g
        .subgroups_up_to_index(max_index)?
        .into_iter()
        .filter(|h| h.members().intersection_len(s) as f64 >= need)
        .collect();
    let scored: Vec<(f64, usize)> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let (local, map) = g.restrict(h);
            let t = local_subset(&map, s);
            let beta = spectrum(&local, &t).and_then(|sp| certified_gap(&sp, t.len())).unwrap_or(f64::NEG_INFINITY);
            (beta, i)
        })
        .collect();
    // largest gap, then the larger subgroup, then enumeration order
    let best = scored
        .iter()
        .copied()
        .max_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(candidates[a.1].order().cmp(&candidates[b.1].order()))
                .then(b.1.cmp(&a.1))
        })
        .ok_or_else(|| Error::Internal("no subgroup keeps enough of S".into()))?;
    if best.0 <= 1e-12 {
        return Err(Error::Internal("no qualifying subgroup has a positive spectral gap".into()));
    }
    let h = candidates[best.1].clone();
    let (local, map) = g.restrict(&h);
    let t = local_subset(&map, s);
    let eta = best.0.min(1.0) * t.len() as f64 / local.order() as f64;
    let certificate = certify_no_sparse_cut(&local, &t, eta * (1.0 - 1e-9))?;
    if !certificate.holds() {
        return Err(Error::Internal("chosen subgroup failed its certificate".into()));
    }
    let s_in = s.intersection(h.members());
    Ok(RegularityResult { h, s_in, certificate, increments: Vec::new() })
}

/// When `|S0| > (1 - eps^3)|H|`, moves random elements of `S0` out until it fits;
/// returns the kept part and the removed part.
pub fn trim_dense(h: &Subgroup, s0: &Subset, eps: f64, seed: u64) -> (Subset, Subset) {
    let cap = ((1.0 - eps.powi(3)) * h.order() as f64).floor() as usize;
    let mut kept = s0.clone();
    let mut removed = Subset::empty(s0.universe());
    if kept.len() > cap {
        let mut elems = kept.to_vec();
        elems.shuffle(&mut rng(seed));
        for &x in elems.iter().take(kept.len() - cap) {
            kept.remove(x);
            removed.insert(x);
        }
    }
    (kept, removed)
}
