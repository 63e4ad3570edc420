//! Spectra of Cayley graphs and sparse-cut certificates.
//!
//! Over F_2^n the spectrum of `Cayley(S)` is the Walsh–Hadamard transform of the
//! indicator of `S`. For other groups we use eigenvalues of the adjacency matrix
//! `A[g][g*s] = 1`. Cut certificates use the second eigenvalue of `(A + A^T)/2`:
//! for any cut, `e(X1, X2) >= (|T| - lambda_2) |X1| |X2| / N`, which needs no
//! normality of `A`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, GroupKind};
use crate::subset::Subset;

pub const EIGEN_CAP: usize = 512;
pub const EXHAUSTIVE_CUT_MAX: usize = 16;

fn check_pow2(len: usize) -> Result<()> {
    if len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Input(format!("transform length {len} is not a power of two")))
    }
}

/// In-place Walsh–Hadamard transform, `f^(xi) = sum_x f(x) (-1)^<xi, x>`.
pub fn wht(f: &mut [f64]) -> Result<()> {
    check_pow2(f.len())?;
    let mut h = 1;
    while h < f.len() {
        for block in f.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// Exact integer transform.
pub fn wht_i64(f: &mut [i64]) -> Result<()> {
    check_pow2(f.len())?;
    let mut h = 1;
    while h < f.len() {
        for block in f.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

pub fn indicator_i64(s: &Subset) -> Vec<i64> {
    let mut v = vec![0i64; s.universe()];
    for x in s.iter() {
        v[x] = 1;
    }
    v
}

#[derive(Clone, Debug)]
pub enum SpectrumData {
    /// Coefficients indexed by character.
    Fourier(Vec<i64>),
    /// Adjacency eigenvalues, and the eigenvalues of the symmetrized adjacency
    /// in decreasing order.
    Eigen { values: Vec<Complex<f64>>, symmetric: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// `|S|`, the trivial eigenvalue.
    pub size: usize,
    pub data: SpectrumData,
}

impl Spectrum {
    /// Largest nontrivial coefficient or eigenvalue real part; `None` for the trivial group.
    pub fn max_nontrivial(&self) -> Option<f64> {
        match &self.data {
            SpectrumData::Fourier(c) => c[1..].iter().max().map(|&x| x as f64),
            SpectrumData::Eigen { values, .. } => {
                let trivial = trivial_index(values, self.size as f64)?;
                values
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != trivial)
                    .map(|(_, z)| z.re)
                    .max_by(f64::total_cmp)
            }
        }
    }

    /// Second eigenvalue of the symmetrized adjacency. Equal to
    /// [`Spectrum::max_nontrivial`] whenever the adjacency is normal.
    pub fn max_nontrivial_symmetric(&self) -> Option<f64> {
        match &self.data {
            SpectrumData::Fourier(_) => self.max_nontrivial(),
            SpectrumData::Eigen { symmetric, .. } => symmetric.get(1).copied(),
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            SpectrumData::Fourier(c) => c.len(),
            SpectrumData::Eigen { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const SCHUR_TOL: f64 = 1e-13;
const SCHUR_ITERS: usize = 1000;

fn trivial_index(values: &[Complex<f64>], size: f64) -> Option<usize> {
    (0..values.len()).min_by(|&i, &j| (values[i] - size).norm().total_cmp(&(values[j] - size).norm()))
}

fn adjacency(g: &Group, s: &Subset) -> DMatrix<f64> {
    let n = g.order();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for v in 0..n {
        for x in s.iter() {
            a[(v, g.mul(v, x))] += 1.0;
        }
    }
    a
}

fn symmetrized(g: &Group, s: &Subset) -> DMatrix<f64> {
    let a = adjacency(g, s);
    (&a + a.transpose()) * 0.5
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn spectrum(g: &Group, s: &Subset) -> Result<Spectrum> {
    let size = s.len();
    match g.kind() {
        GroupKind::BooleanCube { .. } => {
            let mut c = indicator_i64(s);
            wht_i64(&mut c)?;
            Ok(Spectrum { size, data: SpectrumData::Fourier(c) })
        }
        GroupKind::Cyclic { m } => {
            // eigenvalue for the character k is sum_s exp(2 pi i k s / m)
            let m = *m;
            let values: Vec<Complex<f64>> = (0..m)
                .map(|k| {
                    s.iter()
                        .map(|x| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * ((k * x) % m) as f64 / m as f64))
                        .sum()
                })
                .collect();
            let symmetric = sorted_desc(values.iter().map(|z| z.re).collect());
            Ok(Spectrum { size, data: SpectrumData::Eigen { values, symmetric } })
        }
        GroupKind::Table { .. } => {
            if g.order() > EIGEN_CAP {
                return Err(Error::Capacity { what: format!("eigensolve of order {}", g.order()), limit: EIGEN_CAP });
            }
            // the default Schur tolerance (machine epsilon, no iteration cap) can
            // spin forever on the highly degenerate spectra of Cayley graphs
            let a = adjacency(g, s);
            let tol = SCHUR_TOL * (1.0 + a.norm());
            let schur = a.try_schur(tol, SCHUR_ITERS * g.order()).ok_or_else(|| Error::Internal("eigensolver did not converge".into()))?;
            let values: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
            let symmetric = sorted_desc(symmetrized(g, s).symmetric_eigenvalues().iter().copied().collect());
            Ok(Spectrum { size, data: SpectrumData::Eigen { values, symmetric } })
        }
    }
}

/// `beta = 1 - max_nontrivial / |T|`; 1 for the trivial group.
pub fn spectral_gap(spec: &Spectrum, size_t: usize) -> Result<f64> {
    if size_t == 0 {
        return Err(Error::Input("spectral gap needs |T| >= 1".into()));
    }
    Ok(spec.max_nontrivial().map_or(1.0, |m| 1.0 - m / size_t as f64))
}

/// The gap used for certificates, from the symmetrized spectrum.
pub fn certified_gap(spec: &Spectrum, size_t: usize) -> Result<f64> {
    if size_t == 0 {
        return Err(Error::Input("spectral gap needs |T| >= 1".into()));
    }
    Ok(spec.max_nontrivial_symmetric().map_or(1.0, |m| 1.0 - m / size_t as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Spectral,
    Exhaustive,
    Refuted,
    Inconclusive,
}

/// A cut `X1 | X2` and the number of directed edges from `X1` to `X2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutWitness {
    pub x1: Vec<usize>,
    pub x2_len: usize,
    pub edges: u64,
}

impl CutWitness {
    pub fn density(&self) -> f64 {
        self.edges as f64 / (self.x1.len() * self.x2_len) as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CutCertificate {
    pub kind: CertificateKind,
    /// The density that was asked for.
    pub eta: f64,
    pub beta: f64,
    pub tau: f64,
    /// What was actually established: `min(beta, 1) * tau` for spectral, the
    /// exact minimum density for exhaustive.
    pub certified: f64,
    pub witness: Option<CutWitness>,
}

impl CutCertificate {
    pub fn holds(&self) -> bool {
        matches!(self.kind, CertificateKind::Spectral | CertificateKind::Exhaustive)
    }
}

/// Counts edges `v -> v*t` leaving the set `x1` (given as a membership mask).
pub fn cut_edges(g: &Group, t: &Subset, x1: &Subset) -> u64 {
    x1.iter().map(|v| t.iter().filter(|&x| !x1.contains(g.mul(v, x))).count() as u64).sum()
}

/// The sparsest directed cut by full enumeration. Needs `2 <= N <= 16`.
pub fn min_cut_exhaustive(g: &Group, t: &Subset) -> Result<CutWitness> {
    let n = g.order();
    if !(2..=EXHAUSTIVE_CUT_MAX).contains(&n) {
        return Err(Error::Capacity { what: format!("exhaustive cuts on {n} vertices"), limit: EXHAUSTIVE_CUT_MAX });
    }
    let nbr: Vec<u32> = (0..n).map(|v| t.iter().fold(0u32, |m, x| m | 1 << g.mul(v, x))).collect();
    // out-edges of v leaving X1 = |T| minus the out-neighbours inside, with multiplicity
    let full = (1u32 << n) - 1;
    let tlist: Vec<usize> = t.to_vec();
    let edges_of = |mask: u32| -> u64 {
        let mut e = 0u64;
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if nbr[v] & !mask == 0 {
                continue;
            }
            e += tlist.iter().filter(|&&x| mask >> g.mul(v, x) & 1 == 0).count() as u64;
        }
        e
    };
    let best = (1..full)
        .into_par_iter()
        .map(|mask| {
            let a = mask.count_ones() as u64;
            (edges_of(mask), a * (n as u64 - a), mask)
        })
        .reduce(
            || (u64::MAX, 1, 0),
            |x, y| {
                // compare e/d as rationals, then by mask
                let lhs = x.0 as u128 * y.1 as u128;
                let rhs = y.0 as u128 * x.1 as u128;
                if lhs < rhs || (lhs == rhs && x.2 < y.2) {
                    x
                } else {
                    y
                }
            },
        );
    let x1: Vec<usize> = (0..n).filter(|&v| best.2 >> v & 1 == 1).collect();
    Ok(CutWitness { x2_len: n - x1.len(), x1, edges: best.0 })
}

/// Best prefix cut when vertices are sorted by `score`, trying both directions.
pub fn sweep_cut(g: &Group, t: &Subset, score: &[f64]) -> Option<CutWitness> {
    let n = g.order();
    if n < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    let tl = t.to_vec();
    let mut inside = Subset::empty(n);
    // out: edges X1 -> X2, back: edges X2 -> X1
    let (mut out, mut back) = (0i64, 0i64);
    let mut best: Option<(f64, usize, bool, i64)> = None;
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        for &x in &tl {
            let w = g.mul(v, x);
            if w == v {
                continue;
            }
            if inside.contains(w) {
                back -= 1;
            } else {
                out += 1;
            }
        }
        for &x in &tl {
            let u = g.mul(v, g.inv(x));
            if u == v {
                continue;
            }
            if inside.contains(u) {
                out -= 1;
            } else {
                back += 1;
            }
        }
        inside.insert(v);
        let a = (k + 1) as f64;
        let denom = a * (n as f64 - a);
        for (edges, forward) in [(out, true), (back, false)] {
            let d = edges as f64 / denom;
            if best.is_none_or(|(bd, ..)| d < bd) {
                best = Some((d, k + 1, forward, edges));
            }
        }
    }
    let (_, k, forward, edges) = best?;
    let mut x1: Vec<usize> = if forward { order[..k].to_vec() } else { order[k..].to_vec() };
    x1.sort_unstable();
    let x2_len = n - x1.len();
    Some(CutWitness { x1, x2_len, edges: edges as u64 })
}

/// A real vector along which the graph is least expanding.
fn extremal_vector(g: &Group, t: &Subset, spec: &Spectrum) -> Vec<f64> {
    match (&spec.data, g.kind()) {
        (SpectrumData::Fourier(c), _) => {
            let xi = (1..c.len()).max_by(|&a, &b| c[a].cmp(&c[b]).then(b.cmp(&a))).unwrap_or(0);
            (0..g.order()).map(|x| if (x & xi).count_ones() % 2 == 0 { 1.0 } else { -1.0 }).collect()
        }
        (SpectrumData::Eigen { values, .. }, GroupKind::Cyclic { m }) => {
            let k = (1..*m).max_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(b.cmp(&a))).unwrap_or(0);
            (0..*m).map(|x| (2.0 * std::f64::consts::PI * ((k * x) % m) as f64 / *m as f64).cos()).collect()
        }
        _ => {
            let eig = SymmetricEigen::new(symmetrized(g, t));
            let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let col = idx.get(1).copied().unwrap_or(0);
            eig.eigenvectors.column(col).iter().copied().collect()
        }
    }
}

/// Certifies that `Cayley_G(T)` has no `eta`-sparse cut, or finds one.
pub fn certify_no_sparse_cut(g: &Group, t: &Subset, eta: f64) -> Result<CutCertificate> {
    let n = g.order();
    let tau = t.len() as f64 / n as f64;
    if t.is_empty() {
        let witness = (n >= 2).then(|| CutWitness { x1: vec![g.identity()], x2_len: n - 1, edges: 0 });
        let kind = if witness.is_some() && eta > 0.0 { CertificateKind::Refuted } else { CertificateKind::Exhaustive };
        return Ok(CutCertificate { kind, eta, beta: 0.0, tau, certified: 0.0, witness });
    }
    let spec = spectrum(g, t)?;
    let beta = certified_gap(&spec, t.len())?;
    let spectral = beta.min(1.0) * tau;
    if n < 2 {
        return Ok(CutCertificate { kind: CertificateKind::Exhaustive, eta, beta, tau, certified: 1.0, witness: None });
    }
    if spectral >= eta {
        return Ok(CutCertificate { kind: CertificateKind::Spectral, eta, beta, tau, certified: spectral, witness: None });
    }
    if n <= EXHAUSTIVE_CUT_MAX {
        let w = min_cut_exhaustive(g, t)?;
        let d = w.density();
        let kind = if d >= eta { CertificateKind::Exhaustive } else { CertificateKind::Refuted };
        let witness = (kind == CertificateKind::Refuted).then_some(w);
        return Ok(CutCertificate { kind, eta, beta, tau, certified: d, witness });
    }
    let w = sweep_cut(g, t, &extremal_vector(g, t, &spec));
    match w {
        Some(w) if w.density() < eta => {
            Ok(CutCertificate { kind: CertificateKind::Refuted, eta, beta, tau, certified: spectral, witness: Some(w) })
        }
        _ => Ok(CutCertificate { kind: CertificateKind::Inconclusive, eta, beta, tau, certified: spectral, witness: None }),
    }
}
