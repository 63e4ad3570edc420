//! Valid orderings, rainbow paths, and the two baseline solvers.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::rng::rng;
use crate::subset::Subset;

pub type Ordering = Vec<usize>;

pub const DEFAULT_BRUTE_CAP: usize = 10;
pub const DEFAULT_GREEDY_RESTARTS: usize = 64;
/// Greedy hands the last few colours to an exact search.
const GREEDY_EXACT_TAIL: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub valid: bool,
    /// 1-based positions `(i, j)` with `i < j` of the first repeated partial product.
    pub first_collision: Option<(usize, usize)>,
}

/// Checks that the partial products `s_1, s_1 s_2, ...` are pairwise distinct.
pub fn check_valid(g: &Group, ord: &[usize]) -> ValidityReport {
    let mut first_seen = vec![0usize; g.order()];
    let mut p = g.identity();
    for (i, &s) in ord.iter().enumerate() {
        p = g.mul(p, s);
        if first_seen[p] != 0 {
            return ValidityReport { valid: false, first_collision: Some((first_seen[p], i + 1)) };
        }
        first_seen[p] = i + 1;
    }
    ValidityReport { valid: true, first_collision: None }
}

/// True when `ord` lists every element of `s` exactly once.
pub fn is_permutation_of(ord: &[usize], s: &Subset) -> bool {
    let mut seen = Subset::empty(s.universe());
    ord.len() == s.len() && ord.iter().all(|&x| s.contains(x) && seen.insert(x))
}

/// `vertices[i] * colours[i] = vertices[i + 1]`, all vertices and colours distinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RainbowPath {
    pub vertices: Vec<usize>,
    pub colours: Vec<usize>,
}

impl RainbowPath {
    pub fn trivial(v: usize) -> RainbowPath {
        RainbowPath { vertices: vec![v], colours: Vec::new() }
    }

    pub fn from_colours(g: &Group, start: usize, colours: &[usize]) -> RainbowPath {
        let mut p = RainbowPath::trivial(start);
        for &c in colours {
            p.push(g, c);
        }
        p
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().expect("path has a vertex")
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colours.is_empty()
    }

    pub fn push(&mut self, g: &Group, c: usize) {
        let v = g.mul(self.end(), c);
        self.vertices.push(v);
        self.colours.push(c);
    }

    /// Concatenates `other`, which must start where `self` ends.
    pub fn append(&mut self, other: &RainbowPath) -> Result<()> {
        if other.start() != self.end() {
            return Err(Error::Contract(format!(
                "cannot join a path ending at {} to one starting at {}",
                self.end(),
                other.start()
            )));
        }
        self.vertices.extend_from_slice(&other.vertices[1..]);
        self.colours.extend_from_slice(&other.colours);
        Ok(())
    }

    pub fn check(&self, g: &Group) -> Result<()> {
        if self.vertices.len() != self.colours.len() + 1 {
            return Err(Error::Contract("vertex and colour counts disagree".into()));
        }
        let mut vs = Subset::empty(g.order());
        for &v in &self.vertices {
            g.check_element(v)?;
            if !vs.insert(v) {
                return Err(Error::Contract(format!("vertex {v} repeats")));
            }
        }
        let mut cs = Subset::empty(g.order());
        for (i, &c) in self.colours.iter().enumerate() {
            g.check_element(c)?;
            if !cs.insert(c) {
                return Err(Error::Contract(format!("colour {c} repeats")));
            }
            if g.mul(self.vertices[i], c) != self.vertices[i + 1] {
                return Err(Error::Contract(format!("edge {i} does not have colour {c}")));
            }
        }
        Ok(())
    }

    pub fn is_rainbow(&self, g: &Group) -> bool {
        self.check(g).is_ok()
    }

    pub fn colour_set(&self, universe: usize) -> Subset {
        Subset::from_indices(universe, self.colours.iter().copied())
    }

    pub fn vertex_set(&self, universe: usize) -> Subset {
        Subset::from_indices(universe, self.vertices.iter().copied())
    }

    /// Left translate by `h`; edges and colours are preserved.
    pub fn translate(&self, g: &Group, h: usize) -> RainbowPath {
        RainbowPath { vertices: self.vertices.iter().map(|&v| g.mul(h, v)).collect(), colours: self.colours.clone() }
    }

    /// The same path walked backwards. Needs every colour to be an involution.
    pub fn reversed(&self, g: &Group) -> Result<RainbowPath> {
        if let Some(&c) = self.colours.iter().find(|&&c| g.mul(c, c) != g.identity()) {
            return Err(Error::Contract(format!("colour {c} is not an involution")));
        }
        let mut vertices = self.vertices.clone();
        let mut colours = self.colours.clone();
        vertices.reverse();
        colours.reverse();
        Ok(RainbowPath { vertices, colours })
    }
}

/// The path `start -> start*s_2 -> start*s_2*s_3 -> ...` with colours `s_2..s_k`.
/// With `start = s_1` its vertices are exactly the partial products.
pub fn path_of(g: &Group, ord: &[usize], start: usize) -> Result<RainbowPath> {
    let distinct = ord.iter().collect::<std::collections::HashSet<_>>().len() == ord.len();
    if !distinct || !check_valid(g, ord).valid {
        return Err(Error::Contract("ordering is not valid".into()));
    }
    g.check_element(start)?;
    let tail = if ord.is_empty() { &[][..] } else { &ord[1..] };
    let p = RainbowPath::from_colours(g, start, tail);
    p.check(g)?;
    Ok(p)
}

/// Inverse of [`path_of`]: the start vertex followed by the colours.
pub fn ordering_of(g: &Group, path: &RainbowPath) -> Result<Ordering> {
    path.check(g)?;
    let mut ord = Vec::with_capacity(path.len() + 1);
    ord.push(path.start());
    ord.extend_from_slice(&path.colours);
    Ok(ord)
}

/// The path `start -> start*s_1 -> start*s_1*s_2 -> ...` using every element as a colour.
/// Rainbow exactly when `ord` is valid and no partial product is the identity.
pub fn colour_path(g: &Group, ord: &[usize], start: usize) -> Result<RainbowPath> {
    g.check_element(start)?;
    let p = RainbowPath::from_colours(g, start, ord);
    p.check(g)?;
    Ok(p)
}

/// Reads an ordering off a rainbow path. With `lead = None` the ordering is the
/// colour sequence; with `lead = Some(c)` for a colour `c` not on the path, it is
/// `c` followed by the colours (the path translated to start at `c`).
pub fn ordering_from_rainbow(g: &Group, path: &RainbowPath, lead: Option<usize>) -> Result<Ordering> {
    path.check(g)?;
    let ord: Ordering = lead.into_iter().chain(path.colours.iter().copied()).collect();
    if !check_valid(g, &ord).valid {
        return Err(Error::Internal("rainbow path produced an invalid ordering".into()));
    }
    Ok(ord)
}

#[derive(Clone, Debug)]
pub struct BruteOptions {
    pub allow_id: bool,
    pub cap: usize,
    pub parallel: bool,
    /// Abort with a capacity error after this many search nodes.
    pub node_budget: Option<u64>,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions { allow_id: false, cap: DEFAULT_BRUTE_CAP, parallel: false, node_budget: None }
    }
}

struct Dfs<'a> {
    g: &'a Group,
    colours: &'a [usize],
    used: Vec<bool>,
    visited: Subset,
    seq: Vec<usize>,
    target_len: usize,
    /// In an abelian group the last partial product is fixed; it may not appear earlier.
    reserved: Option<usize>,
    nodes: u64,
    budget: Option<u64>,
}

impl Dfs<'_> {
    fn run(&mut self, cur: usize) -> Result<bool> {
        if self.seq.len() == self.target_len {
            return Ok(true);
        }
        self.nodes += 1;
        if let Some(b) = self.budget {
            if self.nodes > b {
                return Err(Error::Capacity { what: "search nodes".into(), limit: b as usize });
            }
        }
        let last_step = self.seq.len() + 1 == self.target_len;
        for i in 0..self.colours.len() {
            if self.used[i] {
                continue;
            }
            let c = self.colours[i];
            let next = self.g.mul(cur, c);
            if self.visited.contains(next) || (!last_step && self.reserved == Some(next)) {
                continue;
            }
            self.used[i] = true;
            self.visited.insert(next);
            self.seq.push(c);
            if self.run(next)? {
                return Ok(true);
            }
            self.seq.pop();
            self.visited.remove(next);
            self.used[i] = false;
        }
        Ok(false)
    }
}

fn abelian_final(g: &Group, s: &Subset) -> Option<usize> {
    g.is_abelian().then(|| g.product(s.iter()))
}

/// Exhaustive search. `Ok(None)` is a proof that no valid ordering exists.
pub fn brute_force(g: &Group, s: &Subset, opts: &BruteOptions) -> Result<Option<Ordering>> {
    if s.len() > opts.cap {
        return Err(Error::Capacity { what: format!("brute force on {} elements", s.len()), limit: opts.cap });
    }
    let id = g.identity();
    let has_id = s.contains(id);
    if has_id && !opts.allow_id {
        return Err(Error::Precondition("subset contains the identity".into()));
    }
    let colours: Vec<usize> = s.iter().filter(|&x| x != id).collect();
    let reserved = abelian_final(g, s);
    let mut prefix = Vec::new();
    let mut visited = Subset::empty(g.order());
    if has_id {
        // the identity can only come first
        prefix.push(id);
        visited.insert(id);
        if reserved == Some(id) && !colours.is_empty() {
            return Ok(None);
        }
    }
    let fresh = |seq: Vec<usize>, visited: Subset, used: Vec<bool>| Dfs {
        g,
        colours: &colours,
        used,
        visited,
        seq,
        target_len: s.len(),
        reserved,
        nodes: 0,
        budget: opts.node_budget,
    };
    let cur = g.identity();
    if !opts.parallel || colours.len() < 2 {
        let mut dfs = fresh(prefix, visited, vec![false; colours.len()]);
        return Ok(dfs.run(cur)?.then_some(dfs.seq));
    }
    let branches: Vec<Result<Option<Ordering>>> = (0..colours.len())
        .into_par_iter()
        .map(|i| {
            let next = g.mul(cur, colours[i]);
            if visited.contains(next) || (prefix.len() + 1 < s.len() && reserved == Some(next)) {
                return Ok(None);
            }
            let mut used = vec![false; colours.len()];
            used[i] = true;
            let mut vis = visited.clone();
            vis.insert(next);
            let mut seq = prefix.clone();
            seq.push(colours[i]);
            let mut dfs = fresh(seq, vis, used);
            Ok(dfs.run(next)?.then_some(dfs.seq))
        })
        .collect();
    for b in branches {
        if let Some(ord) = b? {
            return Ok(Some(ord));
        }
    }
    Ok(None)
}

/// Randomized extension with two-step lookahead; the last few colours are placed
/// by exact search. `None` is not a proof of anything.
pub fn greedy_order(g: &Group, s: &Subset, seed: u64, restarts: usize) -> Option<Ordering> {
    let id = g.identity();
    // the identity can only come first
    let has_id = s.contains(id);
    let all: Vec<usize> = s.iter().filter(|&x| x != id).collect();
    let reserved = abelian_final(g, s);
    if has_id && reserved == Some(id) && !all.is_empty() {
        return None;
    }
    let mut r = rng(seed);
    for _ in 0..restarts.max(1) {
        let mut remaining = all.clone();
        remaining.shuffle(&mut r);
        let mut visited = Subset::empty(g.order());
        let mut seq = Vec::with_capacity(s.len());
        if has_id {
            visited.insert(id);
            seq.push(id);
        }
        let mut cur = id;
        let mut stuck = false;
        while remaining.len() > GREEDY_EXACT_TAIL {
            let mut best: Option<(f64, usize)> = None;
            for (i, &c) in remaining.iter().enumerate() {
                let next = g.mul(cur, c);
                if visited.contains(next) || reserved == Some(next) {
                    continue;
                }
                let onward = remaining
                    .iter()
                    .filter(|&&d| d != c)
                    .filter(|&&d| {
                        let w = g.mul(next, d);
                        !visited.contains(w) && w != next && reserved != Some(w)
                    })
                    .count();
                if onward == 0 {
                    continue;
                }
                // fewest onward moves first, random tie-breaks
                let score = onward as f64 + r.gen::<f64>() * 2.0;
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, i));
                }
            }
            let Some((_, i)) = best else {
                stuck = true;
                break;
            };
            let c = remaining.swap_remove(i);
            cur = g.mul(cur, c);
            visited.insert(cur);
            seq.push(c);
        }
        if stuck {
            continue;
        }
        remaining.sort_unstable();
        let mut dfs = Dfs {
            g,
            colours: &remaining,
            used: vec![false; remaining.len()],
            visited,
            seq,
            target_len: s.len(),
            reserved,
            nodes: 0,
            budget: Some(20_000),
        };
        if let Ok(true) = dfs.run(cur) {
            debug_assert!(check_valid(g, &dfs.seq).valid);
            return Some(dfs.seq);
        }
    }
    None
}
