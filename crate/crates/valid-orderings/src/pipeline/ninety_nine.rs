//! Long rainbow paths using all but a few colours: slabs joined by rainbow
//! matchings, chains linked through a spare slab, then greedy extension and
//! insertion polishing.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::matching::hopcroft_karp;
use crate::orderings::RainbowPath;
use crate::rng::{retry, rng, Rng};
use crate::subset::Subset;

use super::walk::Canvas;

/// Longest link tried between chains.
const LINK_LEN: usize = 4;
/// Edges given back when the final link to `v` fails.
const MAX_POPS: usize = 16;
/// At least this many colours are kept back for linking.
const MIN_LINKERS: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct LongPath {
    pub path: RainbowPath,
    /// Colours of `S ∖ excluded` not on the path.
    pub missing: usize,
    pub budget: usize,
    pub slabs: usize,
    pub chains: usize,
    /// Chains that could not be linked and were released.
    pub dropped: usize,
    pub polished: usize,
    pub retries: usize,
}

/// A rainbow path from `u` to `v` whose inner vertices lie in `pool` and whose
/// colours lie in `S ∖ excluded`, missing at most `floor(mu |pool|)` of those
/// colours. `reserved` colours are only used for linking, never in slab matchings.
#[allow(clippy::too_many_arguments)]
pub fn ninety_nine_path(
    g: &Group,
    s: &Subset,
    pool: &Subset,
    reserved: &Subset,
    excluded: &Subset,
    u: usize,
    v: usize,
    mu: f64,
    retries: usize,
    seed: u64,
) -> Result<LongPath> {
    g.check_element(u)?;
    g.check_element(v)?;
    if s.contains(g.identity()) {
        return Err(Error::Precondition("colour set contains the identity".into()));
    }
    if u == v {
        return Err(Error::Precondition("endpoints must differ".into()));
    }
    if !excluded.is_subset(reserved) {
        return Err(Error::Precondition("excluded colours must be reserved".into()));
    }
    let avail = s.difference(excluded);
    let mut interior = pool.clone();
    interior.remove(u);
    interior.remove(v);
    let budget = (mu * pool.len() as f64).floor() as usize;
    if avail.len() > interior.len() + 1 + budget {
        return Err(Error::Construction(format!(
            "{} colours cannot fit on {} pool vertices within a budget of {budget}",
            avail.len(),
            interior.len()
        )));
    }
    let (mut lp, used) = retry(seed, retries, "99% path", |sd| attempt(g, &avail, &interior, reserved, u, v, budget, sd))?;
    lp.retries = used;
    lp.path.check(g)?;
    let inner_ok = lp.path.vertices[1..lp.path.vertices.len() - 1].iter().all(|&x| interior.contains(x));
    if !inner_ok || !lp.path.colour_set(g.order()).is_subset(&avail) || lp.path.end() != v || lp.path.start() != u {
        return Err(Error::Internal("99% path left its vertex pool or colour set".into()));
    }
    Ok(lp)
}

struct Chain {
    vertices: Vec<usize>,
    colours: Vec<usize>,
}

/// Rainbow matching from slab `a` into slab `b` on unused `main` colours:
/// maximum matching, then colour clashes dropped and refilled greedily.
fn slab_matching(cv: &mut Canvas, main: &Subset, a: &[usize], b: &[usize]) -> Vec<(usize, usize, usize)> {
    let g = cv.g;
    let ok = |x: usize, y: usize, cv: &Canvas| {
        let c = g.ldiv(x, y);
        main.contains(c) && cv.unused.contains(c)
    };
    let adj: Vec<Vec<usize>> = a.iter().map(|&x| (0..b.len()).filter(|&j| ok(x, b[j], cv)).collect()).collect();
    let m = hopcroft_karp(&adj, b.len());
    let mut edges = Vec::new();
    let mut right_used = vec![false; b.len()];
    let mut left_done = vec![false; a.len()];
    for (i, pj) in m.left.iter().enumerate() {
        if let Some(j) = *pj {
            let c = g.ldiv(a[i], b[j]);
            if cv.unused.remove(c) {
                edges.push((a[i], b[j], c));
                right_used[j] = true;
                left_done[i] = true;
            }
        }
    }
    for i in 0..a.len() {
        if left_done[i] {
            continue;
        }
        if let Some(j) = adj[i].iter().copied().find(|&j| !right_used[j] && ok(a[i], b[j], cv)) {
            let c = g.ldiv(a[i], b[j]);
            cv.unused.remove(c);
            right_used[j] = true;
            edges.push((a[i], b[j], c));
        }
    }
    edges
}

fn build_chains(cv: &mut Canvas, main: &Subset, slabs: &[Vec<usize>], main_left: &mut usize, m: usize) -> Vec<Chain> {
    let mut next: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut has_pred = Subset::empty(cv.g.order());
    for w in slabs.windows(2) {
        if *main_left < m.div_ceil(2) {
            break;
        }
        for (x, y, c) in slab_matching(cv, main, &w[0], &w[1]) {
            next.insert(x, (y, c));
            has_pred.insert(y);
            *main_left -= 1;
        }
    }
    let mut chains = Vec::new();
    for slab in slabs {
        for &x in slab {
            if has_pred.contains(x) || !next.contains_key(&x) {
                continue;
            }
            let mut ch = Chain { vertices: vec![x], colours: Vec::new() };
            let mut cur = x;
            while let Some(&(y, c)) = next.get(&cur) {
                ch.vertices.push(y);
                ch.colours.push(c);
                cur = y;
            }
            for &w in &ch.vertices {
                cv.free.remove(w);
            }
            chains.push(ch);
        }
    }
    chains
}

#[allow(clippy::too_many_arguments)]
fn attempt(
    g: &Group,
    avail: &Subset,
    interior: &Subset,
    reserved: &Subset,
    u: usize,
    v: usize,
    budget: usize,
    seed: u64,
) -> Option<LongPath> {
    let mut r: Rng = rng(seed);
    let mut spare: Vec<usize> = avail.difference(reserved).to_vec();
    spare.shuffle(&mut r);
    let n_link = (avail.len() / 8).max(MIN_LINKERS).min(spare.len() / 2);
    let main = Subset::from_indices(g.order(), spare[n_link..].iter().copied());
    let mut cv = Canvas::new(g, interior.clone(), avail);

    let mut verts = interior.to_vec();
    verts.shuffle(&mut r);
    let region = &verts[verts.len() / 4..];
    let m = ((main.len() as f64).sqrt().ceil() as usize).max(2);
    let t = (main.len().div_ceil(m) + 1).min(region.len() / m);
    let slabs: Vec<Vec<usize>> = region.chunks(m).take(t).map(<[usize]>::to_vec).collect();
    let mut main_left = main.len();
    let mut chains = build_chains(&mut cv, &main, &slabs, &mut main_left, m);
    chains.shuffle(&mut r);
    let n_chains = chains.len();

    let mut path = RainbowPath::trivial(u);
    let mut dropped = 0;
    for ch in chains {
        match cv.find_link(path.end(), ch.vertices[0], LINK_LEN, &mut r) {
            Some(link) => {
                cv.walk(&mut path, &link);
                for (&c, &w) in ch.colours.iter().zip(&ch.vertices[1..]) {
                    path.push(g, c);
                    debug_assert!(!cv.free.contains(w));
                }
            }
            None => {
                for &w in &ch.vertices {
                    cv.free.insert(w);
                }
                for &c in &ch.colours {
                    cv.unused.insert(c);
                }
                dropped += 1;
            }
        }
    }
    cv.extend(&mut path, &mut r);
    let mut closed = false;
    for _ in 0..=MAX_POPS {
        if let Some(link) = cv.find_link(path.end(), v, LINK_LEN, &mut r) {
            cv.walk(&mut path, &link);
            closed = true;
            break;
        }
        if cv.pop(&mut path).is_none() {
            break;
        }
    }
    if !closed {
        return None;
    }
    let mut polished = 0;
    loop {
        let k = cv.polish(&mut path);
        if k == 0 {
            break;
        }
        polished += k;
    }
    let missing = cv.unused.len();
    (missing <= budget).then_some(LongPath {
        path,
        missing,
        budget,
        slabs: slabs.len(),
        chains: n_chains,
        dropped,
        polished,
        retries: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::named;

    #[test]
    fn full_cube_minus_zero() {
        let g = Group::boolean_cube(5).unwrap();
        let s = g.nonidentity();
        let none = g.empty_subset();
        let lp = ninety_nine_path(&g, &s, &Subset::full(32), &none, &none, 0, 31, 0.25, 8, 1).unwrap();
        assert!(lp.missing <= 8);
        assert_eq!(lp.path.len() + lp.missing, 31);
        assert_eq!((lp.path.start(), lp.path.end()), (0, 31));
    }

    #[test]
    fn confined_to_a_subgroup() {
        let g = named::symmetric(4).unwrap();
        let h = g.subgroups_up_to_index(2).unwrap().into_iter().find(|h| h.order() == 12).unwrap();
        let s = h.members().difference(&Subset::from_indices(g.order(), [g.identity()]));
        let elems = h.elements();
        let (u, v) = (elems[0], elems[elems.len() - 1]);
        let none = g.empty_subset();
        let lp = ninety_nine_path(&g, &s, h.members(), &none, &none, u, v, 0.25, 8, 2).unwrap();
        assert!(lp.path.vertices.iter().all(|&x| h.contains(x)));
    }

    #[test]
    fn excluded_colours_stay_off() {
        let g = Group::boolean_cube(6).unwrap();
        let s = g.nonidentity();
        let reserved = Subset::from_indices(64, 1..12);
        let lp = ninety_nine_path(&g, &s, &Subset::full(64), &reserved, &reserved, 0, 5, 0.125, 8, 3).unwrap();
        assert!(lp.path.colour_set(64).is_disjoint(&reserved));
    }

    #[test]
    fn impossible_budgets_are_rejected() {
        let g = Group::boolean_cube(5).unwrap();
        let none = g.empty_subset();
        let pool = Subset::from_indices(32, 0..8);
        let err = ninety_nine_path(&g, &g.nonidentity(), &pool, &none, &none, 0, 1, 0.1, 2, 1).unwrap_err();
        assert!(matches!(err, Error::Construction(_)));
    }
}
