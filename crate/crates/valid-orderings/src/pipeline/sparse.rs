//! Sparse F_2^n: quotient down until `S + S` is everything, then either the
//! structured route (cosets of small subspaces chained by connector edges) or
//! the expanding route (an absorbing fork extended greedily).

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::absorption_f2n::{absorb_tails, build_absorbing_path, build_fork, find_flexible_family, junk_path_counted, FlexibleFamily};
use crate::error::{Error, Result};
use crate::group::{Group, Quotient, Subgroup};
use crate::orderings::{check_valid, Ordering, RainbowPath};
use crate::regularity::regularize_f2n;
use crate::rng::{derive, retry, rng, DEFAULT_RETRIES};
use crate::subset::Subset;
use crate::sumsets::{decompose, sumset, Decomposition};

use super::dense::{repair_loop, solve_dense_f2n};
use super::walk::Canvas;
use super::{
    finish, join, left_coset, no_identity, patch, sample_fraction, stage, ninety_nine_path, Outcome, QuotientStep, Route, RouteRun,
    SolverParams, Stage,
};

const MAX_GADGETS: usize = 16;
/// Gadget elements may make up at most `1/FORK_SHARE` of `S`.
const FORK_SHARE: usize = 8;
/// Vertices of a coset tried as the exit `x_i` of each link.
const LINK_VERTEX_TRIES: usize = 64;

/// Cosets `W_i = w_i H_i` and connector edges `x_i -> y_i` with `x_i ∈ W_i`,
/// `y_i ∈ W_{i+1}` and pairwise distinct colours `x_i^{-1} y_i ∈ X`.
#[derive(Clone, Debug, Serialize)]
pub struct CosetLinks {
    pub translates: Vec<usize>,
    #[serde(skip)]
    pub cosets: Vec<Subset>,
    pub connectors: Vec<(usize, usize)>,
    pub colours: Vec<usize>,
    /// Largest overlap of a new coset with the earlier ones.
    pub max_overlap: usize,
    pub cap: usize,
    pub retries: usize,
}

/// Greedy coset chaining: each new coset starts at `y = x c` for a free colour
/// `c ∈ X` and a vertex `x` of the previous coset, with `y` outside all
/// earlier cosets and the new coset meeting them in at most
/// `ceil(nu^(1/4) size)` points.
pub fn link_cosets(g: &Group, subspaces: &[Subgroup], x: &Subset, size: usize, nu: f64, seed: u64) -> Result<CosetLinks> {
    if subspaces.is_empty() {
        return Err(Error::Precondition("no subspaces to link".into()));
    }
    if x.len() + 1 < subspaces.len() || x.contains(g.identity()) {
        return Err(Error::Precondition(format!(
            "{} subspaces need {} nonidentity connector colours, X has {}",
            subspaces.len(),
            subspaces.len() - 1,
            x.len()
        )));
    }
    let cap = (nu.powf(0.25) * size as f64).ceil() as usize;
    let (mut links, retries) = retry(seed, DEFAULT_RETRIES, "coset linking", |sd| link_attempt(g, subspaces, x, cap, sd))?;
    links.retries = retries;
    Ok(links)
}

fn link_attempt(g: &Group, subspaces: &[Subgroup], x: &Subset, cap: usize, seed: u64) -> Option<CosetLinks> {
    let n = g.order();
    let mut r = rng(seed);
    let first = subspaces[0].members().clone();
    let mut union = first.clone();
    let mut links = CosetLinks {
        translates: vec![g.identity()],
        cosets: vec![first],
        connectors: Vec::new(),
        colours: Vec::new(),
        max_overlap: 0,
        cap,
        retries: 0,
    };
    let mut endpoints = Subset::empty(n);
    let mut colours = x.to_vec();
    for h in &subspaces[1..] {
        let prev = links.cosets.last().expect("one coset per step");
        let mut xs: Vec<usize> = prev.iter().filter(|&v| !endpoints.contains(v)).collect();
        xs.shuffle(&mut r);
        xs.truncate(LINK_VERTEX_TRIES);
        colours.shuffle(&mut r);
        let found = xs.iter().find_map(|&xv| {
            colours.iter().enumerate().find_map(|(ci, &c)| {
                let y = g.mul(xv, c);
                if union.contains(y) || endpoints.contains(y) {
                    return None;
                }
                let w = left_coset(g, y, h.members());
                let overlap = w.intersection_len(&union);
                (overlap <= cap).then_some((xv, ci, y, w, overlap))
            })
        });
        let (xv, ci, y, w, overlap) = found?;
        let c = colours.swap_remove(ci);
        endpoints.insert(xv);
        endpoints.insert(y);
        union.union_with(&w);
        links.max_overlap = links.max_overlap.max(overlap);
        links.translates.push(y);
        links.cosets.push(w);
        links.connectors.push((xv, y));
        links.colours.push(c);
    }
    Some(links)
}

/// The sparse route. `mode` forces the structured or expanding route on the
/// reduced instance; otherwise density and the decomposition decide.
pub fn solve_sparse_f2n(g: &Group, s: &Subset, params: &SolverParams, mode: Option<Route>, seed: u64) -> Result<RouteRun> {
    if g.cube_dim().is_none() {
        return Err(Error::Unsupported("the sparse route needs F_2^n".into()));
    }
    no_identity(g, s)?;
    let mut r = rng(derive(seed, 0x9));
    let mut groups = vec![g.clone()];
    let mut sets = vec![s.clone()];
    let mut quotients: Vec<Quotient> = Vec::new();
    let mut steps = Vec::new();
    loop {
        let (cg, cs) = (groups.last().expect("nonempty"), sets.last().expect("nonempty"));
        let ss = sumset(cg, cs, cs);
        if ss.len() == cg.order() || cs.is_empty() {
            break;
        }
        let outside: Vec<usize> = (0..cg.order()).filter(|&v| !ss.contains(v)).collect();
        let v = *outside.choose(&mut r).expect("sumset is not everything");
        let q = cg.quotient_project(cs, v)?;
        steps.push(QuotientStep { v, dim_after: q.group.cube_dim().expect("cube") });
        groups.push(q.group.clone());
        sets.push(q.image.clone());
        quotients.push(q);
    }
    let (cg, cs) = (groups.last().expect("nonempty"), sets.last().expect("nonempty"));
    let mut run = match solve_reduced(cg, cs, params, mode, seed) {
        // a reduced instance can be too small for the randomized routes
        Err(Error::Construction(why)) if !steps.is_empty() && mode.is_none() => {
            let gseed = derive(seed, 0x9ee0);
            let ord = crate::orderings::greedy_order(cg, cs, gseed, params.greedy_restarts)
                .ok_or_else(|| Error::Construction(format!("reduced instance: {why}; greedy gave up too")))?;
            let st = stage("reduced-greedy", gseed, 0, format!("after: {why}"));
            RouteRun::new(Route::GreedyFallback, ord, vec![st], 0)
        }
        other => other?,
    };
    let mut ord = run.ordering;
    for (i, q) in quotients.iter().enumerate().rev() {
        ord = q.lift_ordering(&ord)?;
        if !check_valid(&groups[i], &ord).valid {
            return Err(Error::Internal(format!("lifted ordering failed at quotient step {}", i + 1)));
        }
    }
    run.ordering = ord;
    if !steps.is_empty() {
        run.stages.insert(0, stage("quotient", derive(seed, 0x9), 0, format!("{} steps down to dimension {}", steps.len(), steps.last().map_or(0, |q| q.dim_after))));
        run.inner_route = Some(run.route);
        run.route = Route::Quotient;
        run.quotient_steps = steps;
    }
    Ok(run)
}

fn solve_reduced(g: &Group, s: &Subset, params: &SolverParams, mode: Option<Route>, seed: u64) -> Result<RouteRun> {
    if s.len() <= params.brute_cap && mode.is_none() {
        return match super::brute(g, s, params)? {
            Some(ord) => Ok(RouteRun::new(Route::Brute, ord, Vec::new(), 0)),
            None => crate::error::construction("the reduced instance has no ordering, so the lift cannot decide"),
        };
    }
    let n = g.order() as f64;
    if mode.is_none() && s.len() as f64 >= params.dense_fraction * n {
        let mut run = solve_dense_f2n(g, s, params, seed)?;
        if s.len() as f64 >= n - n.powf(1.0 - params.gamma) {
            run.route = Route::UltraDenseFallback;
        }
        return Ok(run);
    }
    let dseed = derive(seed, 0xd);
    let d = decompose(g, s, params.gamma, params.k, params.alpha, dseed)?;
    let dstage = stage(
        "decompose",
        dseed,
        0,
        format!("{} pieces, expander {}, junk {}", d.pieces.len(), d.expander.len(), d.junk.len()),
    );
    let expanding = match mode {
        Some(Route::SparseExpanding) => true,
        Some(Route::SparseStructured) => false,
        _ => d.expander.len() as f64 >= params.alpha * s.len() as f64 || d.pieces.is_empty(),
    };
    let mut stages = vec![dstage];
    if expanding {
        let e = if d.expander.is_empty() { s.clone() } else { d.expander.clone() };
        repair_loop(g, s, params, seed, &mut stages, Route::SparseExpanding, |forced, sd, st| {
            expanding_attempt(g, s, &e, forced, params, sd, st)
        })
    } else {
        repair_loop(g, s, params, seed, &mut stages, Route::SparseStructured, |forced, sd, st| {
            structured_attempt(g, s, &d, forced, params, sd, st)
        })
    }
}

/// Largest prefix of `fam` whose elements stay within `limit`.
fn trim_family(fam: &FlexibleFamily, limit: usize, universe: usize) -> FlexibleFamily {
    let mut k = fam.len();
    while k > 0 && fam.subfamily(&(0..k).collect::<Vec<_>>()).elements(universe).len() > limit {
        k -= 1;
    }
    fam.subfamily(&(0..k).collect::<Vec<_>>())
}

fn expanding_attempt(
    g: &Group,
    s: &Subset,
    e: &Subset,
    forced: &Subset,
    _params: &SolverParams,
    seed: u64,
    stages: &mut Vec<Stage>,
) -> Result<Outcome<Ordering>> {
    let n = g.order();
    let mut r = rng(seed);
    let fseed = derive(seed, 1);
    let target = (s.len() / (FORK_SHARE * 6)).clamp(1, MAX_GADGETS);
    let fam = find_flexible_family(g, &e.difference(forced), target, fseed)?;
    let fam = trim_family(&fam, s.len() / FORK_SHARE, n);
    stages.push(stage("family", fseed, 0, format!("{} of {target} gadgets", fam.len())));
    let kseed = derive(seed, 2);
    let (ap, spider) = build_fork(g, &fam, s, kseed)?;
    stages.push(stage("fork", kseed, ap.retries, format!("{} edges, spider of {} legs", ap.path.len(), spider.legs.len())));

    let mut free = Subset::full(n);
    free.difference_with(&ap.path.vertex_set(n));
    free.difference_with(&spider.vertex_set(n));
    let mut cv = Canvas::new(g, free, &s.difference(&ap.path.colour_set(n)));
    let mut tail = RainbowPath::trivial(ap.path.end());
    for c in forced.iter() {
        if cv.unused.contains(c) && cv.free.contains(g.mul(tail.end(), c)) {
            cv.walk(&mut tail, &[c]);
        }
    }
    let mut head = ap.path.clone();
    let mut collapsed = Vec::new();
    loop {
        cv.extend(&mut tail, &mut r);
        while cv.polish(&mut tail) > 0 {}
        if cv.unused.len() <= 1 || collapsed.len() == fam.len() {
            break;
        }
        // stuck: activate the next gadget, freeing its colours and vertices
        let i = collapsed.len();
        collapsed.push(i);
        let nh = ap.collapse(g, &collapsed)?;
        let kept = nh.vertex_set(n);
        for &v in &head.vertices {
            if !kept.contains(v) {
                cv.free.insert(v);
            }
        }
        for &x in fam.gadgets()[i].elems() {
            cv.unused.insert(x);
        }
        head = nh;
    }
    let mut whole = join(g, &[&head, &tail])?;
    let mut backward = false;
    if cv.unused.len() > 1 {
        // release the in-spider and grow from the start
        backward = true;
        for v in spider.vertex_set(n).iter() {
            if v != whole.start() {
                cv.free.insert(v);
            }
        }
        whole = whole.reversed(g)?;
        cv.extend(&mut whole, &mut r);
        while cv.polish(&mut whole) > 0 {}
    }
    stages.push(stage(
        "extend",
        seed,
        0,
        format!("{} edges, {} gadgets activated, backward phase {backward}, {} unplaced", whole.len(), collapsed.len(), cv.unused.len()),
    ));
    if cv.unused.len() > 1 {
        return Ok(Outcome::Leftover(cv.unused.to_subset()));
    }
    let leftover = cv.unused.items().first().copied();
    Ok(Outcome::Done(finish(g, s, &whole, leftover)?))
}

/// Regularizes a piece inside its container; returns the subspace and the
/// part of the piece inside it.
fn regular_piece(g: &Group, elems: &Subset, container: &Subgroup, eps: f64) -> Result<(Subgroup, Subset)> {
    let (local, map) = g.restrict(container);
    let t = Subset::from_indices(local.order(), (0..map.len()).filter(|&i| elems.contains(map[i])));
    let reg = regularize_f2n(&local, &t, eps)?;
    let sub = g.span(&Subset::from_indices(g.order(), reg.h.elements().into_iter().map(|i| map[i])));
    let inside = elems.intersection(sub.members());
    Ok((sub, inside))
}

fn structured_attempt(
    g: &Group,
    s: &Subset,
    d: &Decomposition,
    forced: &Subset,
    params: &SolverParams,
    seed: u64,
    stages: &mut Vec<Stage>,
) -> Result<Outcome<Ordering>> {
    let n = g.order();
    let none = Subset::empty(n);
    let mut r = rng(seed);
    if d.pieces.is_empty() {
        return crate::error::construction("no structured pieces");
    }
    let mut junk = d.junk.union(&d.expander);
    let mut parts: Vec<(Subgroup, Subset)> = Vec::new();
    for p in &d.pieces {
        let (sub, inside) = regular_piece(g, &p.elems, &p.container, params.eps.min(0.49))?;
        junk.union_with(&p.elems.difference(&inside));
        let inside = inside.difference(forced);
        junk.union_with(&p.elems.intersection(forced));
        parts.push((sub, inside));
    }
    parts.sort_by_key(|p| std::cmp::Reverse(p.1.len()));
    // connectors need fresh colours: fold the smallest pieces into X until
    // there are twice as many as links
    while parts.len() > 1 && junk.len() < 2 * (parts.len() - 1) {
        let (_, p) = parts.pop().expect("more than one piece");
        junk.union_with(&p);
    }
    let size = parts.iter().map(|p| p.0.order()).max().unwrap_or(1);
    let subs: Vec<Subgroup> = parts.iter().map(|p| p.0.clone()).collect();
    let lseed = derive(seed, 1);
    let links = link_cosets(g, &subs, &junk, size, params.nu, lseed)?;
    stages.push(stage(
        "link-cosets",
        lseed,
        links.retries,
        format!("{} cosets, max overlap {} (cap {})", links.cosets.len(), links.max_overlap, links.cap),
    ));
    let mut endpoints = Subset::empty(n);
    for &(x, y) in &links.connectors {
        endpoints.insert(x);
        endpoints.insert(y);
    }

    let (w1, e1) = (&links.cosets[0], &parts[0].1);
    let reservoir = sample_fraction(e1, params.q_prime, &mut r);
    let target = (e1.len() / 8).clamp(1, MAX_GADGETS);
    let fseed = derive(seed, 2);
    let fam = find_flexible_family(g, e1, target, fseed)?;
    let room = w1.difference(&endpoints);
    let a = *room.to_vec().choose(&mut r).ok_or_else(|| Error::Construction("first coset is full".into()))?;
    let aseed = derive(seed, 3);
    let ap = build_absorbing_path(g, &fam, e1, &room, &none, a, aseed)?;
    stages.push(stage("absorber", aseed, ap.retries, format!("{} gadgets, {} edges", fam.len(), ap.path.len())));

    let mut free = Subset::full(n);
    free.difference_with(&ap.path.vertex_set(n));
    free.difference_with(&endpoints);
    let mut placed = ap.path.colour_set(n);
    let mut segments: Vec<RainbowPath> = Vec::new();
    let mut cur = ap.path.end();
    let k = parts.len();
    for i in 0..k {
        let w = &links.cosets[i];
        let exit = if i + 1 < k {
            links.connectors[i].0
        } else {
            let mut opts: Vec<usize> = free.intersection(w).iter().collect();
            opts.shuffle(&mut r);
            match opts.first() {
                Some(&v) => v,
                None => return crate::error::construction("last coset is full"),
            }
        };
        let colours = parts[i].1.difference(&placed);
        let mut pool = free.intersection(w);
        pool.insert(cur);
        pool.insert(exit);
        let reserved = if i == 0 { reservoir.intersection(&colours) } else { none.clone() };
        let mseed = derive(seed, 0x10 + i as u64);
        // colours that do not fit are picked up by the junk stage
        let lp = ninety_nine_path(g, &colours, &pool, &reserved, &none, cur, exit, 1.0, params.path_retries, mseed)?;
        stages.push(stage("coset-path", mseed, lp.retries, format!("coset {i}: {} edges, {} unplaced", lp.path.len(), lp.missing)));
        free.difference_with(&lp.path.vertex_set(n));
        placed.union_with(&lp.path.colour_set(n));
        segments.push(lp.path);
        if i + 1 < k {
            let (x, y) = links.connectors[i];
            segments.push(RainbowPath::from_colours(g, x, &[links.colours[i]]));
            placed.insert(links.colours[i]);
            cur = y;
        } else {
            cur = exit;
        }
    }

    let rest = s.difference(&placed);
    let mut choice: Vec<usize> = rest.difference(forced).iter().collect();
    choice.shuffle(&mut r);
    choice.truncate(fam.len().max(1));
    let keep = Subset::from_indices(n, choice);
    let jseed = derive(seed, 4);
    let (pa, jr) = match junk_path_counted(g, &rest.difference(&keep), &rest, &free, cur, jseed) {
        Ok(x) => x,
        // too few helper colours for pairing: place what is left directly
        Err(Error::Construction(_)) => {
            let mut all: Vec<&RainbowPath> = vec![&ap.path];
            all.extend(segments.iter());
            let whole = join(g, &all)?;
            return Ok(match patch(g, &whole, &free, &rest, &mut r) {
                Some((path, left)) => {
                    stages.push(stage("patch", jseed, 0, format!("{} colours placed directly", rest.len())));
                    Outcome::Done(finish(g, s, &path, left)?)
                }
                None => Outcome::Leftover(rest),
            });
        }
        Err(e) => return Err(e),
    };
    stages.push(stage("junk", jseed, jr, format!("{} edges", pa.len())));
    free.difference_with(&pa.vertex_set(n));
    let l = rest.difference(&pa.colour_set(n));
    if l.len() > fam.len() + 1 {
        return Ok(Outcome::Leftover(l));
    }
    let tseed = derive(seed, 5);
    let tails = match absorb_tails(g, &l, &fam, &free, &none, pa.end(), tseed) {
        Ok(t) => t,
        Err(Error::Construction(_)) => {
            let mut all: Vec<&RainbowPath> = vec![&ap.path];
            all.extend(segments.iter());
            all.push(&pa);
            let whole = join(g, &all)?;
            return Ok(match patch(g, &whole, &free, &l, &mut r) {
                Some((path, left)) => {
                    stages.push(stage("patch", tseed, 0, format!("{} colours placed directly", l.len())));
                    Outcome::Done(finish(g, s, &path, left)?)
                }
                None => Outcome::Leftover(l),
            });
        }
        Err(e) => return Err(e),
    };
    stages.push(stage("tails", tseed, tails.retries, format!("{} colours, {} gadgets activated", l.len(), tails.used.len())));
    let pr = ap.collapse(g, &tails.used)?;
    let mut all: Vec<&RainbowPath> = vec![&pr];
    all.extend(segments.iter());
    all.push(&pa);
    all.push(&tails.path);
    let path = join(g, &all)?;
    Ok(Outcome::Done(finish(g, s, &path, tails.leftover)?))
}
