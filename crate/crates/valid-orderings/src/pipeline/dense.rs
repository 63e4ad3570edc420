//! Dense routes. Vertices are handed out stage by stage: the absorber, then
//! the junk path, then the 99% path inside one coset of the regular subgroup,
//! with a reserve of that coset kept free for the tails.

use rand::seq::SliceRandom;

use crate::absorption_f2n::{absorb_tails, build_absorbing_path, find_flexible_family, junk_path_counted};
use crate::absorption_nonabelian::{absorb_pair_tails, build_waveform, collapse_waveform, make_absorbing_family, popular_pairs_with};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::orderings::{Ordering, RainbowPath};
use crate::regularity::{regularize_f2n, regularize_general, trim_dense};
use crate::rng::{derive, rng};
use crate::subset::Subset;

use super::ninety_nine::{ninety_nine_path, LongPath};
use super::{finish, join, left_coset, no_identity, patch, sample_fraction, stage, Outcome, Route, RouteRun, SolverParams, Stage};

/// Largest flexible family requested.
const MAX_GADGETS: usize = 16;
/// One gadget is requested per this many reservoir colours.
const GADGET_SHARE: usize = 6;
/// Tail legs need room: at least this many reserve vertices per absorbable colour.
const RESERVE_PER_TAIL: usize = 8;

/// The dense route over F_2^n. Fails with a construction error when the
/// vertex budget cannot hold the colours (ultra-dense or tiny instances).
pub fn solve_dense_f2n(g: &Group, s: &Subset, params: &SolverParams, seed: u64) -> Result<RouteRun> {
    if g.cube_dim().is_none() {
        return Err(Error::Unsupported("the dense F_2^n route needs F_2^n".into()));
    }
    no_identity(g, s)?;
    let reg = regularize_f2n(g, s, params.eps.min(0.49))?;
    let h = reg.h.members();
    let junk = s.difference(h);
    let (s0, s1) = trim_dense(&reg.h, &reg.s_in, params.eps, derive(seed, 1));
    let mut stages = vec![stage(
        "regularize",
        seed,
        0,
        format!("|H| = {}, |S ∩ H| = {}, junk {}, trimmed {}", h.len(), reg.s_in.len(), junk.len(), s1.len()),
    )];
    let early = junk.union(&s1);
    repair_loop(g, s, params, seed, &mut stages, Route::DenseF2n, |forced, sd, stages| {
        f2n_attempt(g, s, h, &s0.difference(forced), &early.union(forced), params, sd, stages)
    })
}

/// The dense route for table and cyclic groups, with g-pairs and waveforms in
/// place of gadgets.
pub fn solve_dense_general(g: &Group, s: &Subset, params: &SolverParams, seed: u64) -> Result<RouteRun> {
    no_identity(g, s)?;
    let reg = regularize_general(g, s, params.eps)?;
    let h = reg.h.members();
    let junk = s.difference(h);
    let mut stages = vec![stage(
        "regularize",
        seed,
        0,
        format!("|H| = {}, |S ∩ H| = {}, junk {}, gap certificate {:.4}", h.len(), reg.s_in.len(), junk.len(), reg.certificate.certified),
    )];
    let s0 = reg.s_in.clone();
    repair_loop(g, s, params, seed, &mut stages, Route::DenseGeneral, |forced, sd, stages| {
        general_attempt(g, s, h, &s0.difference(forced), &junk.union(forced), params, sd, stages)
    })
}

/// Runs `attempt`, forcing the colours it could not place into the junk
/// stage, up to `repair_retries` times.
pub(super) fn repair_loop(
    g: &Group,
    s: &Subset,
    params: &SolverParams,
    seed: u64,
    stages: &mut Vec<Stage>,
    route: Route,
    mut attempt: impl FnMut(&Subset, u64, &mut Vec<Stage>) -> Result<Outcome<Ordering>>,
) -> Result<RouteRun> {
    let mut forced = Subset::empty(g.order());
    for rep in 0..=params.repair_retries {
        let sd = derive(seed, 0x100 + rep as u64);
        match attempt(&forced, sd, stages)? {
            Outcome::Done(ord) => {
                debug_assert!(super::verified(g, s, &ord));
                return Ok(RouteRun::new(route, ord, std::mem::take(stages), rep));
            }
            Outcome::Leftover(l) => {
                stages.push(stage("repair", sd, rep, format!("{} unplaced colours forced into the junk stage", l.len())));
                forced.union_with(&l);
            }
        }
    }
    crate::error::construction(format!("{route}: colours stayed unplaced after {} repairs", params.repair_retries))
}

/// Splits the free part of the coset `start H` into a tails reserve and the
/// 99% pool (which also contains `start`); returns `(reserve, pool, exit)`.
fn carve(
    g: &Group,
    free: &Subset,
    h: &Subset,
    start: usize,
    p: f64,
    tails: usize,
    r: &mut crate::rng::Rng,
) -> Result<(Subset, Subset, usize)> {
    let region = free.intersection(&left_coset(g, start, h));
    let mut rv = region.to_vec();
    rv.shuffle(r);
    let want = ((p * rv.len() as f64).ceil() as usize).max(RESERVE_PER_TAIL * tails);
    let t = want.min(rv.len() / 2);
    if rv.len() < t + 1 {
        return crate::error::construction("no room left in the coset for the 99% path");
    }
    let reserve = Subset::from_indices(g.order(), rv[..t].iter().copied());
    let mut pool = Subset::from_indices(g.order(), rv[t..].iter().copied());
    pool.insert(start);
    Ok((reserve, pool, rv[t]))
}

/// `mu`, lowered so the 99% path never misses more than the tails can absorb.
pub(super) fn tails_budget(mu: f64, absorbable: usize, pool: usize) -> f64 {
    mu.min((absorbable as f64 + 0.5) / pool.max(1) as f64)
}

fn long_stage(lp: &LongPath, seed: u64) -> Stage {
    stage(
        "ninety-nine",
        seed,
        lp.retries,
        format!(
            "{} edges, missing {} of budget {}, {} slabs, {} chains ({} dropped), {} insertions",
            lp.path.len(),
            lp.missing,
            lp.budget,
            lp.slabs,
            lp.chains,
            lp.dropped,
            lp.polished
        ),
    )
}

#[allow(clippy::too_many_arguments)]
fn f2n_attempt(
    g: &Group,
    s: &Subset,
    h: &Subset,
    s0: &Subset,
    early: &Subset,
    params: &SolverParams,
    seed: u64,
    stages: &mut Vec<Stage>,
) -> Result<Outcome<Ordering>> {
    let n = g.order();
    let none = Subset::empty(n);
    let mut r = rng(seed);
    let u = *h.to_vec().choose(&mut r).expect("subgroup is nonempty");

    let reservoir = sample_fraction(s0, params.q_prime, &mut r);
    let target = (reservoir.len() / GADGET_SHARE).clamp(1, MAX_GADGETS);
    let fseed = derive(seed, 1);
    let fam = find_flexible_family(g, &reservoir, target, fseed)?;
    stages.push(stage("family", fseed, 0, format!("{} of {target} gadgets from a reservoir of {}", fam.len(), reservoir.len())));

    let aseed = derive(seed, 2);
    let ap = build_absorbing_path(g, &fam, s0, h, &none, u, aseed)?;
    stages.push(stage("absorber", aseed, ap.retries, format!("{} edges", ap.path.len())));
    let mut free = Subset::full(n);
    free.difference_with(&ap.path.vertex_set(n));
    let mut placed = ap.path.colour_set(n);

    let jseed = derive(seed, 3);
    let helpers = s0.difference(&placed).union(early);
    let (pa, jr) = junk_path_counted(g, early, &helpers, &free, ap.path.end(), jseed)?;
    stages.push(stage("junk", jseed, jr, format!("{} edges for {} junk colours", pa.len(), early.len())));
    free.difference_with(&pa.vertex_set(n));
    placed.union_with(&pa.colour_set(n));

    let (_, pool, exit) = carve(g, &free, h, pa.end(), params.p, fam.len() + 1, &mut r)?;
    let c_m = s0.difference(&placed);
    let reserved = reservoir.intersection(&c_m);
    let mseed = derive(seed, 4);
    let mu = tails_budget(params.mu, fam.len() + 1, pool.len());
    let lp = ninety_nine_path(g, &c_m, &pool, &reserved, &none, pa.end(), exit, mu, params.path_retries, mseed)?;
    stages.push(long_stage(&lp, mseed));
    free.difference_with(&lp.path.vertex_set(n));
    let l = c_m.difference(&lp.path.colour_set(n));
    if l.len() > fam.len() + 1 {
        return Ok(Outcome::Leftover(l));
    }

    let tseed = derive(seed, 5);
    let tails = match absorb_tails(g, &l, &fam, &free, &none, exit, tseed) {
        Ok(t) => t,
        Err(Error::Construction(_)) => {
            let whole = join(g, &[&ap.path, &pa, &lp.path])?;
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
    stages.push(stage(
        "tails",
        tseed,
        tails.retries,
        format!("{} colours, {} gadgets activated, leftover {}", l.len(), tails.used.len(), tails.leftover.is_some()),
    ));
    let pr = ap.collapse(g, &tails.used)?;
    let path = join(g, &[&pr, &pa, &lp.path, &tails.path])?;
    Ok(Outcome::Done(finish(g, s, &path, tails.leftover)?))
}

#[allow(clippy::too_many_arguments)]
fn general_attempt(
    g: &Group,
    s: &Subset,
    h: &Subset,
    s0: &Subset,
    early: &Subset,
    params: &SolverParams,
    seed: u64,
    stages: &mut Vec<Stage>,
) -> Result<Outcome<Ordering>> {
    let n = g.order();
    let none = Subset::empty(n);
    let mut r = rng(seed);
    let u = *h.to_vec().choose(&mut r).expect("subgroup is nonempty");

    // l flexible pairs absorb up to l + 1 colours; t = l keeps the waveform small
    let l = if n >= 256 { 2 } else { 1 };
    let t = l;
    let (prod, mut pairs) = popular_pairs_with(g, s0, true)?;
    if pairs.len() < 3 * t + l {
        return crate::error::construction(format!("only {} g-pairs, need {}", pairs.len(), 3 * t + l));
    }
    pairs.shuffle(&mut r);
    pairs.truncate(3 * t + l);
    let fseed = derive(seed, 1);
    let fam = make_absorbing_family(pairs, t, l, fseed)?;
    stages.push(stage("family", fseed, fam.graph.resamples, format!("{} pairs with product {prod}, t = {t}, l = {l}", fam.pairs.len())));

    let wseed = derive(seed, 2);
    let w = build_waveform(g, &fam.subfamily_pairs(), s0, h, u, wseed)?;
    stages.push(stage("waveform", wseed, w.retries, format!("{} thetas", w.thetas.len())));
    let mut free = Subset::full(n);
    free.difference_with(&w.vertex_set(n));
    let mut placed = Subset::from_indices(n, fam.pairs.iter().flat_map(|p| [p.a, p.b]).chain(w.connectors.iter().copied()));

    let jseed = derive(seed, 3);
    let helpers = s0.difference(&placed).union(early);
    let (pa, jr) = junk_path_counted(g, early, &helpers, &free, w.end(), jseed)?;
    stages.push(stage("junk", jseed, jr, format!("{} edges for {} junk colours", pa.len(), early.len())));
    free.difference_with(&pa.vertex_set(n));
    placed.union_with(&pa.colour_set(n));

    let (_, pool, exit) = carve(g, &free, h, pa.end(), params.p, l + 1, &mut r)?;
    let c_m = s0.difference(&placed);
    let mseed = derive(seed, 4);
    let mu = tails_budget(params.mu, l + 1, pool.len());
    let lp = ninety_nine_path(g, &c_m, &pool, &none, &none, pa.end(), exit, mu, params.path_retries, mseed)?;
    stages.push(long_stage(&lp, mseed));
    free.difference_with(&lp.path.vertex_set(n));
    let rest = c_m.difference(&lp.path.colour_set(n));
    if rest.len() > l + 1 {
        return Ok(Outcome::Leftover(rest));
    }

    let tseed = derive(seed, 5);
    let tails = match absorb_pair_tails(g, &rest, &fam.flex_pairs(), &free, exit, l, tseed) {
        Ok(t) => t,
        Err(Error::Construction(_)) => return Ok(Outcome::Leftover(rest)),
        Err(e) => return Err(e),
    };
    stages.push(stage("tails", tseed, tails.retries, format!("{} colours, leftover {}", rest.len(), tails.leftover.is_some())));
    let pw: RainbowPath = collapse_waveform(g, &w, &tails.used)?;
    let path = join(g, &[&pw, &pa, &lp.path, &tails.path])?;
    Ok(Outcome::Done(finish(g, s, &path, tails.leftover)?))
}
