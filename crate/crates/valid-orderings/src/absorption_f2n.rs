//! Zero-sum absorbers over F_2^n: gadgets, flexible families, absorbing paths,
//! spiders and forks, plus the junk and tails constructions that feed them.
//!
//! Vertices and colours are bitvectors and an edge `v -> v ^ c` has colour `c`.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::linalg::XorBasis;
use crate::orderings::{Ordering, RainbowPath};
use crate::rng::{retry, rng, DEFAULT_RETRIES};
use crate::subset::Subset;

pub const MAX_GADGET: usize = 6;
/// Sampling budget of `find_flexible_family`, per requested gadget.
pub const FAMILY_SAMPLES_PER_GADGET: usize = 4000;
/// `build_fork` wants `|S|` at least this multiple of `|∪fam|`.
pub const FORK_MULTIPLE: usize = 8;
/// Colliding samples kept per sum bucket.
const BUCKET_CAP: usize = 8;
/// Pairs `(a, b)` tried per tails step before giving up on the attempt.
const TAIL_PAIR_TRIES: usize = 64;

fn need_cube(g: &Group, what: &str) -> Result<usize> {
    g.cube_dim().ok_or_else(|| Error::Unsupported(format!("{what} needs F_2^n")))
}

fn xor(xs: &[usize]) -> usize {
    xs.iter().fold(0, |a, &b| a ^ b)
}

/// A minimal zero-sum ordered set of at most six nonzero vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Gadget {
    elems: Vec<usize>,
    #[serde(skip)]
    span: XorBasis,
}

impl Gadget {
    /// Validates zero sum and minimality over all proper subsets.
    pub fn new(elems: Vec<usize>) -> Result<Gadget> {
        let k = elems.len();
        if !(3..=MAX_GADGET).contains(&k) {
            return Err(Error::Contract(format!("a gadget has 3 to 6 elements, got {k}")));
        }
        if elems.contains(&0) {
            return Err(Error::Contract("gadget elements are nonzero".into()));
        }
        for i in 0..k {
            if elems[i + 1..].contains(&elems[i]) {
                return Err(Error::Contract(format!("gadget element {} repeats", elems[i])));
            }
        }
        if xor(&elems) != 0 {
            return Err(Error::Contract("gadget does not sum to zero".into()));
        }
        for mask in 1..(1usize << k) - 1 {
            let s = (0..k).filter(|i| mask >> i & 1 == 1).fold(0, |a, i| a ^ elems[i]);
            if s == 0 {
                return Err(Error::Contract("gadget has a proper zero-sum subset".into()));
            }
        }
        let span = XorBasis::from_vectors(elems.iter().copied());
        Ok(Gadget { elems, span })
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn last(&self) -> usize {
        self.elems[self.elems.len() - 1]
    }

    pub fn span(&self) -> &XorBasis {
        &self.span
    }

    /// `f1, f1+f2, ..., f1+...+f_{k-1}`.
    pub fn partial_sums(&self) -> Vec<usize> {
        let mut acc = 0;
        self.elems[..self.len() - 1]
            .iter()
            .map(|&f| {
                acc ^= f;
                acc
            })
            .collect()
    }

    pub fn reversed(&self) -> Gadget {
        let mut elems = self.elems.clone();
        elems.reverse();
        Gadget { elems, span: self.span.clone() }
    }

    /// The same set in another order.
    pub fn reordered(&self, order: Vec<usize>) -> Result<Gadget> {
        let mut a = order.clone();
        let mut b = self.elems.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::Contract("reordering must keep the gadget's elements".into()));
        }
        Ok(Gadget { elems: order, span: self.span.clone() })
    }
}

fn conflict(a: &Gadget, b: &Gadget) -> Option<&'static str> {
    if a.elems.iter().any(|x| b.elems.contains(x)) {
        return Some("F1: gadgets share an element");
    }
    let pb = b.partial_sums();
    if a.partial_sums().iter().any(|x| pb.contains(x)) {
        return Some("F2: partial sums meet");
    }
    if a.span.intersection_dim(&b.span) > 1 {
        return Some("F3: spans meet in more than two points");
    }
    None
}

/// Gadgets satisfying F1 (disjoint), F2 (disjoint partial sums) and F3 (spans
/// meet in at most two points), checked on every mutation.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FlexibleFamily {
    gadgets: Vec<Gadget>,
}

impl FlexibleFamily {
    pub fn new() -> Self {
        FlexibleFamily::default()
    }

    pub fn from_gadgets(gadgets: Vec<Gadget>) -> Result<Self> {
        let mut fam = FlexibleFamily::new();
        for f in gadgets {
            fam.push(f)?;
        }
        Ok(fam)
    }

    pub fn gadgets(&self) -> &[Gadget] {
        &self.gadgets
    }

    pub fn len(&self) -> usize {
        self.gadgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gadgets.is_empty()
    }

    pub fn compatible(&self, f: &Gadget) -> Result<()> {
        match self.gadgets.iter().find_map(|h| conflict(h, f)) {
            Some(why) => Err(Error::Contract(why.into())),
            None => Ok(()),
        }
    }

    pub fn push(&mut self, f: Gadget) -> Result<()> {
        self.compatible(&f)?;
        self.gadgets.push(f);
        Ok(())
    }

    /// Rechecks F1 to F3 for every pair.
    pub fn check(&self) -> Result<()> {
        for (i, a) in self.gadgets.iter().enumerate() {
            Gadget::new(a.elems.clone())?;
            for b in &self.gadgets[i + 1..] {
                if let Some(why) = conflict(a, b) {
                    return Err(Error::Contract(why.into()));
                }
            }
        }
        Ok(())
    }

    /// `∪ fam` as a subset.
    pub fn elements(&self, universe: usize) -> Subset {
        Subset::from_indices(universe, self.gadgets.iter().flat_map(|f| f.elems.iter().copied()))
    }

    pub fn subfamily(&self, idx: &[usize]) -> FlexibleFamily {
        FlexibleFamily { gadgets: idx.iter().map(|&i| self.gadgets[i].clone()).collect() }
    }
}

/// All nonzero combinations of `xs` avoid `blocked`, and none is zero.
fn free_span(xs: &[usize], blocked: &Subset) -> bool {
    (1..1usize << xs.len()).all(|m| {
        let s = (0..xs.len()).filter(|i| m >> i & 1 == 1).fold(0, |a, i| a ^ xs[i]);
        s != 0 && !blocked.contains(s)
    })
}

/// Smallest zero-sum subset of `d` (which sums to zero), in `d`'s order.
fn minimal_zero_sum(d: &[usize]) -> Option<Vec<usize>> {
    let k = d.len();
    let mut masks: Vec<usize> = (1..1usize << k).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks.into_iter().find_map(|m| {
        let pick: Vec<usize> = (0..k).filter(|i| m >> i & 1 == 1).map(|i| d[i]).collect();
        (pick.len() >= 3 && xor(&pick) == 0).then_some(pick)
    })
}

/// Gadget from two same-sum tuples: the symmetric difference, first tuple first.
fn gadget_from(u: &[usize], t: &[usize]) -> Option<Gadget> {
    let d: Vec<usize> =
        u.iter().filter(|x| !t.contains(x)).chain(t.iter().filter(|x| !u.contains(x))).copied().collect();
    if d.len() < 3 {
        return None;
    }
    Gadget::new(minimal_zero_sum(&d)?).ok()
}

/// Greedy flexible family in `E`. Samples pairs and triples whose spans avoid
/// the spans of the gadgets found so far and hashes their sums; two tuples with
/// the same sum give a zero-sum set whose minimal zero-sum subset is the
/// candidate gadget. Candidates passing F1 to F3 are kept. May return fewer than
/// `target` gadgets.
pub fn find_flexible_family(g: &Group, e: &Subset, target: usize, seed: u64) -> Result<FlexibleFamily> {
    need_cube(g, "find_flexible_family")?;
    if e.contains(0) {
        return Err(Error::Precondition("gadget colours must be nonzero".into()));
    }
    let mut fam = FlexibleFamily::new();
    let mut blocked = Subset::empty(g.order());
    let mut pool = e.to_vec();
    let mut r = rng(seed);
    let mut sums: HashMap<(usize, usize), Vec<Vec<usize>>> = HashMap::new();
    let budget = FAMILY_SAMPLES_PER_GADGET * target.max(1);
    for step in 0..budget {
        if fam.len() >= target {
            break;
        }
        let arity = 2 + step % 2;
        if pool.len() < arity {
            break;
        }
        let t: Vec<usize> = pool.choose_multiple(&mut r, arity).copied().collect();
        if !free_span(&t, &blocked) {
            continue;
        }
        let s = xor(&t);
        let mut found = None;
        if arity == 2 && e.contains(s) && !blocked.contains(s) {
            found = Gadget::new(vec![t[0], t[1], s]).ok().filter(|f| fam.compatible(f).is_ok());
        }
        let bucket = sums.entry((arity, s)).or_default();
        if found.is_none() {
            bucket.retain(|u| free_span(u, &blocked));
            found = bucket.iter().filter_map(|u| gadget_from(u, &t)).find(|f| fam.compatible(f).is_ok());
        }
        match found {
            Some(f) => {
                for x in f.span.elements() {
                    if x != 0 {
                        blocked.insert(x);
                    }
                }
                fam.push(f)?;
                pool.retain(|&x| !blocked.contains(x));
            }
            None if bucket.len() < BUCKET_CAP => bucket.push(t),
            None => {}
        }
    }
    fam.check()?;
    Ok(fam)
}

/// Reorders `F` so that `x` is no contiguous subsum of it.
fn avoiding(f: &Gadget, x: usize) -> Vec<usize> {
    if !f.span.contains(x) {
        return f.elems.clone();
    }
    let k = f.len();
    let mask = (1..(1usize << k) - 1)
        .find(|m| (0..k).filter(|i| m >> i & 1 == 1).fold(0, |a, i| a ^ f.elems[i]) == x)
        .expect("x lies in the span");
    let (t, rest): (Vec<usize>, Vec<usize>) = (0..k).partition(|i| mask >> i & 1 == 1);
    let (t, rest): (Vec<usize>, Vec<usize>) =
        (t.into_iter().map(|i| f.elems[i]).collect(), rest.into_iter().map(|i| f.elems[i]).collect());
    // both sides have at least two elements because x is not in F
    let mut out = t[..t.len() - 1].to_vec();
    out.push(rest[0]);
    out.push(t[t.len() - 1]);
    out.extend_from_slice(&rest[1..]);
    out
}

/// True when no contiguous block of `xs` sums to zero, so the walk from any
/// vertex along `xs` is a path.
fn zero_block_free(xs: &[usize]) -> bool {
    (0..xs.len()).all(|i| {
        let mut acc = 0;
        xs[i..].iter().all(|&c| {
            acc ^= c;
            acc != 0
        })
    })
}

/// An ordering of `F ∪ {x}` with `x` second, such that no contiguous block sums
/// to zero. In particular it is valid and its walk from any vertex is a path.
pub fn order_with(f: &Gadget, x: usize) -> Result<Ordering> {
    if x == 0 || f.elems.contains(&x) {
        return Err(Error::Precondition(format!("{x} must be nonzero and outside the gadget")));
    }
    let mut ord = avoiding(f, x);
    ord.insert(1, x);
    if !zero_block_free(&ord) {
        return Err(Error::Internal("eat-an-element ordering has a zero block".into()));
    }
    Ok(ord)
}

/// One gadget's subpath: edges `start .. start + len` use exactly `F ∪ {c(F)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub gadget: usize,
    pub start: usize,
    pub len: usize,
    pub companion: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsorbingPath {
    pub path: RainbowPath,
    pub family: FlexibleFamily,
    pub segments: Vec<Segment>,
    /// Colours of the path outside `∪fam`.
    #[serde(skip)]
    pub fixed_colours: Subset,
    /// Failed attempts before this one.
    pub retries: usize,
}

impl AbsorbingPath {
    pub fn trivial(g: &Group, start: usize) -> AbsorbingPath {
        AbsorbingPath {
            path: RainbowPath::trivial(start),
            family: FlexibleFamily::new(),
            segments: Vec::new(),
            fixed_colours: Subset::empty(g.order()),
            retries: 0,
        }
    }

    pub fn check(&self, g: &Group) -> Result<()> {
        self.path.check(g)?;
        self.family.check()?;
        if self.segments.len() != self.family.len() {
            return Err(Error::Contract("one segment per gadget".into()));
        }
        let fam_elems = self.family.elements(g.order());
        let mut companions = Subset::empty(g.order());
        for (i, seg) in self.segments.iter().enumerate() {
            let f = &self.family.gadgets[seg.gadget];
            if seg.gadget != i || seg.len != f.len() + 1 || seg.start + seg.len > self.path.len() {
                return Err(Error::Contract(format!("segment {i} is malformed")));
            }
            if fam_elems.contains(seg.companion) || !companions.insert(seg.companion) {
                return Err(Error::Contract(format!("companion of gadget {i} is not fresh")));
            }
            let mut want = Subset::from_indices(g.order(), f.elems.iter().copied());
            want.insert(seg.companion);
            let got = Subset::from_indices(g.order(), self.path.colours[seg.start..seg.start + seg.len].iter().copied());
            if got != want {
                return Err(Error::Contract(format!("segment {i} does not use exactly F ∪ c(F)")));
            }
        }
        if self.fixed_colours != self.path.colour_set(g.order()).difference(&fam_elems) {
            return Err(Error::Contract("fixed colours out of date".into()));
        }
        Ok(())
    }

    /// Colours after collapsing `subfam`: everything but their gadget elements.
    pub fn colours_after(&self, g: &Group, subfam: &[usize]) -> Subset {
        let mut c = self.path.colour_set(g.order());
        for &i in subfam {
            for &x in &self.family.gadgets[i].elems {
                c.remove(x);
            }
        }
        c
    }

    /// Replaces each chosen gadget's subpath by the single edge `c(F)`.
    pub fn collapse(&self, g: &Group, subfam: &[usize]) -> Result<RainbowPath> {
        let mut drop = vec![false; self.family.len()];
        for &i in subfam {
            if i >= drop.len() {
                return Err(Error::Precondition(format!("gadget {i} is not in the family")));
            }
            drop[i] = true;
        }
        let mut colours = Vec::with_capacity(self.path.len());
        let mut at = 0;
        let mut segs = self.segments.iter().filter(|s| drop[s.gadget]).peekable();
        while at < self.path.len() {
            match segs.peek() {
                Some(s) if s.start == at => {
                    colours.push(s.companion);
                    at += s.len;
                    segs.next();
                }
                _ => {
                    colours.push(self.path.colours[at]);
                    at += 1;
                }
            }
        }
        let p = RainbowPath::from_colours(g, self.path.start(), &colours);
        p.check(g)?;
        Ok(p)
    }

    /// Text dump: vertex and colour sequences plus the gadget segment table.
    pub fn dump(&self, g: &Group) -> String {
        let fmt = |xs: &[usize]| xs.iter().map(|&x| crate::format::format_element(g, x)).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "absorbing path: {} edges, {} gadgets", self.path.len(), self.family.len());
        let _ = writeln!(out, "vertices: {}", fmt(&self.path.vertices));
        let _ = writeln!(out, "colours: {}", fmt(&self.path.colours));
        for s in &self.segments {
            let _ = writeln!(
                out,
                "gadget {}: edges {}..{} companion {} elems {}",
                s.gadget,
                s.start,
                s.start + s.len,
                crate::format::format_element(g, s.companion),
                fmt(&self.family.gadgets[s.gadget].elems)
            );
        }
        out
    }
}

/// Vertices reached from `v` along `colours`, excluding `v`.
fn walk(v: usize, colours: &[usize]) -> impl Iterator<Item = usize> + '_ {
    colours.iter().scan(v, |acc, &c| {
        *acc ^= c;
        Some(*acc)
    })
}

/// Greedy absorbing path: from `start`, each gadget's path `P_F` (an eat-an-element
/// ordering of `F ∪ {c(F)}`) is appended after one connector edge of an unused
/// colour of `E`, choosing a translate whose vertices lie in `allowed`, avoid
/// `forbidden` and the path so far. The first gadget is tried without a
/// connector first. At most `8|fam|` edges.
pub fn build_absorbing_path(
    g: &Group,
    fam: &FlexibleFamily,
    e: &Subset,
    allowed: &Subset,
    forbidden: &Subset,
    start: usize,
    seed: u64,
) -> Result<AbsorbingPath> {
    need_cube(g, "build_absorbing_path")?;
    g.check_element(start)?;
    let fam_elems = fam.elements(g.order());
    if !fam_elems.is_subset(e) {
        return Err(Error::Precondition("gadgets must lie in E".into()));
    }
    if e.difference(&fam_elems).len() < fam.len() {
        return Err(Error::Precondition("not enough companion colours outside the gadgets".into()));
    }
    if fam.is_empty() {
        return Ok(AbsorbingPath::trivial(g, start));
    }
    let (mut ap, retries) = retry(seed, DEFAULT_RETRIES, "absorbing path", |s| {
        absorbing_attempt(g, fam, e, allowed, forbidden, start, s)
    })?;
    ap.retries = retries;
    ap.check(g)?;
    Ok(ap)
}

fn absorbing_attempt(
    g: &Group,
    fam: &FlexibleFamily,
    e: &Subset,
    allowed: &Subset,
    forbidden: &Subset,
    start: usize,
    seed: u64,
) -> Option<AbsorbingPath> {
    let mut r = rng(seed);
    let fam_elems = fam.elements(g.order());
    let mut free = e.difference(&fam_elems).to_vec();
    free.shuffle(&mut r);
    let (companions, connectors) = free.split_at(fam.len());
    let mut used = vec![false; connectors.len()];
    let mut path = RainbowPath::trivial(start);
    let mut on_path = Subset::from_indices(g.order(), [start]);
    let mut segments = Vec::with_capacity(fam.len());
    let ok = |v: usize, on: &Subset| allowed.contains(v) && !forbidden.contains(v) && !on.contains(v);
    for (i, f) in fam.gadgets.iter().enumerate() {
        let colours = order_with(f, companions[i]).ok()?;
        let v = path.end();
        let direct = i == 0 && walk(v, &colours).all(|w| ok(w, &on_path));
        if !direct {
            let mut order: Vec<usize> = (0..connectors.len()).filter(|&k| !used[k]).collect();
            order.shuffle(&mut r);
            let k = order.into_iter().find(|&k| {
                let w = v ^ connectors[k];
                ok(w, &on_path) && walk(w, &colours).all(|u| ok(u, &on_path))
            })?;
            used[k] = true;
            path.push(g, connectors[k]);
            on_path.insert(path.end());
        }
        segments.push(Segment { gadget: i, start: path.len(), len: colours.len(), companion: companions[i] });
        for &c in &colours {
            path.push(g, c);
            on_path.insert(path.end());
        }
    }
    let fixed_colours = path.colour_set(g.order()).difference(&fam_elems);
    Some(AbsorbingPath { path, family: fam.clone(), segments, fixed_colours, retries: 0 })
}

/// A path from `start` that uses every colour of `J`, built from two-edge hops
/// `v -> v e -> v e j` with a fresh `e ∈ E` and new vertices in `allowed`.
/// Works in any group.
pub fn junk_path(g: &Group, j: &Subset, e: &Subset, allowed: &Subset, start: usize, seed: u64) -> Result<RainbowPath> {
    junk_path_counted(g, j, e, allowed, start, seed).map(|(p, _)| p)
}

/// [`junk_path`] together with the number of failed attempts.
pub fn junk_path_counted(
    g: &Group,
    j: &Subset,
    e: &Subset,
    allowed: &Subset,
    start: usize,
    seed: u64,
) -> Result<(RainbowPath, usize)> {
    g.check_element(start)?;
    if !j.is_subset(e) {
        return Err(Error::Precondition("junk colours must lie in E".into()));
    }
    if e.contains(g.identity()) {
        return Err(Error::Precondition("E must not contain the identity".into()));
    }
    if j.is_empty() {
        return Ok((RainbowPath::trivial(start), 0));
    }
    let (p, retries) = retry(seed, DEFAULT_RETRIES, "junk path", |s| {
        let mut r = rng(s);
        let mut pool = e.to_vec();
        pool.shuffle(&mut r);
        let mut path = RainbowPath::trivial(start);
        let mut on_path = Subset::from_indices(g.order(), [start]);
        let mut used = Subset::empty(g.order());
        for jj in j.iter() {
            if used.contains(jj) {
                continue;
            }
            let v = path.end();
            let &h = pool.iter().find(|&&h| {
                if h == jj || used.contains(h) {
                    return false;
                }
                let a = g.mul(v, h);
                let b = g.mul(a, jj);
                a != b && [a, b].iter().all(|&w| allowed.contains(w) && !on_path.contains(w))
            })?;
            for c in [h, jj] {
                path.push(g, c);
                on_path.insert(path.end());
                used.insert(c);
            }
        }
        Some(path)
    })?;
    p.check(g)?;
    Ok((p, retries))
}

/// Result of absorbing a small colour set into gadgets.
#[derive(Clone, Debug, Serialize)]
pub struct Tails {
    /// Indices of the consumed gadgets, in order of use.
    pub used: Vec<usize>,
    pub path: RainbowPath,
    /// The colour of `L ∪ ∪used` the path leaves out, if any.
    pub leftover: Option<usize>,
    pub retries: usize,
}

/// Absorbs `L` two colours at a time: a leg `f1 .. f_{k-1}, a, b` for a fresh
/// gadget swaps `a, b` for `F`'s last element, until at most one colour is left.
/// The path starts at `start` and otherwise lies in `allowed ∖ forbidden`.
pub fn absorb_tails(
    g: &Group,
    l: &Subset,
    fam: &FlexibleFamily,
    allowed: &Subset,
    forbidden: &Subset,
    start: usize,
    seed: u64,
) -> Result<Tails> {
    need_cube(g, "absorb_tails")?;
    g.check_element(start)?;
    if l.contains(0) {
        return Err(Error::Precondition("tail colours must be nonzero".into()));
    }
    if !l.is_disjoint(&fam.elements(g.order())) {
        return Err(Error::Precondition("tail colours must avoid the gadgets".into()));
    }
    if l.len() > fam.len() + 1 {
        return Err(Error::Precondition(format!("{} tail colours need at least {} gadgets", l.len(), l.len() - 1)));
    }
    let (mut t, retries) =
        retry(seed, DEFAULT_RETRIES, "tails absorption", |s| tails_attempt(g, l, fam, allowed, forbidden, start, s))?;
    t.retries = retries;
    t.path.check(g)?;
    let mut expect = l.clone();
    for &i in &t.used {
        expect.union_with(&Subset::from_indices(g.order(), fam.gadgets[i].elems.iter().copied()));
    }
    let got = t.path.colour_set(g.order());
    if !got.is_subset(&expect) || expect.len() - got.len() > 1 || t.used.len() > l.len() {
        return Err(Error::Internal("tails absorption broke its colour accounting".into()));
    }
    Ok(t)
}

fn tails_attempt(
    g: &Group,
    l: &Subset,
    fam: &FlexibleFamily,
    allowed: &Subset,
    forbidden: &Subset,
    start: usize,
    seed: u64,
) -> Option<Tails> {
    let mut r = rng(seed);
    let mut rest = l.to_vec();
    rest.shuffle(&mut r);
    let mut avail: Vec<usize> = (0..fam.len()).collect();
    avail.shuffle(&mut r);
    let mut path = RainbowPath::trivial(start);
    let mut on_path = Subset::from_indices(g.order(), [start]);
    let mut used = Vec::new();
    while rest.len() >= 2 {
        let v = path.end();
        let mut pairs: Vec<(usize, usize)> =
            (0..rest.len()).flat_map(|i| (0..rest.len()).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        pairs.shuffle(&mut r);
        pairs.truncate(TAIL_PAIR_TRIES);
        let step = pairs.iter().find_map(|&(ia, ib)| {
            let (a, b) = (rest[ia], rest[ib]);
            avail.iter().enumerate().find_map(|(pos, &fi)| {
                let f = &fam.gadgets[fi];
                let orders = [f.elems.clone(), avoiding(f, a), avoiding(f, a ^ b), f.reversed().elems];
                orders.into_iter().find_map(|ord| {
                    let mut leg = ord[..ord.len() - 1].to_vec();
                    leg.extend([a, b]);
                    let vs: Vec<usize> = walk(v, &leg).collect();
                    let fresh = vs.iter().enumerate().all(|(i, &w)| {
                        w != v
                            && !vs[..i].contains(&w)
                            && allowed.contains(w)
                            && !forbidden.contains(w)
                            && !on_path.contains(w)
                    });
                    fresh.then(|| (ia, ib, pos, leg, ord[ord.len() - 1]))
                })
            })
        });
        let (ia, ib, pos, leg, last) = step?;
        for &c in &leg {
            path.push(g, c);
            on_path.insert(path.end());
        }
        used.push(avail.remove(pos));
        let (a, b) = (rest[ia], rest[ib]);
        rest.retain(|&x| x != a && x != b);
        rest.push(last);
    }
    Some(Tails { used, path, leftover: rest.first().copied(), retries: 0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Out,
    In,
}

/// Union of gadget-prefix paths from a common base. Each leg lists its
/// vertices, base first.
#[derive(Clone, Debug, Serialize)]
pub struct Spider {
    pub base: usize,
    pub direction: Direction,
    pub legs: Vec<(usize, Vec<usize>)>,
}

impl Spider {
    pub fn out(fam: &FlexibleFamily, base: usize) -> Spider {
        Spider::build(fam, base, Direction::Out)
    }

    /// The out-spider of the reversed gadgets.
    pub fn inward(fam: &FlexibleFamily, base: usize) -> Spider {
        Spider::build(fam, base, Direction::In)
    }

    fn build(fam: &FlexibleFamily, base: usize, direction: Direction) -> Spider {
        let legs = fam
            .gadgets
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let f = if direction == Direction::In { f.reversed() } else { f.clone() };
                let mut vs = vec![base];
                vs.extend(walk(base, &f.elems[..f.len() - 1]));
                (i, vs)
            })
            .collect();
        Spider { base, direction, legs }
    }

    pub fn vertex_set(&self, universe: usize) -> Subset {
        let mut s = Subset::from_indices(universe, [self.base]);
        for (_, vs) in &self.legs {
            for &v in vs {
                s.insert(v);
            }
        }
        s
    }

    /// Leg endpoints: `base + f_{k}` for out-legs, since each gadget is zero-sum.
    pub fn leaves(&self) -> Vec<usize> {
        self.legs.iter().map(|(_, vs)| vs[vs.len() - 1]).collect()
    }

    /// Legs are vertex-disjoint apart from the base.
    pub fn check(&self, universe: usize) -> Result<()> {
        let mut seen = Subset::from_indices(universe, [self.base]);
        for (i, vs) in &self.legs {
            if vs.first() != Some(&self.base) {
                return Err(Error::Contract(format!("leg {i} does not start at the base")));
            }
            for &v in &vs[1..] {
                if !seen.insert(v) {
                    return Err(Error::Contract(format!("leg {i} meets another leg at {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn dump(&self, g: &Group) -> String {
        let mut out = format!("{:?}-spider at {}\n", self.direction, crate::format::format_element(g, self.base));
        for (i, vs) in &self.legs {
            let _ = writeln!(out, "leg {i}: {}", crate::format::format_elements(g, vs));
        }
        out
    }
}

/// Checks both spiders at `base` and that they share a vertex set.
pub fn check_spiders(fam: &FlexibleFamily, base: usize, universe: usize) -> Result<()> {
    let out = Spider::out(fam, base);
    let inw = Spider::inward(fam, base);
    out.check(universe)?;
    inw.check(universe)?;
    if out.vertex_set(universe) != inw.vertex_set(universe) {
        return Err(Error::Internal("out- and in-spiders disagree on vertices".into()));
    }
    Ok(())
}

/// An absorbing path from the identity together with the in-spider of `fam`
/// based there, disjoint from the path apart from the base.
pub fn build_fork(g: &Group, fam: &FlexibleFamily, s: &Subset, seed: u64) -> Result<(AbsorbingPath, Spider)> {
    need_cube(g, "build_fork")?;
    let base = g.identity();
    check_spiders(fam, base, g.order())?;
    let q = Spider::inward(fam, base);
    let fam_elems = fam.elements(g.order());
    if !fam.is_empty() && s.len() < FORK_MULTIPLE * fam_elems.len() {
        return Err(Error::Precondition(format!(
            "a fork needs |S| >= {} |∪fam| = {}",
            FORK_MULTIPLE,
            FORK_MULTIPLE * fam_elems.len()
        )));
    }
    let mut forbidden = q.vertex_set(g.order());
    forbidden.remove(base);
    let ap = build_absorbing_path(g, fam, s, &Subset::full(g.order()), &forbidden, base, seed)?;
    if ap.path.len() > 8 * fam.len() + 1 {
        return Err(Error::Internal("fork path too long".into()));
    }
    if ap.path.vertices[1..].iter().any(|&v| forbidden.contains(v) || v == base) {
        return Err(Error::Internal("fork path meets its spider".into()));
    }
    Ok((ap, q))
}
