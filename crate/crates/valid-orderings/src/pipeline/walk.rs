//! Growing rainbow paths on a partially used vertex and colour budget.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::group::Group;
use crate::orderings::RainbowPath;
use crate::rng::Rng;
use crate::subset::Subset;

/// Samples tried for the first (and last) edge of 3- and 4-edge links.
const LINK_SAMPLES: usize = 48;
const LINK4_SAMPLES: usize = 20;
/// Candidate colours scored per extension step.
const EXTEND_CANDIDATES: usize = 20;
const ONWARD_SAMPLES: usize = 16;

const ABSENT: usize = usize::MAX;

/// A set with O(1) insert, remove and uniform sampling.
#[derive(Clone, Debug)]
pub(crate) struct Bag {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl Bag {
    pub fn from_subset(s: &Subset) -> Bag {
        let mut b = Bag { items: Vec::with_capacity(s.len()), pos: vec![ABSENT; s.universe()] };
        for x in s.iter() {
            b.insert(x);
        }
        b
    }

    pub fn insert(&mut self, x: usize) -> bool {
        if self.pos[x] != ABSENT {
            return false;
        }
        self.pos[x] = self.items.len();
        self.items.push(x);
        true
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let p = self.pos[x];
        if p == ABSENT {
            return false;
        }
        let last = self.items.pop().expect("nonempty");
        if last != x {
            self.items[p] = last;
            self.pos[last] = p;
        }
        self.pos[x] = ABSENT;
        true
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        x < self.pos.len() && self.pos[x] != ABSENT
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn sample(&self, r: &mut Rng, k: usize) -> Vec<usize> {
        if k >= self.items.len() {
            let mut all = self.items.clone();
            all.shuffle(r);
            return all;
        }
        self.items.choose_multiple(r, k).copied().collect()
    }

    pub fn to_subset(&self) -> Subset {
        Subset::from_indices(self.pos.len(), self.items.iter().copied())
    }
}

/// Free vertices and unused colours shared by everything drawn so far.
pub(crate) struct Canvas<'a> {
    pub g: &'a Group,
    pub free: Subset,
    pub unused: Bag,
}

impl<'a> Canvas<'a> {
    pub fn new(g: &'a Group, free: Subset, colours: &Subset) -> Canvas<'a> {
        Canvas { g, free, unused: Bag::from_subset(colours) }
    }

    /// Follows `colours` from the end of `path`, consuming vertices and colours.
    /// The last vertex is consumed too; it need not have been free.
    pub fn walk(&mut self, path: &mut RainbowPath, colours: &[usize]) {
        for &c in colours {
            self.unused.remove(c);
            path.push(self.g, c);
            self.free.remove(path.end());
        }
    }

    /// Undoes the last edge of `path`, returning its colour and end vertex.
    pub fn pop(&mut self, path: &mut RainbowPath) -> Option<usize> {
        let c = path.colours.pop()?;
        let v = path.vertices.pop().expect("vertex for every colour");
        self.free.insert(v);
        self.unused.insert(c);
        Some(c)
    }

    /// Two-edge link `from -> m -> to` with `m` free and outside `avoid_v`,
    /// colours unused, distinct and outside `avoid_c`.
    fn link2(&self, from: usize, to: usize, avoid_c: &[usize], avoid_v: &[usize]) -> Option<[usize; 2]> {
        let g = self.g;
        self.unused.items().iter().find_map(|&c1| {
            let m = g.mul(from, c1);
            if !self.free.contains(m) || m == to || avoid_v.contains(&m) || avoid_c.contains(&c1) {
                return None;
            }
            let c2 = g.ldiv(m, to);
            (c2 != c1 && self.unused.contains(c2) && !avoid_c.contains(&c2)).then_some([c1, c2])
        })
    }

    /// A rainbow path of at most `max_len` edges from `from` to `to` through
    /// free vertices on unused colours, shortest first. Returns its colours.
    pub fn find_link(&self, from: usize, to: usize, max_len: usize, r: &mut Rng) -> Option<Vec<usize>> {
        let g = self.g;
        if from == to {
            return None;
        }
        let c = g.ldiv(from, to);
        if self.unused.contains(c) {
            return Some(vec![c]);
        }
        if max_len >= 2 {
            if let Some(p) = self.link2(from, to, &[], &[]) {
                return Some(p.to_vec());
            }
        }
        if max_len >= 3 {
            for c1 in self.unused.sample(r, LINK_SAMPLES) {
                let a = g.mul(from, c1);
                if !self.free.contains(a) || a == to {
                    continue;
                }
                if let Some([c2, c3]) = self.link2(a, to, &[c1], &[a]) {
                    return Some(vec![c1, c2, c3]);
                }
            }
        }
        if max_len >= 4 {
            let firsts = self.unused.sample(r, LINK4_SAMPLES);
            let lasts = self.unused.sample(r, LINK4_SAMPLES);
            for &c1 in &firsts {
                let a = g.mul(from, c1);
                if !self.free.contains(a) || a == to {
                    continue;
                }
                for &c4 in &lasts {
                    let b = g.mul(to, g.inv(c4));
                    if c4 == c1 || b == a || b == from || !self.free.contains(b) {
                        continue;
                    }
                    if let Some([c2, c3]) = self.link2(a, b, &[c1, c4], &[a, b]) {
                        return Some(vec![c1, c2, c3, c4]);
                    }
                }
            }
        }
        None
    }

    fn onward(&self, v: usize, r: &mut Rng) -> usize {
        self.unused.sample(r, ONWARD_SAMPLES).into_iter().filter(|&d| self.free.contains(self.g.mul(v, d))).count()
    }

    /// Extends `path` greedily into free vertices, preferring moves with few
    /// onward options. Stops when stuck; returns the number of edges added.
    pub fn extend(&mut self, path: &mut RainbowPath, r: &mut Rng) -> usize {
        let mut added = 0;
        loop {
            let cur = path.end();
            let mut cands: Vec<usize> = self
                .unused
                .sample(r, EXTEND_CANDIDATES)
                .into_iter()
                .filter(|&c| self.free.contains(self.g.mul(cur, c)))
                .collect();
            if cands.is_empty() {
                cands = self.unused.items().iter().copied().filter(|&c| self.free.contains(self.g.mul(cur, c))).collect();
                cands.truncate(EXTEND_CANDIDATES);
            }
            let best = cands
                .into_iter()
                .map(|c| {
                    let n = self.onward(self.g.mul(cur, c), r);
                    // dead ends last, otherwise fewest onward moves
                    let key = if n == 0 { usize::MAX } else { n };
                    (key, r.gen::<u32>(), c)
                })
                .min();
            let Some((_, _, c)) = best else { break };
            self.walk(path, &[c]);
            added += 1;
        }
        added
    }

    /// Replaces edges `x -> y` (colour `d`) by `x -> z -> y` on two unused
    /// colours with `z` free, giving `d` back. Each success places one more
    /// colour. Returns the number of insertions in one pass.
    pub fn polish(&mut self, path: &mut RainbowPath) -> usize {
        let g = self.g;
        let mut done = 0;
        let mut i = 0;
        while i < path.colours.len() {
            let (x, y, d) = (path.vertices[i], path.vertices[i + 1], path.colours[i]);
            let found = self.unused.items().iter().find_map(|&c| {
                let z = g.mul(x, c);
                if !self.free.contains(z) {
                    return None;
                }
                let c2 = g.ldiv(z, y);
                (c2 != c && self.unused.contains(c2)).then_some((c, z, c2))
            });
            if let Some((c, z, c2)) = found {
                self.unused.remove(c);
                self.unused.remove(c2);
                self.unused.insert(d);
                self.free.remove(z);
                path.colours.splice(i..=i, [c, c2]);
                path.vertices.insert(i + 1, z);
                done += 1;
                i += 2;
            } else {
                i += 1;
            }
        }
        done
    }
}
