//! Randomized backtracking for near-complete sets, where greedy extension
//! paints itself into a corner: fewest-onward-moves first, random tie-breaks,
//! a node budget per restart.

use rand::Rng as _;

use crate::group::Group;
use crate::orderings::{ordering_from_rainbow, Ordering, RainbowPath};
use crate::rng::{derive, rng, Rng};
use crate::subset::Subset;

use super::walk::Bag;

/// Onward moves are counted exactly when either side is at most this small,
/// otherwise on a sample of this many colours.
const ONWARD_EXACT: usize = 32;

struct Search<'a> {
    g: &'a Group,
    free: Subset,
    free_list: Bag,
    unused: Bag,
    path: RainbowPath,
    slack: usize,
    nodes: u64,
    budget: u64,
    r: Rng,
}

impl Search<'_> {
    fn onward(&mut self, w: usize) -> usize {
        let g = self.g;
        if self.free_list.len() <= ONWARD_EXACT {
            let winv = g.inv(w);
            self.free_list.items().iter().filter(|&&u| self.unused.contains(g.mul(winv, u))).count()
        } else {
            self.unused.sample(&mut self.r, ONWARD_EXACT).into_iter().filter(|&d| self.free.contains(g.mul(w, d))).count()
        }
    }

    fn run(&mut self) -> Option<bool> {
        if self.unused.len() <= self.slack {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let g = self.g;
        let cur = self.path.end();
        let moves: Vec<usize> = self.unused.items().iter().copied().filter(|&c| self.free.contains(g.mul(cur, c))).collect();
        let mut scored: Vec<(usize, u32, usize)> = Vec::with_capacity(moves.len());
        for c in moves {
            let w = g.mul(cur, c);
            self.unused.remove(c);
            self.free.remove(w);
            self.free_list.remove(w);
            let n = self.onward(w);
            self.unused.insert(c);
            self.free.insert(w);
            self.free_list.insert(w);
            // a dead end is only acceptable as the final move
            if n == 0 && self.unused.len() > self.slack + 1 {
                continue;
            }
            scored.push((n, self.r.gen(), c));
        }
        scored.sort_unstable();
        for (_, _, c) in scored {
            let w = g.mul(cur, c);
            self.unused.remove(c);
            self.free.remove(w);
            self.free_list.remove(w);
            self.path.push(g, c);
            if self.run()? {
                return Some(true);
            }
            self.path.colours.pop();
            self.path.vertices.pop();
            self.unused.insert(c);
            self.free.insert(w);
            self.free_list.insert(w);
        }
        Some(false)
    }
}

/// Restarts of the randomized search from random starts (the identity when
/// it is in `S`, which then leads the ordering). `None` proves nothing.
pub(super) fn search_order(g: &Group, s: &Subset, seed: u64, restarts: usize, budget: u64) -> Option<Ordering> {
    let id = g.identity();
    let has_id = s.contains(id);
    let mut colours = s.clone();
    colours.remove(id);
    for a in 0..restarts.max(1) {
        let mut r = rng(derive(seed, a as u64));
        let start = if has_id { id } else { r.gen_range(0..g.order()) };
        let mut free = Subset::full(g.order());
        free.remove(start);
        let mut st = Search {
            g,
            free_list: Bag::from_subset(&free),
            free,
            unused: Bag::from_subset(&colours),
            path: RainbowPath::trivial(start),
            slack: usize::from(!has_id),
            nodes: 0,
            budget,
            r,
        };
        if st.run() != Some(true) {
            continue;
        }
        let lead = st.unused.items().first().copied();
        let mut ord = ordering_from_rainbow(g, &st.path, lead).ok()?;
        if has_id {
            ord.insert(0, id);
        }
        if super::verified(g, s, &ord) {
            return Some(ord);
        }
    }
    None
}
