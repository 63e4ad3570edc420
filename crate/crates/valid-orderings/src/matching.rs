//! Maximum bipartite matching (Hopcroft–Karp).

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub size: usize,
    /// Partner of each left vertex, if matched.
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
}

/// `adj[u]` lists the right neighbours of left vertex `u`. Deterministic: ties
/// are resolved by adjacency order.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Matching {
    let n_left = adj.len();
    let mut ml = vec![NIL; n_left];
    let mut mr = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];
    let mut size = 0;
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if ml[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = mr[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n_left];
        for u in 0..n_left {
            if ml[u] == NIL && augment(u, adj, &mut ml, &mut mr, &mut dist, &mut it) {
                size += 1;
            }
        }
    }
    let wrap = |v: Vec<usize>| v.into_iter().map(|x| (x != NIL).then_some(x)).collect();
    Matching { size, left: wrap(ml), right: wrap(mr) }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    ml: &mut [usize],
    mr: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    while it[u] < adj[u].len() {
        let v = adj[u][it[u]];
        it[u] += 1;
        let w = mr[v];
        if w == NIL || (dist[w] == dist[u] + 1 && augment(w, adj, ml, mr, dist, it)) {
            ml[u] = v;
            mr[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Picks one distinct representative from each set, if possible.
pub fn sdr(sets: &[Vec<usize>], universe: usize) -> Option<Vec<usize>> {
    let m = hopcroft_karp(sets, universe);
    (m.size == sets.len()).then(|| m.left.into_iter().map(|x| x.expect("perfect on the left")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn brute_max(adj: &[Vec<usize>], n_right: usize) -> usize {
        // best over all injective partial assignments, for tiny graphs
        fn go(u: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if u == adj.len() {
                return 0;
            }
            let mut best = go(u + 1, adj, used);
            for &v in &adj[u] {
                if !used[v] {
                    used[v] = true;
                    best = best.max(1 + go(u + 1, adj, used));
                    used[v] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        let edges: Vec<(usize, usize)> = (0..4).cartesian_product(0..4).collect();
        for mask in (0u32..1 << 16).step_by(97) {
            let mut adj = vec![Vec::new(); 4];
            for (i, &(u, v)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    adj[u].push(v);
                }
            }
            let m = hopcroft_karp(&adj, 4);
            assert_eq!(m.size, brute_max(&adj, 4));
            for (u, v) in m.left.iter().enumerate() {
                if let Some(v) = v {
                    assert!(adj[u].contains(v));
                    assert_eq!(m.right[*v], Some(u));
                }
            }
        }
    }

    #[test]
    fn sdr_respects_hall() {
        assert_eq!(sdr(&[vec![0, 1], vec![0], vec![1, 2]], 3), Some(vec![1, 0, 2]));
        assert_eq!(sdr(&[vec![0], vec![0]], 1), None);
        assert_eq!(sdr(&[], 0), Some(vec![]));
    }
}
