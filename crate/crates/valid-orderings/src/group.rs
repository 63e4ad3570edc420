//! Finite groups with dense element indices.
//!
//! Products compose left to right: in the Cayley graph the edge `v -> v*a`
//! has colour `a`, and a path coloured `a, b` ends at `v*a*b`.

use std::collections::{HashSet, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::XorBasis;
use crate::subset::Subset;

pub const MAX_CUBE_DIM: usize = 24;
pub const MAX_TABLE_ORDER: usize = 2048;
pub const SUBGROUP_ENUM_CAP: usize = 512;
const SUBGROUP_COUNT_CAP: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    BooleanCube { n: usize },
    Cyclic { m: usize },
    Table { mul: Vec<u32>, inv: Vec<u32>, identity: usize },
}

/// A finite group. Elements are the indices `0..order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    kind: GroupKind,
    order: usize,
    abelian: bool,
}

impl Group {
    pub fn boolean_cube(n: usize) -> Result<Group> {
        if n > MAX_CUBE_DIM {
            return Err(Error::Capacity { what: format!("dimension {n}"), limit: MAX_CUBE_DIM });
        }
        Ok(Group { kind: GroupKind::BooleanCube { n }, order: 1 << n, abelian: true })
    }

    pub fn cyclic(m: usize) -> Result<Group> {
        if m == 0 {
            return Err(Error::Input("cyclic group of order 0".into()));
        }
        if m > 1 << MAX_CUBE_DIM {
            return Err(Error::Capacity { what: format!("cyclic order {m}"), limit: 1 << MAX_CUBE_DIM });
        }
        Ok(Group { kind: GroupKind::Cyclic { m }, order: m, abelian: true })
    }

    /// Builds a group from a multiplication table, checking the group axioms.
    pub fn from_table(rows: &[Vec<usize>]) -> Result<Group> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Input("empty multiplication table".into()));
        }
        if n > MAX_TABLE_ORDER {
            return Err(Error::Capacity { what: format!("table order {n}"), limit: MAX_TABLE_ORDER });
        }
        let mut mul = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Input(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for &x in row {
                if x >= n {
                    return Err(Error::Input(format!("entry {x} in row {i} out of range")));
                }
                mul.push(x as u32);
            }
        }
        let at = |a: usize, b: usize| mul[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or_else(|| Error::Input("table has no identity".into()))?;
        let mut inv = vec![0u32; n];
        for g in 0..n {
            let mut seen = vec![false; n];
            for h in 0..n {
                let p = at(g, h);
                if seen[p] {
                    return Err(Error::Input(format!("row {g} is not a permutation")));
                }
                seen[p] = true;
            }
            let h = (0..n).find(|&h| at(g, h) == identity).expect("row is a permutation");
            if at(h, g) != identity {
                return Err(Error::Input(format!("element {g} has no two-sided inverse")));
            }
            inv[g] = h as u32;
        }
        let bad = (0..n).into_par_iter().find_any(|&a| {
            (0..n).any(|b| {
                let ab = at(a, b);
                (0..n).any(|c| at(ab, c) != at(a, at(b, c)))
            })
        });
        if let Some(a) = bad {
            return Err(Error::Input(format!("table is not associative (witness involves {a})")));
        }
        let abelian = (0..n).all(|a| (0..a).all(|b| at(a, b) == at(b, a)));
        Ok(Group { kind: GroupKind::Table { mul, inv, identity }, order: n, abelian })
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    /// The dimension `n` when the group is F_2^n in its native representation.
    pub fn cube_dim(&self) -> Option<usize> {
        match self.kind {
            GroupKind::BooleanCube { n } => Some(n),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GroupKind::BooleanCube { .. } => "f2n",
            GroupKind::Cyclic { .. } => "cyclic",
            GroupKind::Table { .. } => "table",
        }
    }

    #[inline]
    pub fn identity(&self) -> usize {
        match &self.kind {
            GroupKind::Table { identity, .. } => *identity,
            _ => 0,
        }
    }

    /// Unchecked product `g*h`.
    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        match &self.kind {
            GroupKind::BooleanCube { .. } => g ^ h,
            GroupKind::Cyclic { m } => {
                let s = g + h;
                if s >= *m {
                    s - m
                } else {
                    s
                }
            }
            GroupKind::Table { mul, .. } => mul[g * self.order + h] as usize,
        }
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        match &self.kind {
            GroupKind::BooleanCube { .. } => g,
            GroupKind::Cyclic { m } => (m - g) % m,
            GroupKind::Table { inv, .. } => inv[g] as usize,
        }
    }

    /// `g^{-1} h`, the colour of the edge from `g` to `h`.
    #[inline]
    pub fn ldiv(&self, g: usize, h: usize) -> usize {
        self.mul(self.inv(g), h)
    }

    pub fn check_element(&self, g: usize) -> Result<()> {
        if g < self.order {
            Ok(())
        } else {
            Err(Error::Input(format!("element index {g} out of range for order {}", self.order)))
        }
    }

    /// Checked product.
    pub fn multiply(&self, g: usize, h: usize) -> Result<usize> {
        self.check_element(g)?;
        self.check_element(h)?;
        Ok(self.mul(g, h))
    }

    /// Product of a sequence, left to right.
    pub fn product<I: IntoIterator<Item = usize>>(&self, it: I) -> usize {
        it.into_iter().fold(self.identity(), |acc, x| self.mul(acc, x))
    }

    pub fn empty_subset(&self) -> Subset {
        Subset::empty(self.order)
    }

    pub fn subset_of<I: IntoIterator<Item = usize>>(&self, it: I) -> Result<Subset> {
        let mut s = self.empty_subset();
        for g in it {
            self.check_element(g)?;
            s.insert(g);
        }
        Ok(s)
    }

    /// All elements except the identity.
    pub fn nonidentity(&self) -> Subset {
        let mut s = Subset::full(self.order);
        s.remove(self.identity());
        s
    }

    /// The multiplication table as rows.
    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        (0..self.order).map(|a| (0..self.order).map(|b| self.mul(a, b)).collect()).collect()
    }

    /// Re-ingests this group as an explicit table group.
    pub fn to_table(&self) -> Result<Group> {
        Group::from_table(&self.table_rows())
    }

    /// Smallest subgroup containing `s`.
    pub fn span(&self, s: &Subset) -> Subgroup {
        if self.cube_dim().is_some() {
            Subgroup::from_basis(self, XorBasis::from_vectors(s.iter()))
        } else {
            let gens = s.to_vec();
            Subgroup { basis: None, members: self.closure(&gens) }
        }
    }

    pub fn span_of(&self, gens: &[usize]) -> Subgroup {
        self.span(&Subset::from_indices(self.order, gens.iter().copied()))
    }

    fn closure(&self, gens: &[usize]) -> Subset {
        let mut members = self.empty_subset();
        let id = self.identity();
        members.insert(id);
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if members.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        members
    }

    pub fn whole(&self) -> Subgroup {
        match self.cube_dim() {
            Some(n) => Subgroup::from_basis(self, XorBasis::from_vectors((0..n).map(|i| 1 << i))),
            None => Subgroup { basis: None, members: Subset::full(self.order) },
        }
    }

    /// Representatives of the left cosets `gH`, identity first.
    pub fn enumerate_cosets(&self, h: &Subgroup) -> Vec<usize> {
        let mut covered = self.empty_subset();
        let mut reps = Vec::with_capacity(self.order / h.order().max(1));
        let elems = h.elements();
        let id = self.identity();
        for g in std::iter::once(id).chain(0..self.order) {
            if covered.contains(g) {
                continue;
            }
            reps.push(g);
            for &x in &elems {
                covered.insert(self.mul(g, x));
            }
        }
        reps
    }

    /// Left coset `g H` as a subset.
    pub fn coset(&self, g: usize, h: &Subgroup) -> Subset {
        Subset::from_indices(self.order, h.members.iter().map(|x| self.mul(g, x)))
    }

    /// All subgroups of index at most `k`, sorted by order then by elements.
    pub fn subgroups_up_to_index(&self, k: usize) -> Result<Vec<Subgroup>> {
        if self.order > SUBGROUP_ENUM_CAP {
            return Err(Error::Capacity { what: format!("group order {}", self.order), limit: SUBGROUP_ENUM_CAP });
        }
        let min_order = self.order.div_ceil(k.max(1));
        let mut out: Vec<Subgroup> = match &self.kind {
            GroupKind::BooleanCube { n } => cube_subspaces(self, *n, k)?,
            GroupKind::Cyclic { m } => (1..=*m)
                .filter(|d| m % d == 0)
                .map(|d| self.span_of(&[d % m]))
                .filter(|h| h.order() >= min_order)
                .collect(),
            GroupKind::Table { .. } => {
                let mut seen: HashSet<Subset> = HashSet::new();
                let trivial = self.closure(&[]);
                seen.insert(trivial.clone());
                let mut queue = VecDeque::from([trivial]);
                let mut found = Vec::new();
                while let Some(h) = queue.pop_front() {
                    for g in 0..self.order {
                        if h.contains(g) {
                            continue;
                        }
                        let mut gens: Vec<usize> = h.iter().collect();
                        gens.push(g);
                        let bigger = self.closure(&gens);
                        if seen.insert(bigger.clone()) {
                            if seen.len() > SUBGROUP_COUNT_CAP {
                                return Err(Error::Capacity {
                                    what: "subgroup count".into(),
                                    limit: SUBGROUP_COUNT_CAP,
                                });
                            }
                            queue.push_back(bigger);
                        }
                    }
                    found.push(h);
                }
                found
                    .into_iter()
                    .filter(|h| h.len() >= min_order)
                    .map(|members| Subgroup { basis: None, members })
                    .collect()
            }
        };
        out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.elements().cmp(&b.elements())));
        Ok(out)
    }

    /// The subgroup `h` as a group in its own right, with the map from its
    /// element indices back to indices of `self`.
    pub fn restrict(&self, h: &Subgroup) -> (Group, Vec<usize>) {
        match &self.kind {
            GroupKind::BooleanCube { .. } => {
                let basis = h.basis.clone().unwrap_or_else(|| XorBasis::from_vectors(h.members.iter()));
                let local = Group::boolean_cube(basis.dim()).expect("subspace dimension within cap");
                (local, basis.elements())
            }
            GroupKind::Cyclic { m } => {
                let d = m / h.order();
                (Group::cyclic(h.order()).expect("nonzero order"), (0..h.order()).map(|i| i * d).collect())
            }
            GroupKind::Table { .. } => {
                let elems = h.elements();
                let mut local_of = vec![usize::MAX; self.order];
                for (i, &x) in elems.iter().enumerate() {
                    local_of[x] = i;
                }
                let k = elems.len();
                let mul = (0..k * k).map(|ij| local_of[self.mul(elems[ij / k], elems[ij % k])] as u32).collect();
                let inv = elems.iter().map(|&x| local_of[self.inv(x)] as u32).collect();
                let identity = local_of[self.identity()];
                let abelian = self.abelian || elems.iter().all(|&a| elems.iter().all(|&b| self.mul(a, b) == self.mul(b, a)));
                (Group { kind: GroupKind::Table { mul, inv, identity }, order: k, abelian }, elems)
            }
        }
    }

    /// Projects onto `F_2^n / <v>`, which is identified with `F_2^{n-1}` by deleting
    /// the leading bit of `v`.
    pub fn quotient_project(&self, s: &Subset, v: usize) -> Result<Quotient> {
        let n = self
            .cube_dim()
            .ok_or_else(|| Error::Unsupported("quotient projection needs F_2^n".into()))?;
        if v == 0 {
            return Err(Error::Input("cannot quotient by the zero vector".into()));
        }
        self.check_element(v)?;
        let elems = s.to_vec();
        let members: HashSet<usize> = elems.iter().copied().collect();
        if elems.iter().any(|&a| a != v && members.contains(&(a ^ v))) {
            return Err(Error::Precondition(format!("{v} lies in S+S")));
        }
        let pivot = usize::BITS as usize - 1 - v.leading_zeros() as usize;
        let group = Group::boolean_cube(n - 1)?;
        let q = Quotient { group, v, pivot, image: Subset::empty(1 << (n - 1)), preimage: Vec::new() };
        let mut image = q.group.empty_subset();
        let mut preimage = vec![usize::MAX; q.group.order()];
        for &a in &elems {
            let y = q.project(a);
            if !image.insert(y) {
                return Err(Error::Internal("projection not injective despite v outside S+S".into()));
            }
            preimage[y] = a;
        }
        Ok(Quotient { image, preimage, ..q })
    }
}

fn cube_subspaces(g: &Group, n: usize, k: usize) -> Result<Vec<Subgroup>> {
    // Subspaces of codimension c are annihilators of c-dimensional subspaces.
    let max_codim = (usize::BITS - 1 - k.max(1).leading_zeros()) as usize;
    let max_codim = max_codim.min(n);
    let mut duals: HashSet<Vec<usize>> = HashSet::new();
    let mut layer: Vec<XorBasis> = vec![XorBasis::new()];
    duals.insert(Vec::new());
    let mut all = vec![XorBasis::new()];
    for _ in 0..max_codim {
        let mut next = Vec::new();
        for b in &layer {
            for v in 1..1usize << n {
                if b.contains(v) {
                    continue;
                }
                let mut nb = b.clone();
                nb.insert(v);
                if duals.insert(nb.vectors().to_vec()) {
                    if duals.len() > SUBGROUP_COUNT_CAP {
                        return Err(Error::Capacity { what: "subgroup count".into(), limit: SUBGROUP_COUNT_CAP });
                    }
                    next.push(nb);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    Ok(all.iter().map(|d| annihilator(g, n, d)).collect())
}

fn annihilator(g: &Group, n: usize, dual: &XorBasis) -> Subgroup {
    let mut basis = XorBasis::new();
    for x in 0..1usize << n {
        if dual.vectors().iter().all(|&w| (w & x).count_ones() % 2 == 0) {
            basis.insert(x);
            if basis.dim() == n - dual.dim() {
                break;
            }
        }
    }
    Subgroup::from_basis(g, basis)
}

/// A subgroup: a basis for F_2^n, otherwise just its member set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    basis: Option<XorBasis>,
    members: Subset,
}

impl Subgroup {
    pub fn from_basis(g: &Group, basis: XorBasis) -> Subgroup {
        let members = Subset::from_indices(g.order(), basis.elements());
        Subgroup { basis: Some(basis), members }
    }

    /// Wraps a member set that the caller knows is a subgroup.
    pub fn from_members(g: &Group, members: Subset) -> Result<Subgroup> {
        let id = g.identity();
        if !members.contains(id) {
            return Err(Error::Contract("subgroup must contain the identity".into()));
        }
        for a in members.iter() {
            if !members.contains(g.inv(a)) || members.iter().any(|b| !members.contains(g.mul(a, b))) {
                return Err(Error::Contract("member set is not closed".into()));
            }
        }
        if g.cube_dim().is_some() {
            return Ok(Subgroup::from_basis(g, XorBasis::from_vectors(members.iter())));
        }
        Ok(Subgroup { basis: None, members })
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn basis(&self) -> Option<&XorBasis> {
        self.basis.as_ref()
    }

    pub fn members(&self) -> &Subset {
        &self.members
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.contains(g)
    }

    pub fn elements(&self) -> Vec<usize> {
        self.members.to_vec()
    }

    pub fn index_in(&self, g: &Group) -> usize {
        g.order() / self.order()
    }
}

/// The result of projecting a subset of F_2^n to `F_2^n / <v>`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: Group,
    pub v: usize,
    pivot: usize,
    /// `pi(S)`.
    pub image: Subset,
    /// For each quotient element in the image, its unique preimage in `S`.
    pub preimage: Vec<usize>,
}

impl Quotient {
    pub fn project(&self, x: usize) -> usize {
        let x = if x >> self.pivot & 1 == 1 { x ^ self.v } else { x };
        let low = x & ((1 << self.pivot) - 1);
        let high = x >> (self.pivot + 1);
        low | high << self.pivot
    }

    /// Coset representative with a zero in the deleted coordinate.
    pub fn lift(&self, y: usize) -> usize {
        let low = y & ((1 << self.pivot) - 1);
        let high = y >> self.pivot;
        low | high << (self.pivot + 1)
    }

    /// Lifts an ordering of `pi(S)` back to an ordering of `S`.
    pub fn lift_ordering(&self, ord: &[usize]) -> Result<Vec<usize>> {
        ord.iter()
            .map(|&y| match self.preimage.get(y) {
                Some(&a) if a != usize::MAX => Ok(a),
                _ => Err(Error::Contract(format!("{y} is not in the projected set"))),
            })
            .collect()
    }
}

/// Small named groups, built as tables.
pub mod named {
    use super::*;

    /// The symmetric group on `k` points. Permutations are listed lexicographically
    /// (identity first) and `a*b` applies `a` first, then `b`.
    pub fn symmetric(k: usize) -> Result<Group> {
        if k > 6 {
            return Err(Error::Capacity { what: format!("S_{k}"), limit: 6 });
        }
        let perms: Vec<Vec<usize>> = itertools::Itertools::permutations(0..k, k).collect();
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let rows = perms
            .iter()
            .map(|a| perms.iter().map(|b| index(&a.iter().map(|&i| b[i]).collect())).collect())
            .collect::<Vec<Vec<usize>>>();
        Group::from_table(&rows)
    }

    /// Dihedral group of order `2m`; index `i + m*j` is `r^i s^j`.
    pub fn dihedral(m: usize) -> Result<Group> {
        if m == 0 {
            return Err(Error::Input("dihedral group needs m >= 1".into()));
        }
        let n = 2 * m;
        let rows = (0..n)
            .map(|x| {
                let (i, a) = (x % m, x / m);
                (0..n)
                    .map(|y| {
                        let (k, b) = (y % m, y / m);
                        let r = if a == 0 { (i + k) % m } else { (i + m - k) % m };
                        r + m * ((a + b) % 2)
                    })
                    .collect()
            })
            .collect::<Vec<Vec<usize>>>();
        Group::from_table(&rows)
    }

    /// Quaternion group: indices `0..8` are `1, i, j, k, -1, -i, -j, -k`.
    pub fn quaternion() -> Result<Group> {
        // unit product table on 1,i,j,k as (sign, unit)
        const T: [[(bool, usize); 4]; 4] = [
            [(false, 0), (false, 1), (false, 2), (false, 3)],
            [(false, 1), (true, 0), (false, 3), (true, 2)],
            [(false, 2), (true, 3), (true, 0), (false, 1)],
            [(false, 3), (false, 2), (true, 1), (true, 0)],
        ];
        let rows = (0..8)
            .map(|x| {
                (0..8)
                    .map(|y| {
                        let (neg, u) = T[x % 4][y % 4];
                        let sign = neg ^ (x >= 4) ^ (y >= 4);
                        u + if sign { 4 } else { 0 }
                    })
                    .collect()
            })
            .collect::<Vec<Vec<usize>>>();
        Group::from_table(&rows)
    }

    /// Direct product; index `(a, b)` is `a * |B| + b`.
    pub fn direct_product(a: &Group, b: &Group) -> Result<Group> {
        let (na, nb) = (a.order(), b.order());
        if na * nb > MAX_TABLE_ORDER {
            return Err(Error::Capacity { what: format!("product order {}", na * nb), limit: MAX_TABLE_ORDER });
        }
        let rows = (0..na * nb)
            .map(|x| (0..na * nb).map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb)).collect())
            .collect::<Vec<Vec<usize>>>();
        Group::from_table(&rows)
    }

    /// Product of cyclic groups of the given orders, as a table.
    pub fn abelian(orders: &[usize]) -> Result<Group> {
        let mut g = Group::cyclic(1)?.to_table()?;
        for &m in orders {
            g = direct_product(&g, &Group::cyclic(m)?)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    #[test]
    fn cube_multiply_is_xor() {
        let g = Group::boolean_cube(3).unwrap();
        assert_eq!(g.multiply(0b011, 0b101).unwrap(), 0b110);
        assert!(g.multiply(8, 1).is_err());
    }

    #[test]
    fn identity_law_everywhere() {
        for g in [Group::cyclic(7).unwrap(), symmetric(3).unwrap(), quaternion().unwrap()] {
            for x in 0..g.order() {
                assert_eq!(g.mul(x, g.identity()), x);
                assert_eq!(g.mul(g.identity(), x), x);
                assert_eq!(g.mul(x, g.inv(x)), g.identity());
            }
        }
    }

    #[test]
    fn s3_transpositions_compose_to_three_cycle() {
        let g = symmetric(3).unwrap();
        let perms: Vec<Vec<usize>> = itertools::Itertools::permutations(0..3, 3).collect();
        // oracle: apply a then b
        for (ia, a) in perms.iter().enumerate() {
            for (ib, b) in perms.iter().enumerate() {
                let c: Vec<usize> = a.iter().map(|&i| b[i]).collect();
                assert_eq!(perms[g.mul(ia, ib)], c);
            }
        }
        let t1 = perms.iter().position(|p| p == &vec![1, 0, 2]).unwrap();
        let t2 = perms.iter().position(|p| p == &vec![0, 2, 1]).unwrap();
        let prod = &perms[g.mul(t1, t2)];
        assert!(prod.iter().enumerate().all(|(i, &x)| i != x), "product of transpositions is a 3-cycle");
        assert!(!g.is_abelian());
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(Group::from_table(&[vec![0, 1], vec![0, 1]]).is_err());
        assert!(Group::from_table(&[vec![0, 1], vec![1, 2]]).is_err());
        // a Latin square with identity that is not associative
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(Group::from_table(&rows).is_err());
    }

    #[test]
    fn spans() {
        let g = Group::boolean_cube(3).unwrap();
        let h = g.span_of(&[0b011, 0b101]);
        assert_eq!(h.elements(), vec![0, 0b011, 0b101, 0b110]);
        assert_eq!(g.span(&g.empty_subset()).elements(), vec![0]);
        let s3 = symmetric(3).unwrap();
        let t = 1; // lexicographic index 1 is (0 2 1), a transposition
        assert_eq!(s3.span_of(&[t]).order(), 2);
    }

    #[test]
    fn cosets_partition() {
        let g = Group::boolean_cube(3).unwrap();
        assert_eq!(g.enumerate_cosets(&g.whole()), vec![0]);
        let h = g.span_of(&[1]);
        assert_eq!(g.enumerate_cosets(&h).len(), 4);
        let s3 = symmetric(3).unwrap();
        let rot = s3.subgroups_up_to_index(2).unwrap().into_iter().find(|h| h.order() == 3).unwrap();
        let reps = s3.enumerate_cosets(&rot);
        assert_eq!(reps.len(), 2);
        assert_eq!(reps[0], s3.identity());
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(Group::boolean_cube(2).unwrap().subgroups_up_to_index(4).unwrap().len(), 5);
        assert_eq!(Group::cyclic(6).unwrap().subgroups_up_to_index(6).unwrap().len(), 4);
        assert_eq!(symmetric(3).unwrap().subgroups_up_to_index(6).unwrap().len(), 6);
        assert_eq!(Group::cyclic(6).unwrap().to_table().unwrap().subgroups_up_to_index(6).unwrap().len(), 4);
        assert_eq!(Group::boolean_cube(3).unwrap().subgroups_up_to_index(8).unwrap().len(), 16);
        assert_eq!(quaternion().unwrap().subgroups_up_to_index(8).unwrap().len(), 6);
        assert_eq!(dihedral(4).unwrap().subgroups_up_to_index(8).unwrap().len(), 10);
    }

    #[test]
    fn quotient_drops_leading_coordinate() {
        let g = Group::boolean_cube(3).unwrap();
        let s = g.subset_of([0b001, 0b010]).unwrap();
        let q = g.quotient_project(&s, 0b100).unwrap();
        assert_eq!(q.image.to_vec(), vec![0b01, 0b10]);
        let single = g.subset_of([0b001]).unwrap();
        assert_eq!(g.quotient_project(&single, 0b111).unwrap().image.len(), 1);
        assert!(matches!(g.quotient_project(&s, 0b011), Err(Error::Precondition(_))));
        assert!(matches!(g.quotient_project(&s, 0), Err(Error::Input(_))));
    }

    #[test]
    fn restriction_is_a_homomorphic_copy() {
        for g in [Group::boolean_cube(4).unwrap(), Group::cyclic(12).unwrap(), dihedral(4).unwrap()] {
            for h in g.subgroups_up_to_index(4).unwrap() {
                let (local, map) = g.restrict(&h);
                assert_eq!(local.order(), h.order());
                assert_eq!(map[local.identity()], g.identity());
                for a in 0..local.order() {
                    assert!(h.contains(map[a]));
                    for b in 0..local.order() {
                        assert_eq!(map[local.mul(a, b)], g.mul(map[a], map[b]));
                    }
                }
            }
        }
    }

    #[test]
    fn named_groups_have_expected_shape() {
        assert_eq!(symmetric(3).unwrap().order(), 6);
        let d4 = dihedral(4).unwrap();
        assert!(!d4.is_abelian());
        assert!(!quaternion().unwrap().is_abelian());
        let z2z4 = abelian(&[2, 4]).unwrap();
        assert_eq!(z2z4.order(), 8);
        assert!(z2z4.is_abelian());
    }
}
