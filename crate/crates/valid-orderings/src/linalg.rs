//! Linear algebra over F_2 on bit-packed vectors.

/// A fully reduced basis: every vector has a distinct leading bit, and that bit
/// is clear in all other basis vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct XorBasis {
    vecs: Vec<usize>,
}

#[inline]
fn lead(v: usize) -> usize {
    usize::BITS as usize - 1 - v.leading_zeros() as usize
}

impl XorBasis {
    pub fn new() -> Self {
        XorBasis { vecs: Vec::new() }
    }

    pub fn from_vectors<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut b = XorBasis::new();
        for v in it {
            b.insert(v);
        }
        b
    }

    pub fn dim(&self) -> usize {
        self.vecs.len()
    }

    /// Basis vectors sorted by decreasing leading bit.
    pub fn vectors(&self) -> &[usize] {
        &self.vecs
    }

    pub fn reduce(&self, mut v: usize) -> usize {
        for &b in &self.vecs {
            if v >> lead(b) & 1 == 1 {
                v ^= b;
            }
        }
        v
    }

    pub fn contains(&self, v: usize) -> bool {
        self.reduce(v) == 0
    }

    /// Adds `v` to the span; returns false if it was already there.
    pub fn insert(&mut self, v: usize) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let p = lead(r);
        for b in self.vecs.iter_mut() {
            if *b >> p & 1 == 1 {
                *b ^= r;
            }
        }
        let pos = self.vecs.iter().position(|&b| lead(b) < p).unwrap_or(self.vecs.len());
        self.vecs.insert(pos, r);
        true
    }

    /// Coordinates of a span member with respect to the basis, as a bitmask.
    pub fn coords(&self, x: usize) -> usize {
        let mut c = 0;
        for (i, &b) in self.vecs.iter().enumerate() {
            if x >> lead(b) & 1 == 1 {
                c |= 1 << i;
            }
        }
        c
    }

    pub fn from_coords(&self, c: usize) -> usize {
        let mut x = 0;
        for (i, &b) in self.vecs.iter().enumerate() {
            if c >> i & 1 == 1 {
                x ^= b;
            }
        }
        x
    }

    /// All `2^dim` elements of the span, in coordinate order.
    pub fn elements(&self) -> Vec<usize> {
        (0..1usize << self.dim()).map(|c| self.from_coords(c)).collect()
    }

    /// Dimension of the intersection of two spans.
    pub fn intersection_dim(&self, other: &XorBasis) -> usize {
        let mut sum = self.clone();
        for &v in &other.vecs {
            sum.insert(v);
        }
        self.dim() + other.dim() - sum.dim()
    }
}

pub fn rank<I: IntoIterator<Item = usize>>(it: I) -> usize {
    XorBasis::from_vectors(it).dim()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_of_two_vectors() {
        let b = XorBasis::from_vectors([0b011, 0b101]);
        let mut e = b.elements();
        e.sort();
        assert_eq!(e, vec![0b000, 0b011, 0b101, 0b110]);
        for x in e {
            assert_eq!(b.from_coords(b.coords(x)), x);
        }
    }

    #[test]
    fn dependent_vectors_do_not_grow() {
        let mut b = XorBasis::from_vectors([1, 2]);
        assert!(!b.insert(3));
        assert!(b.insert(4));
        assert_eq!(b.dim(), 3);
    }

    #[test]
    fn intersection_dimension() {
        let a = XorBasis::from_vectors([0b0001, 0b0010]);
        let b = XorBasis::from_vectors([0b0011, 0b0100]);
        assert_eq!(a.intersection_dim(&b), 1);
    }
}
