use std::fmt;

use crate::field::{Field, FieldElement};

/// Largest supported matrix rank.
pub const MAX_RANK: usize = 5;
const SLOTS: usize = MAX_RANK * MAX_RANK;

/// An invertible `n x n` matrix over `F_q`, stored row-major.
///
/// Constructors that accept arbitrary entries check the determinant; the
/// arithmetic below preserves invertibility.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    n: u8,
    e: [u16; SLOTS],
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.rank();
        write!(f, "[")?;
        for i in 0..n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.e[i * n + j])?;
            }
        }
        write!(f, "]")
    }
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        assert!((1..=MAX_RANK).contains(&n), "rank {n} outside 1..={MAX_RANK}");
        let mut e = [0u16; SLOTS];
        for i in 0..n {
            e[i * n + i] = 1;
        }
        GroupElement { n: n as u8, e }
    }

    /// Builds a matrix without checking invertibility.
    pub(crate) fn from_entries_unchecked(n: usize, entries: &[FieldElement]) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        let mut e = [0u16; SLOTS];
        for (slot, x) in e.iter_mut().zip(entries) {
            *slot = x.0;
        }
        GroupElement { n: n as u8, e }
    }

    /// Row-major entries; `None` if the matrix is singular.
    pub fn from_entries(field: &Field, n: usize, entries: &[FieldElement]) -> Option<Self> {
        if !(1..=MAX_RANK).contains(&n) || entries.len() != n * n {
            return None;
        }
        let g = Self::from_entries_unchecked(n, entries);
        (!g.determinant(field).is_zero()).then_some(g)
    }

    /// Convenience constructor from small integers, reduced into the prime field.
    pub fn from_ints(field: &Field, rows: &[&[i64]]) -> Option<Self> {
        let n = rows.len();
        let entries: Vec<FieldElement> = rows.iter().flat_map(|r| r.iter().map(|&x| field.from_int(x))).collect();
        Self::from_entries(field, n, &entries)
    }

    pub fn diagonal(field: &Field, diag: &[FieldElement]) -> Option<Self> {
        let n = diag.len();
        let mut entries = vec![FieldElement::ZERO; n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = d;
        }
        Self::from_entries(field, n, &entries)
    }

    pub fn scalar(n: usize, z: FieldElement) -> Self {
        assert!(!z.is_zero(), "scalar matrix needs a unit");
        let mut g = Self::identity(n);
        for i in 0..n {
            g.e[i * n + i] = z.0;
        }
        g
    }

    /// Permutation matrix with `g[i][perm[i]] = 1`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut e = [0u16; SLOTS];
        for (i, &j) in perm.iter().enumerate() {
            e[i * n + j] = 1;
        }
        GroupElement { n: n as u8, e }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        FieldElement(self.e[i * self.rank() + j])
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        let n = self.rank();
        self.e[i * n + j] = x.0;
    }

    pub fn entries(&self) -> Vec<FieldElement> {
        self.e[..self.rank() * self.rank()].iter().map(|&x| FieldElement(x)).collect()
    }

    /// Perfect hash: entries read as base-`q` digits.
    #[inline]
    pub fn key(&self, q: u32) -> u64 {
        let n2 = self.rank() * self.rank();
        self.e[..n2].iter().rev().fold(0u64, |acc, &x| acc * q as u64 + x as u64)
    }

    pub fn mul(&self, field: &Field, other: &GroupElement) -> GroupElement {
        let n = self.rank();
        debug_assert_eq!(n, other.rank());
        let mut out = GroupElement { n: self.n, e: [0; SLOTS] };
        for i in 0..n {
            for j in 0..n {
                let mut acc = FieldElement::ZERO;
                for k in 0..n {
                    let a = FieldElement(self.e[i * n + k]);
                    if a.is_zero() {
                        continue;
                    }
                    acc = field.add(acc, field.mul(a, FieldElement(other.e[k * n + j])));
                }
                out.e[i * n + j] = acc.0;
            }
        }
        out
    }

    pub fn transpose(&self) -> GroupElement {
        let n = self.rank();
        let mut out = *self;
        for i in 0..n {
            for j in 0..n {
                out.e[i * n + j] = self.e[j * n + i];
            }
        }
        out
    }

    pub fn inverse(&self, field: &Field) -> GroupElement {
        let n = self.rank();
        let mut a = *self;
        let mut inv = GroupElement::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero()).expect("group elements are invertible");
            if pivot != col {
                for j in 0..n {
                    a.e.swap(pivot * n + j, col * n + j);
                    inv.e.swap(pivot * n + j, col * n + j);
                }
            }
            let s = field.inv(a.get(col, col)).unwrap();
            for j in 0..n {
                a.set(col, j, field.mul(s, a.get(col, j)));
                inv.set(col, j, field.mul(s, inv.get(col, j)));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, field.sub(a.get(r, j), field.mul(f, a.get(col, j))));
                    inv.set(r, j, field.sub(inv.get(r, j), field.mul(f, inv.get(col, j))));
                }
            }
        }
        inv
    }

    pub fn determinant(&self, field: &Field) -> FieldElement {
        let n = self.rank();
        let mut a = *self;
        let mut det = FieldElement::ONE;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return FieldElement::ZERO;
            };
            if pivot != col {
                for j in 0..n {
                    a.e.swap(pivot * n + j, col * n + j);
                }
                det = field.neg(det);
            }
            let d = a.get(col, col);
            det = field.mul(det, d);
            let s = field.inv(d).unwrap();
            for r in col + 1..n {
                let f = field.mul(a.get(r, col), s);
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    a.set(r, j, field.sub(a.get(r, j), field.mul(f, a.get(col, j))));
                }
            }
        }
        det
    }

    pub fn pow(&self, field: &Field, e: usize) -> GroupElement {
        (0..e).fold(GroupElement::identity(self.rank()), |acc, _| acc.mul(field, self))
    }

    pub fn is_identity(&self) -> bool {
        *self == GroupElement::identity(self.rank())
    }

    /// Upper unitriangular.
    pub fn is_unipotent_upper(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let x = self.e[i * n + j];
                if i == j {
                    x == 1
                } else if i > j {
                    x == 0
                } else {
                    true
                }
            })
        })
    }

    pub fn is_upper_triangular(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| (0..i).all(|j| self.e[i * n + j] == 0))
    }

    /// Last row equal to `(0, ..., 0, 1)`.
    pub fn is_mirabolic(&self) -> bool {
        let n = self.rank();
        (0..n - 1).all(|j| self.e[(n - 1) * n + j] == 0) && self.e[n * n - 1] == 1
    }

    /// Last row of the form `(0, ..., 0, *)`: the parabolic of type `(n-1, 1)`.
    pub fn in_parabolic_q(&self) -> bool {
        let n = self.rank();
        (0..n - 1).all(|j| self.e[(n - 1) * n + j] == 0)
    }

    pub fn is_scalar(&self) -> bool {
        let n = self.rank();
        let d = self.e[0];
        (0..n).all(|i| (0..n).all(|j| self.e[i * n + j] == if i == j { d } else { 0 }))
    }

    /// Block diagonal `diag(a, b)`.
    pub fn block_diag(a: &GroupElement, b: &GroupElement) -> GroupElement {
        let (ra, rb) = (a.rank(), b.rank());
        let n = ra + rb;
        assert!(n <= MAX_RANK);
        let mut out = GroupElement { n: n as u8, e: [0; SLOTS] };
        for i in 0..ra {
            for j in 0..ra {
                out.e[i * n + j] = a.e[i * ra + j];
            }
        }
        for i in 0..rb {
            for j in 0..rb {
                out.e[(ra + i) * n + ra + j] = b.e[i * rb + j];
            }
        }
        out
    }

    /// The top-left `r x r` block, if it is invertible.
    pub fn top_left(&self, field: &Field, r: usize) -> Option<GroupElement> {
        let entries: Vec<FieldElement> =
            (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        GroupElement::from_entries(field, r, &entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn inverse_and_determinant() {
        let f = make_field(3, 1).unwrap();
        let g = GroupElement::from_ints(&f, &[&[1, 2, 0], &[0, 1, 1], &[2, 0, 1]]).unwrap();
        let gi = g.inverse(&f);
        assert!(g.mul(&f, &gi).is_identity());
        assert!(gi.mul(&f, &g).is_identity());
        assert!(GroupElement::from_ints(&f, &[&[1, 1], &[1, 1]]).is_none());
    }

    #[test]
    fn keys_are_injective_on_small_matrices() {
        let f = make_field(2, 1).unwrap();
        let a = GroupElement::from_ints(&f, &[&[0, 1], &[1, 0]]).unwrap();
        let b = GroupElement::from_ints(&f, &[&[1, 1], &[0, 1]]).unwrap();
        assert_ne!(a.key(2), b.key(2));
        assert_eq!(GroupElement::identity(2).key(2), 1 + 8);
    }

    #[test]
    fn block_structure() {
        let f = make_field(5, 1).unwrap();
        let a = GroupElement::from_ints(&f, &[&[2]]).unwrap();
        let b = GroupElement::from_ints(&f, &[&[0, 1], &[1, 0]]).unwrap();
        let d = GroupElement::block_diag(&a, &b);
        assert_eq!(d.rank(), 3);
        assert_eq!(d.get(0, 0), f.element(2));
        assert_eq!(d.get(1, 2), f.element(1));
        assert_eq!(d.top_left(&f, 1), Some(a));
    }
}
