//! `G_n = GL_n(F_q)` with its standard subgroups, the Weyl elements used by
//! the zeta integrals, coset indexing for `U_n \ G_n`, and the height and
//! refined-cover decompositions.

mod cosets;
mod decomposition;
mod element;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{canonical_psi, AdditiveCharacter, Field, FieldElement};

pub use cosets::{canonical_coset, CosetIndex};
pub use decomposition::{height, height_cells_by_enumeration, refined_cover_check, CoverReport};
pub use element::{GroupElement, MAX_RANK};

/// Full element lists are only built for groups up to this order.
pub const ENUMERATION_BOUND: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("rank {rank} outside the supported range 1..={MAX_RANK}")]
    RankOutOfRange { rank: usize },
    #[error("index {r} must satisfy 1 <= r < n = {n}")]
    BlockOutOfRange { r: usize, n: usize },
    #[error("|G| = {order} exceeds the enumeration bound {ENUMERATION_BOUND}")]
    NotEnumerated { order: u64 },
    #[error("matrix entries do not fit a 64-bit perfect hash")]
    KeyOverflow,
    #[error("element is not upper unitriangular")]
    NotUnipotent,
}

struct GroupData {
    n: usize,
    field: Field,
    order: u64,
    cosets: CosetIndex,
    elements: Option<Vec<GroupElement>>,
    element_index: HashMap<u64, u32>,
}

/// `G_n` over a field, with a choice of additive character.
///
/// Cloning is cheap; [`GroupContext::with_conjugate_psi`] shares all the
/// enumerated data and only flips the character.
#[derive(Clone)]
pub struct GroupContext {
    data: Arc<GroupData>,
    psi: AdditiveCharacter,
}

impl std::fmt::Debug for GroupContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "GL_{}(F_{}){}",
            self.data.n,
            self.data.field.order(),
            if self.psi.is_conjugated() { " [psi^-1]" } else { "" }
        )
    }
}

/// `prod_{i<n} (q^n - q^i)`.
pub fn gl_order(n: usize, q: u64) -> u64 {
    (0..n as u32).map(|i| q.pow(n as u32) - q.pow(i)).product()
}

pub fn unipotent_order(n: usize, q: u64) -> u64 {
    q.pow((n * (n - 1) / 2) as u32)
}

impl GroupContext {
    /// Builds `G_n` with the canonical trace character. Elements are
    /// enumerated when `|G_n|` is within [`ENUMERATION_BOUND`].
    pub fn new(field: &Field, n: usize) -> Result<Self, GroupError> {
        if !(1..=MAX_RANK).contains(&n) {
            return Err(GroupError::RankOutOfRange { rank: n });
        }
        let q = field.order() as u64;
        if (q as f64).powi((n * n) as i32) >= u64::MAX as f64 {
            return Err(GroupError::KeyOverflow);
        }
        let order = gl_order(n, q);
        let cosets = CosetIndex::build(field, n);
        let elements = (order <= ENUMERATION_BOUND).then(|| enumerate_gl(field, n));
        let element_index = elements.iter().flatten().enumerate().map(|(i, g)| (g.key(q as u32), i as u32)).collect();
        Ok(GroupContext {
            data: Arc::new(GroupData { n, field: field.clone(), order, cosets, elements, element_index }),
            psi: canonical_psi(field),
        })
    }

    /// Same group, character `psi^-1`.
    pub fn with_conjugate_psi(&self) -> Self {
        GroupContext { data: Arc::clone(&self.data), psi: self.psi.conjugate() }
    }

    pub fn rank(&self) -> usize {
        self.data.n
    }

    pub fn field(&self) -> &Field {
        &self.data.field
    }

    pub fn q(&self) -> u32 {
        self.data.field.order()
    }

    pub fn psi(&self) -> &AdditiveCharacter {
        &self.psi
    }

    pub fn order(&self) -> u64 {
        self.data.order
    }

    pub fn unipotent_order(&self) -> u64 {
        unipotent_order(self.rank(), self.q() as u64)
    }

    pub fn cosets(&self) -> &CosetIndex {
        &self.data.cosets
    }

    pub fn elements(&self) -> Result<&[GroupElement], GroupError> {
        self.data.elements.as_deref().ok_or(GroupError::NotEnumerated { order: self.data.order })
    }

    pub fn element_id(&self, g: &GroupElement) -> Option<usize> {
        self.data.element_index.get(&g.key(self.q())).map(|&i| i as usize)
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        a.mul(self.field(), b)
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        g.inverse(self.field())
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.rank())
    }

    /// `psi(x)` for the context's character.
    #[inline]
    pub fn psi_value(&self, x: FieldElement) -> Complex64 {
        self.psi.value(x)
    }

    /// Sum of the superdiagonal of `u`, without checking that `u` is unipotent.
    pub fn superdiagonal_sum(&self, u: &GroupElement) -> FieldElement {
        (0..self.rank().saturating_sub(1)).fold(FieldElement::ZERO, |acc, i| self.field().add(acc, u.get(i, i + 1)))
    }

    /// `psi_n(u) = psi(sum_i u_{i,i+1})` on upper unitriangular `u`.
    pub fn psi_n(&self, u: &GroupElement) -> Result<Complex64, GroupError> {
        if !u.is_unipotent_upper() {
            return Err(GroupError::NotUnipotent);
        }
        Ok(self.psi_value(self.superdiagonal_sum(u)))
    }

    /// `(coset index, s)` with `g = u c_index` and `psi_n(u) = psi(s)`.
    #[inline]
    pub fn locate(&self, g: &GroupElement) -> (usize, FieldElement) {
        self.data.cosets.locate(self.field(), g)
    }

    /// `alpha = (0 I_{n-1}; 1 0)`.
    pub fn alpha(&self) -> GroupElement {
        let n = self.rank();
        let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        GroupElement::permutation(&perm)
    }

    /// `w_n`: ones on the antidiagonal.
    pub fn weyl_longest(&self) -> GroupElement {
        antidiagonal(self.rank())
    }

    /// `w_{n,r} = diag(I_r, w_{n-r})`.
    pub fn w_nr(&self, r: usize) -> Result<GroupElement, GroupError> {
        let n = self.rank();
        if r == 0 || r >= n {
            return Err(GroupError::BlockOutOfRange { r, n });
        }
        Ok(GroupElement::block_diag(&GroupElement::identity(r), &antidiagonal(n - r)))
    }

    /// All of `U_n`, generated directly from superdiagonal-block entries.
    pub fn unipotent_elements(&self) -> Vec<GroupElement> {
        let n = self.rank();
        let q = self.q() as u64;
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let total = q.pow(slots.len() as u32);
        (0..total)
            .map(|mut code| {
                let mut u = self.identity();
                for &(i, j) in &slots {
                    u.set(i, j, self.field().element((code % q) as u32));
                    code /= q;
                }
                u
            })
            .collect()
    }

    /// Elements of `U_n` of the form `x_{i,i+1}(b)` with `b` running through an
    /// `F_p`-basis of `F_q`; they generate `U_n`.
    pub fn unipotent_generators(&self) -> Vec<GroupElement> {
        let n = self.rank();
        let f = self.field();
        let basis: Vec<FieldElement> = (0..f.degree()).map(|t| f.element(f.characteristic().pow(t))).collect();
        let mut out = Vec::new();
        for i in 0..n.saturating_sub(1) {
            for &b in &basis {
                let mut u = self.identity();
                u.set(i, i + 1, b);
                out.push(u);
            }
        }
        out
    }

    /// The unipotent radical of the standard parabolic of type `(a, n - a)`.
    pub fn radical_elements(&self, a: usize) -> Result<Vec<GroupElement>, GroupError> {
        let n = self.rank();
        if a == 0 || a >= n {
            return Err(GroupError::BlockOutOfRange { r: a, n });
        }
        let q = self.q() as u64;
        let slots: Vec<(usize, usize)> = (0..a).flat_map(|i| (a..n).map(move |j| (i, j))).collect();
        let total = q.pow(slots.len() as u32);
        Ok((0..total)
            .map(|mut code| {
                let mut v = self.identity();
                for &(i, j) in &slots {
                    v.set(i, j, self.field().element((code % q) as u32));
                    code /= q;
                }
                v
            })
            .collect())
    }

    /// Scalar matrices `z I`, indexed by the units of the field in order.
    pub fn center_elements(&self) -> Vec<GroupElement> {
        self.field().units().map(|z| GroupElement::scalar(self.rank(), z)).collect()
    }

    fn filter(&self, pred: impl Fn(&GroupElement) -> bool) -> Result<Vec<GroupElement>, GroupError> {
        Ok(self.elements()?.iter().copied().filter(|g| pred(g)).collect())
    }

    pub fn borel_elements(&self) -> Result<Vec<GroupElement>, GroupError> {
        self.filter(GroupElement::is_upper_triangular)
    }

    pub fn mirabolic_elements(&self) -> Result<Vec<GroupElement>, GroupError> {
        self.filter(GroupElement::is_mirabolic)
    }

    pub fn parabolic_q_elements(&self) -> Result<Vec<GroupElement>, GroupError> {
        self.filter(GroupElement::in_parabolic_q)
    }

    /// `U_r \ G_r` for `1 <= r <= n`, over the same field.
    pub fn coset_reps(&self, r: usize) -> Result<CosetIndex, GroupError> {
        if r == 0 || r > self.rank() {
            return Err(GroupError::BlockOutOfRange { r, n: self.rank() + 1 });
        }
        if r == self.rank() {
            return Ok(self.data.cosets.clone());
        }
        Ok(CosetIndex::build(self.field(), r))
    }

    /// Draws a uniformly random element by rejection.
    pub fn random_element<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let n = self.rank();
        let q = self.q();
        loop {
            let entries: Vec<FieldElement> = (0..n * n).map(|_| self.field().element(rng.gen_range(0..q))).collect();
            if let Some(g) = GroupElement::from_entries(self.field(), n, &entries) {
                return g;
            }
        }
    }

    /// Uniformly random element of `U_n`.
    pub fn random_unipotent<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let n = self.rank();
        let mut u = self.identity();
        for i in 0..n {
            for j in i + 1..n {
                u.set(i, j, self.field().element(rng.gen_range(0..self.q())));
            }
        }
        u
    }
}

fn antidiagonal(n: usize) -> GroupElement {
    let perm: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
    GroupElement::permutation(&perm)
}

/// Row-by-row enumeration: each new row avoids the span of the previous ones.
fn enumerate_gl(field: &Field, n: usize) -> Vec<GroupElement> {
    let q = field.order() as u64;
    let vectors: Vec<Vec<FieldElement>> = (0..q.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let x = field.element((code % q) as u32);
                    code /= q;
                    x
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(gl_order(n, q) as usize);
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    fn rec(
        field: &Field,
        n: usize,
        vectors: &[Vec<FieldElement>],
        echelon: &mut Vec<(usize, Vec<FieldElement>)>,
        chosen: &mut Vec<usize>,
        out: &mut Vec<GroupElement>,
    ) {
        if chosen.len() == n {
            let entries: Vec<FieldElement> = chosen.iter().flat_map(|&i| vectors[i].iter().copied()).collect();
            out.push(GroupElement::from_entries_unchecked(n, &entries));
            return;
        }
        for (vi, v) in vectors.iter().enumerate() {
            let mut r = v.clone();
            for (pc, row) in echelon.iter() {
                let x = r[*pc];
                if !x.is_zero() {
                    for c in 0..n {
                        r[c] = field.sub(r[c], field.mul(x, row[c]));
                    }
                }
            }
            let Some(pc) = r.iter().position(|x| !x.is_zero()) else { continue };
            let s = field.inv(r[pc]).unwrap();
            let r: Vec<FieldElement> = r.iter().map(|&x| field.mul(s, x)).collect();
            echelon.push((pc, r));
            chosen.push(vi);
            rec(field, n, vectors, echelon, chosen, out);
            chosen.pop();
            echelon.pop();
        }
    }
    rec(field, n, &vectors, &mut Vec::new(), &mut chosen, &mut out);
    let qq = field.order();
    out.sort_by_key(|g| g.key(qq));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, root_of_unity};

    #[test]
    fn orders_match_enumeration() {
        for (n, p) in [(1, 3), (2, 2), (2, 3), (3, 2)] {
            let f = make_field(p, 1).unwrap();
            let ctx = GroupContext::new(&f, n).unwrap();
            assert_eq!(ctx.elements().unwrap().len() as u64, ctx.order());
            assert_eq!(ctx.unipotent_elements().len() as u64, ctx.unipotent_order());
        }
    }

    #[test]
    fn psi_n_examples() {
        let f3 = make_field(3, 1).unwrap();
        let ctx = GroupContext::new(&f3, 3).unwrap();
        assert!((ctx.psi_n(&ctx.identity()).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let u = GroupElement::from_ints(&f3, &[&[1, 1, 2], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert!((ctx.psi_n(&u).unwrap() - root_of_unity(1, 3)).norm() < 1e-12);
        assert_eq!(ctx.psi_n(&ctx.alpha()), Err(GroupError::NotUnipotent));

        let f2 = make_field(2, 1).unwrap();
        let ctx2 = GroupContext::new(&f2, 2).unwrap();
        let u = GroupElement::from_ints(&f2, &[&[1, 1], &[0, 1]]).unwrap();
        assert!((ctx2.psi_n(&u).unwrap() + Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn weyl_elements() {
        let f = make_field(2, 1).unwrap();
        let g2 = GroupContext::new(&f, 2).unwrap();
        assert_eq!(g2.alpha(), g2.weyl_longest());
        let g3 = GroupContext::new(&f, 3).unwrap();
        assert!(g3.alpha().pow(&f, 3).is_identity());
        let w31 = g3.w_nr(1).unwrap();
        assert_eq!(w31, GroupElement::from_ints(&f, &[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]).unwrap());
        assert!(w31.mul(&f, &w31).is_identity());
        assert!(g3.w_nr(0).is_err());
        assert!(g3.w_nr(3).is_err());
    }

    #[test]
    fn rank_one_cosets_are_units() {
        let f = make_field(5, 1).unwrap();
        let ctx = GroupContext::new(&f, 2).unwrap();
        let idx = ctx.coset_reps(1).unwrap();
        assert_eq!(idx.len(), 4);
        assert!(ctx.coset_reps(3).is_err());
    }
}
