use std::collections::HashMap;

use crate::field::{Field, FieldElement};

use super::element::GroupElement;

/// Canonical form of `U_n g`: rows are reduced bottom-up so that every row
/// vanishes at the pivot (leftmost nonzero) columns of the rows below it.
///
/// Returns `(c, s)` with `g = u c` for some `u` in `U_n` whose superdiagonal
/// sums to `s`, so `psi_n(u) = psi(s)`.
pub fn canonical_coset(field: &Field, g: &GroupElement) -> (GroupElement, FieldElement) {
    let n = g.rank();
    let mut c = *g;
    let mut pivots = [0usize; super::element::MAX_RANK];
    let mut s = FieldElement::ZERO;
    for i in (0..n).rev() {
        for j in (i + 1..n).rev() {
            let pj = pivots[j];
            let x = c.get(i, pj);
            if x.is_zero() {
                continue;
            }
            let coef = field.mul(x, field.inv(c.get(j, pj)).unwrap());
            for col in 0..n {
                let v = field.sub(c.get(i, col), field.mul(coef, c.get(j, col)));
                c.set(i, col, v);
            }
            if j == i + 1 {
                s = field.add(s, coef);
            }
        }
        pivots[i] = (0..n).find(|&col| !c.get(i, col).is_zero()).expect("invertible");
    }
    (c, s)
}

/// Representatives of `U_r \ G_r` with an element-to-representative map.
#[derive(Clone, Debug)]
pub struct CosetIndex {
    rank: usize,
    q: u32,
    reps: Vec<GroupElement>,
    lookup: HashMap<u64, u32>,
    identity: usize,
}

impl CosetIndex {
    /// Enumerates the canonical forms directly: the last row is any nonzero
    /// vector, and each higher row is any nonzero vector supported off the
    /// pivot columns of the rows below.
    pub fn build(field: &Field, rank: usize) -> Self {
        let q = field.order();
        let mut reps = Vec::new();
        let mut rows: Vec<Vec<FieldElement>> = vec![Vec::new(); rank];
        fill_rows(field, rank, rank, &mut Vec::new(), &mut rows, &mut reps);
        reps.sort_by_key(|g| g.key(q));
        let lookup: HashMap<u64, u32> = reps.iter().enumerate().map(|(i, g)| (g.key(q), i as u32)).collect();
        let identity = lookup[&GroupElement::identity(rank).key(q)] as usize;
        CosetIndex { rank, q, reps, lookup, identity }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[GroupElement] {
        &self.reps
    }

    pub fn rep(&self, i: usize) -> &GroupElement {
        &self.reps[i]
    }

    /// Index of the identity coset.
    pub fn identity_index(&self) -> usize {
        self.identity
    }

    /// `(index of the representative c, s)` with `g = u c`, `psi_r(u) = psi(s)`.
    #[inline]
    pub fn locate(&self, field: &Field, g: &GroupElement) -> (usize, FieldElement) {
        let (c, s) = canonical_coset(field, g);
        (self.lookup[&c.key(self.q)] as usize, s)
    }

    /// Index of a canonical representative, if `g` is one.
    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.lookup.get(&g.key(self.q)).map(|&i| i as usize)
    }
}

fn fill_rows(
    field: &Field,
    n: usize,
    remaining: usize,
    pivots: &mut Vec<usize>,
    rows: &mut Vec<Vec<FieldElement>>,
    out: &mut Vec<GroupElement>,
) {
    if remaining == 0 {
        let entries: Vec<FieldElement> = rows.iter().flatten().copied().collect();
        out.push(GroupElement::from_entries_unchecked(n, &entries));
        return;
    }
    let i = remaining - 1;
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let q = field.order() as u64;
    let total = q.pow(free.len() as u32);
    for code in 1..total {
        let mut row = vec![FieldElement::ZERO; n];
        let mut x = code;
        for &col in &free {
            row[col] = field.element((x % q) as u32);
            x /= q;
        }
        let pivot = row.iter().position(|v| !v.is_zero()).unwrap();
        rows[i] = row;
        pivots.push(pivot);
        fill_rows(field, n, remaining - 1, pivots, rows, out);
        pivots.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn coset_counts() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(CosetIndex::build(&f3, 1).len(), 2);
        assert_eq!(CosetIndex::build(&f3, 2).len(), 16);
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(CosetIndex::build(&f2, 2).len(), 3);
        assert_eq!(CosetIndex::build(&f2, 3).len(), 21);
    }

    #[test]
    fn canonical_form_absorbs_left_unipotent() {
        let f = make_field(3, 1).unwrap();
        let idx = CosetIndex::build(&f, 3);
        let c = *idx.rep(7);
        let u = GroupElement::from_ints(&f, &[&[1, 2, 1], &[0, 1, 1], &[0, 0, 1]]).unwrap();
        let (i, s) = idx.locate(&f, &u.mul(&f, &c));
        assert_eq!(i, 7);
        assert_eq!(s, f.element(0)); // 2 + 1 = 0 in F_3
    }
}
