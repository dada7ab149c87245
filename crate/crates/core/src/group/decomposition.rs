use serde::Serialize;

use super::{GroupContext, GroupElement, GroupError};

/// The `i` with `g in U_n alpha^i Q_n`.
///
/// The last row of `(u alpha^i q)^{-1}` is a multiple of row `n - i` of
/// `u^{-1}`, so its leftmost nonzero column is `n - 1 - i` (0-based). That
/// column is unchanged by left `Q_n` and right `U_n` translation of the inverse.
pub fn height(ctx: &GroupContext, g: &GroupElement) -> usize {
    let n = ctx.rank();
    let gi = ctx.inverse(g);
    let pos = (0..n).find(|&j| !gi.get(n - 1, j).is_zero()).expect("invertible");
    n - 1 - pos
}

/// Element ids of each cell `U_n alpha^i Q_n`, built from the products.
pub fn height_cells_by_enumeration(ctx: &GroupContext) -> Result<Vec<Vec<usize>>, GroupError> {
    let n = ctx.rank();
    let q_elems = ctx.parabolic_q_elements()?;
    let units = ctx.unipotent_elements();
    let alpha = ctx.alpha();
    let mut out = Vec::with_capacity(n);
    let mut a = ctx.identity();
    for _ in 0..n {
        let mut seen = vec![false; ctx.elements()?.len()];
        for u in &units {
            let ua = ctx.mul(u, &a);
            for qe in &q_elems {
                seen[ctx.element_id(&ctx.mul(&ua, qe)).expect("enumerated")] = true;
            }
        }
        out.push(seen.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i).collect());
        a = ctx.mul(&a, &alpha);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CellSize {
    pub r: usize,
    pub k: usize,
    pub size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub n: usize,
    pub q: u32,
    pub group_order: usize,
    pub covered: usize,
    pub cells: Vec<CellSize>,
    /// Up to the first ten elements outside every cell.
    pub uncovered: Vec<String>,
    pub uncovered_count: usize,
}

impl CoverReport {
    pub fn complete(&self) -> bool {
        self.uncovered_count == 0
    }
}

/// Checks `G_n = union of U alpha^r Q alpha^k U` over
/// `0 <= r <= n/2` and `n - n/2 <= k <= n`, exhaustively.
pub fn refined_cover_check(ctx: &GroupContext) -> Result<CoverReport, GroupError> {
    let n = ctx.rank();
    let half = n / 2;
    let elements = ctx.elements()?;
    let units = ctx.unipotent_elements();
    let alpha = ctx.alpha();
    let by_height: Vec<Vec<usize>> = {
        let mut v = vec![Vec::new(); n];
        for (i, g) in elements.iter().enumerate() {
            v[height(ctx, g)].push(i);
        }
        v
    };
    let mut covered = vec![false; elements.len()];
    let mut cells = Vec::new();
    for (r, fiber) in by_height.iter().enumerate().take(half + 1) {
        for k in n - half..=n {
            let ak = alpha.pow(ctx.field(), k);
            let mut member = vec![false; elements.len()];
            for &gi in fiber {
                let ga = ctx.mul(&elements[gi], &ak);
                for u in &units {
                    let id = ctx.element_id(&ctx.mul(&ga, u)).expect("enumerated");
                    member[id] = true;
                }
            }
            let mut size = 0;
            for (c, m) in covered.iter_mut().zip(&member) {
                if *m {
                    *c = true;
                    size += 1;
                }
            }
            cells.push(CellSize { r, k, size });
        }
    }
    let missing: Vec<usize> = covered.iter().enumerate().filter(|(_, &c)| !c).map(|(i, _)| i).collect();
    Ok(CoverReport {
        n,
        q: ctx.q(),
        group_order: elements.len(),
        covered: elements.len() - missing.len(),
        cells,
        uncovered: missing.iter().take(10).map(|&i| format!("{:?}", elements[i])).collect(),
        uncovered_count: missing.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn height_examples() {
        let f = make_field(2, 1).unwrap();
        let ctx = GroupContext::new(&f, 3).unwrap();
        assert_eq!(height(&ctx, &ctx.identity()), 0);
        assert_eq!(height(&ctx, &ctx.alpha().pow(&f, 2)), 2);
    }

    #[test]
    fn height_matches_cells_small() {
        let f = make_field(2, 1).unwrap();
        let ctx = GroupContext::new(&f, 3).unwrap();
        let cells = height_cells_by_enumeration(&ctx).unwrap();
        assert_eq!(cells.iter().map(Vec::len).sum::<usize>(), 168);
        for (i, cell) in cells.iter().enumerate() {
            for &id in cell {
                assert_eq!(height(&ctx, &ctx.elements().unwrap()[id]), i);
            }
        }
    }

    #[test]
    fn cover_small() {
        let f = make_field(3, 1).unwrap();
        let ctx = GroupContext::new(&f, 2).unwrap();
        let rep = refined_cover_check(&ctx).unwrap();
        assert!(rep.complete());
        assert_eq!(rep.covered, 48);
    }
}
