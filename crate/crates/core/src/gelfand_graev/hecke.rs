use num_complex::Complex64;

use crate::field::root_of_unity;
use crate::group::GroupContext;

/// Basis of the algebra of `psi_n`-bi-equivariant functions,
/// `f(u g u') = psi_n(u) f(g) psi_n(u')`.
///
/// Each basis function is stored as a vector over the `U_n \ G_n`
/// representatives; its support is one double coset `U h U` on which the
/// bi-equivariance constraints are consistent.
#[derive(Clone, Debug)]
pub struct HeckeAlgebra {
    /// Coset index of the least representative in each relevant double coset.
    leaders: Vec<usize>,
    basis: Vec<Vec<Complex64>>,
    double_cosets: usize,
}

impl HeckeAlgebra {
    /// Walks the orbits of right `U_n`-translation on `U_n \ G_n`, propagating
    /// exact phases `f(c') = f(c) psi(v) psi(s')^{-1}` along `c v = u' c'`.
    pub(crate) fn build(ctx: &GroupContext) -> Self {
        let cosets = ctx.cosets();
        let n = cosets.len();
        let p = ctx.field().characteristic();
        let gens: Vec<_> = ctx
            .unipotent_generators()
            .into_iter()
            .map(|v| {
                let phase = ctx.psi().phase(ctx.superdiagonal_sum(&v));
                (v, phase)
            })
            .collect();

        let mut phase: Vec<Option<u32>> = vec![None; n];
        let mut leaders = Vec::new();
        let mut basis = Vec::new();
        let mut double_cosets = 0;
        for start in 0..n {
            if phase[start].is_some() {
                continue;
            }
            double_cosets += 1;
            phase[start] = Some(0);
            let mut orbit = vec![start];
            let mut consistent = true;
            let mut head = 0;
            while head < orbit.len() {
                let c = orbit[head];
                head += 1;
                let pc = phase[c].unwrap();
                for (v, pv) in &gens {
                    let (c2, s) = ctx.locate(&ctx.mul(cosets.rep(c), v));
                    let want = (pc + pv + p - ctx.psi().phase(s)) % p;
                    match phase[c2] {
                        None => {
                            phase[c2] = Some(want);
                            orbit.push(c2);
                        }
                        Some(have) if have != want => consistent = false,
                        Some(_) => {}
                    }
                }
            }
            if consistent {
                let mut f = vec![Complex64::new(0.0, 0.0); n];
                for &c in &orbit {
                    f[c] = root_of_unity(phase[c].unwrap() as i64, p as u64);
                }
                leaders.push(start);
                basis.push(f);
            }
        }
        HeckeAlgebra { leaders, basis, double_cosets }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Number of `U_n`-double cosets, relevant or not.
    pub fn double_coset_count(&self) -> usize {
        self.double_cosets
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    /// Basis function `i` on the coset representatives.
    pub fn basis(&self, i: usize) -> &[Complex64] {
        &self.basis[i]
    }

    /// Coordinates of a bi-equivariant function in this basis.
    pub fn coordinates(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.leaders.iter().map(|&l| f[l]).collect()
    }
}
