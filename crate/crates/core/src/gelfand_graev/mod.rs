//! The Gelfand-Graev module `Ind_{U_n}^{G_n}(psi_n)` and its splitting into
//! generic irreducible components.
//!
//! The module is realized on the `U_n \ G_n` representatives. A
//! bi-equivariant function `phi` acts by left convolution, which in that basis
//! is the matrix `M_phi[c][d] = phi(c d^{-1})`. The Hecke algebra is
//! commutative, so a random self-adjoint element has one eigenspace per
//! component; the eigenspace dimension is the component's dimension and the
//! projection of the identity coset, normalized at `1`, is its Bessel function.

mod component;
mod hecke;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::FieldElement;
use crate::group::{GroupContext, GroupElement};
use crate::spectral::split_hermitian;

pub use component::{BesselTable, GenericComponent};
pub use hecke::HeckeAlgebra;

/// Largest module dimension handled by dense diagonalization.
pub const MODULE_DIM_BOUND: usize = 20_000;

/// Relative tolerance for grouping eigenvalues into one component.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;
/// Smallest admissible relative gap between distinct eigenvalue clusters.
pub const DEFAULT_MIN_GAP: f64 = 1e-6;
/// Threshold below which an averaging operator counts as annihilating.
pub const CUSPIDAL_TOL: f64 = 1e-8;

const SPLIT_ATTEMPTS: u64 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("module dimension {dim} exceeds the dense bound {MODULE_DIM_BOUND}")]
    TooLarge { dim: usize },
    #[error("eigenvalue clusters closer than the resolution tolerance (relative gap {gap:e})")]
    Unresolved { gap: f64 },
    #[error("found {found} eigenvalue clusters but the Hecke algebra has dimension {expected}")]
    ClusterCount { found: usize, expected: usize },
    #[error("component {id} is not a joint Hecke eigenvector (residual {residual:e})")]
    NotJointEigenvector { id: usize, residual: f64 },
    #[error("component {id}: central character is not multiplicative (defect {defect:e})")]
    CentralCharacter { id: usize, defect: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct SplitOptions {
    pub group_tol: f64,
    pub min_gap: f64,
    pub seed: u64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions { group_tol: DEFAULT_GROUP_TOL, min_gap: DEFAULT_MIN_GAP, seed: 0x9e37_79b9 }
    }
}

/// `Ind_{U_n}^{G_n}(psi_n)` on the coset representatives.
pub struct GGModule {
    ctx: GroupContext,
    hecke: HeckeAlgebra,
    /// `locate(c_i c_j^{-1})` at `i * dim + j`.
    quotients: Vec<(u32, FieldElement)>,
    /// Right action of each standard maximal unipotent radical:
    /// `c v = u' c'` stored as `(c', s')` per `c`, per `v`.
    radicals: Vec<RadicalAction>,
}

struct RadicalAction {
    block: usize,
    size: usize,
    /// `(c', s')` at `c * size + k` for the `k`-th radical element.
    images: Vec<(u32, FieldElement)>,
}

/// Diagnostics from [`GGModule::split_generic`].
#[derive(Clone, Debug, Serialize)]
pub struct SplitDiagnostics {
    pub module_dim: usize,
    pub hecke_dim: usize,
    pub double_cosets: usize,
    pub min_relative_gap: f64,
    pub max_joint_residual: f64,
    pub attempts: u64,
}

impl GGModule {
    pub fn new(ctx: &GroupContext) -> Result<Self, SpectralError> {
        let cosets = ctx.cosets();
        let dim = cosets.len();
        if dim > MODULE_DIM_BOUND {
            return Err(SpectralError::TooLarge { dim });
        }
        let hecke = HeckeAlgebra::build(ctx);
        let inverses: Vec<GroupElement> = cosets.reps().iter().map(|c| ctx.inverse(c)).collect();
        let mut quotients = Vec::with_capacity(dim * dim);
        for c in cosets.reps() {
            for d_inv in &inverses {
                let (r, s) = ctx.locate(&ctx.mul(c, d_inv));
                quotients.push((r as u32, s));
            }
        }
        let radicals = (1..ctx.rank())
            .map(|a| {
                let elems = ctx.radical_elements(a).expect("1 <= a < n");
                let mut images = Vec::with_capacity(dim * elems.len());
                for c in cosets.reps() {
                    for v in &elems {
                        let (r, s) = ctx.locate(&ctx.mul(c, v));
                        images.push((r as u32, s));
                    }
                }
                RadicalAction { block: a, size: elems.len(), images }
            })
            .collect();
        Ok(GGModule { ctx: ctx.clone(), hecke, quotients, radicals })
    }

    pub fn context(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.cosets().len()
    }

    pub fn hecke(&self) -> &HeckeAlgebra {
        &self.hecke
    }

    /// `phi(c_i c_j^{-1})` for a left-equivariant `phi` given on representatives.
    #[inline]
    fn quotient_value(&self, phi: &[Complex64], i: usize, j: usize) -> Complex64 {
        let (r, s) = self.quotients[i * self.dim() + j];
        self.ctx.psi_value(s) * phi[r as usize]
    }

    /// Left convolution `(phi * f)(c) = sum_d phi(c d^{-1}) f(d)`.
    pub fn convolve(&self, phi: &[Complex64], f: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.quotient_value(phi, i, j) * f[j]).sum()).collect()
    }

    /// The matrix `M_phi`.
    pub fn operator(&self, phi: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.quotient_value(phi, i, j))
    }

    /// `||M_phi||_F`.
    pub fn operator_norm_frobenius(&self, phi: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += phi[self.quotients[i * n + j].0 as usize].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Structure constants: `phi_a * phi_b = sum_c C[a][b][c] phi_c`.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<Complex64>>> {
        let m = self.hecke.dim();
        (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| self.hecke.coordinates(&self.convolve(self.hecke.basis(a), self.hecke.basis(b))))
                    .collect()
            })
            .collect()
    }

    /// `max_{a,b} ||M_a M_b - M_b M_a||_F` over Hecke basis pairs.
    pub fn max_commutator_norm(&self) -> f64 {
        let m = self.hecke.dim();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in a + 1..m {
                let ab = self.convolve(self.hecke.basis(a), self.hecke.basis(b));
                let ba = self.convolve(self.hecke.basis(b), self.hecke.basis(a));
                let diff: Vec<Complex64> = ab.iter().zip(&ba).map(|(x, y)| x - y).collect();
                worst = worst.max(self.operator_norm_frobenius(&diff));
            }
        }
        worst
    }

    /// Eigenvalue of each Hecke basis element on the component with Bessel
    /// values `j` (on representatives): `(M_h J)(1) / J(1)`.
    fn fingerprint_of(&self, j: &[Complex64]) -> Vec<Complex64> {
        let e = self.ctx.cosets().identity_index();
        (0..self.hecke.dim())
            .map(|h| {
                let phi = self.hecke.basis(h);
                (0..self.dim()).map(|d| self.quotient_value(phi, e, d) * j[d]).sum::<Complex64>() / j[e]
            })
            .collect()
    }

    fn joint_residual(&self, j: &[Complex64], fingerprint: &[Complex64]) -> f64 {
        let scale = j.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        (0..self.hecke.dim())
            .map(|h| {
                let mj = self.convolve(self.hecke.basis(h), j);
                let lam = fingerprint[h];
                let r = mj.iter().zip(j).fold(0.0f64, |m, (x, y)| m.max((x - lam * y).norm()));
                r / (scale * (1.0 + lam.norm()))
            })
            .fold(0.0, f64::max)
    }

    /// `max_N ||A_N P||_F`, where `P = (dim / |U\G|) M_J` projects onto the
    /// component and `A_N` averages the right action of a standard maximal
    /// unipotent radical. Zero exactly for cuspidal components.
    pub fn cuspidal_defect(&self, component: &GenericComponent) -> f64 {
        let n = self.dim();
        let j = component.bessel.values();
        let scale = component.dimension as f64 / n as f64;
        let mut worst: f64 = 0.0;
        for rad in &self.radicals {
            let mut acc = 0.0;
            for c in 0..n {
                for d in 0..n {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..rad.size {
                        let (c2, s) = rad.images[c * rad.size + k];
                        sum += self.ctx.psi_value(s) * self.quotient_value(j, c2 as usize, d);
                    }
                    acc += (sum * (scale / rad.size as f64)).norm_sqr();
                }
            }
            worst = worst.max(acc.sqrt());
        }
        worst
    }

    /// Cuspidal iff every standard maximal radical averages the component to zero.
    pub fn is_cuspidal(&self, component: &GenericComponent) -> bool {
        self.cuspidal_defect(component) <= CUSPIDAL_TOL
    }

    /// The radical blocks `a` (type `(a, n - a)`) used by the cuspidality test.
    pub fn radical_blocks(&self) -> Vec<usize> {
        self.radicals.iter().map(|r| r.block).collect()
    }

    /// Splits the module into joint Hecke eigenspaces.
    ///
    /// A random self-adjoint element `M_Phi + M_Phi^*` is diagonalized; when
    /// its clusters are not separated by `min_gap` the split is retried with a
    /// fresh element, and after a few attempts the run aborts.
    pub fn split_generic(
        &self,
        opts: &SplitOptions,
    ) -> Result<(Vec<GenericComponent>, SplitDiagnostics), SpectralError> {
        let n = self.dim();
        let m = self.hecke.dim();
        let e = self.ctx.cosets().identity_index();
        let mut best_gap = 0.0f64;
        for attempt in 0..SPLIT_ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(attempt));
            let mut phi = vec![Complex64::new(0.0, 0.0); n];
            for h in 0..m {
                let w = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                for (x, b) in phi.iter_mut().zip(self.hecke.basis(h)) {
                    *x += w * b;
                }
            }
            let mphi = self.operator(&phi);
            let a = &mphi + mphi.adjoint();
            let split = split_hermitian(a, opts.group_tol);
            if split.clusters.len() != m {
                if split.clusters.len() < m {
                    best_gap = best_gap.max(split.min_gap);
                    continue;
                }
                return Err(SpectralError::ClusterCount { found: split.clusters.len(), expected: m });
            }
            if split.min_gap < opts.min_gap {
                best_gap = best_gap.max(split.min_gap);
                continue;
            }

            let mut comps = Vec::with_capacity(m);
            let mut max_residual: f64 = 0.0;
            for cluster in &split.clusters {
                let v = &split.eigenvectors;
                let pee: f64 = cluster.iter().map(|&k| v[(e, k)].norm_sqr()).sum();
                let values: Vec<Complex64> = (0..n)
                    .map(|c| cluster.iter().map(|&k| v[(c, k)] * v[(e, k)].conj()).sum::<Complex64>() / pee)
                    .collect();
                let fingerprint = self.fingerprint_of(&values);
                let residual = self.joint_residual(&values, &fingerprint);
                max_residual = max_residual.max(residual);
                let bessel = BesselTable::new(self.ctx.clone(), values);
                let central_character = self.ctx.center_elements().iter().map(|z| bessel.eval(z)).collect();
                comps.push(GenericComponent {
                    id: 0,
                    dimension: cluster.len(),
                    cuspidal: false,
                    fingerprint,
                    central_character,
                    bessel,
                });
            }
            comps.sort_by_key(component_order_key);
            for (i, c) in comps.iter_mut().enumerate() {
                c.id = i;
            }
            for c in comps.iter_mut() {
                if max_residual > 1e-6 {
                    return Err(SpectralError::NotJointEigenvector { id: c.id, residual: max_residual });
                }
                let defect = central_character_defect(&self.ctx, &c.central_character);
                if defect > 1e-8 {
                    return Err(SpectralError::CentralCharacter { id: c.id, defect });
                }
                c.cuspidal = self.is_cuspidal(c);
            }
            let diag = SplitDiagnostics {
                module_dim: n,
                hecke_dim: m,
                double_cosets: self.hecke.double_coset_count(),
                min_relative_gap: if split.min_gap.is_finite() { split.min_gap } else { 1.0 },
                max_joint_residual: max_residual,
                attempts: attempt + 1,
            };
            return Ok((comps, diag));
        }
        Err(SpectralError::Unresolved { gap: best_gap })
    }
}

fn component_order_key(c: &GenericComponent) -> (usize, Vec<(i64, i64)>) {
    let r = |x: f64| (x * 1e6).round() as i64;
    (c.dimension, c.fingerprint.iter().map(|v| (r(v.re), r(v.im))).collect())
}

/// `max |omega(xy) - omega(x) omega(y)|` over pairs of units.
pub fn central_character_defect(ctx: &GroupContext, omega: &[Complex64]) -> f64 {
    let f = ctx.field();
    let mut worst: f64 = 0.0;
    for x in f.units() {
        for y in f.units() {
            let xy = f.mul(x, y);
            let d = omega[xy.index() - 1] - omega[x.index() - 1] * omega[y.index() - 1];
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// Builds the module for `ctx` and splits it with default options.
pub fn split_generic(ctx: &GroupContext) -> Result<Vec<GenericComponent>, SpectralError> {
    Ok(GGModule::new(ctx)?.split_generic(&SplitOptions::default())?.0)
}
