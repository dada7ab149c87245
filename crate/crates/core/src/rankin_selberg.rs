//! Finite zeta sums for a pair `(pi, tau)` of generic components of ranks
//! `n > r`, their functional equation, and the gamma constant it defines.
//!
//! `Z(W_pi, W_tau; j) = sum_{g in U_r\G_r} q^{-jr/2} sum_{x in Mat_{j x r}}
//!     W_pi([[g,0,0],[x,I_j,0],[0,0,I]]) W_tau(g)`
//!
//! with `W_pi` in the `psi_n` model and `W_tau` in the `psi_r^{-1}` model.
//! The x-sum carries the self-dual weight `q^{-jr/2}`: with plain counting or
//! plain averaging the ratio of the two sides picks up a factor `q^{±r/2}` per
//! step in `j`, and only this weight makes the gamma constant `j`-independent.
//! The functional equation reads
//!
//! `Z(R_{w_{n,r}} W~_pi, W~_tau; n-r-1-j) = omega_tau(-1)^{n-1} gamma Z(W_pi, W_tau; j)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::FieldElement;
use crate::gelfand_graev::{BesselTable, GenericComponent};
use crate::group::{GroupContext, GroupElement};

/// Zeta values below this modulus are treated as vanishing.
pub const ZETA_FLOOR: f64 = 1e-10;
/// Largest admissible relative functional-equation residual.
pub const RESIDUAL_TOL: f64 = 1e-7;
/// Checked probes required after the anchor probe.
pub const MIN_PROBES: usize = 8;
const MAX_PROBES: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaError {
    #[error("twist rank {r} must be below pi's rank {n}")]
    RankOrder { n: usize, r: usize },
    #[error("j = {j} outside 0..={max}")]
    JOutOfRange { j: usize, max: usize },
    #[error("W_pi and W_tau must use opposite additive characters")]
    ModelMismatch,
    #[error("pi and tau are defined over different fields")]
    FieldMismatch,
    #[error("no non-vanishing zeta value among {probes} probes for pi {pi} x tau {tau}")]
    AllProbesVanish { pi: usize, tau: usize, probes: usize },
    #[error("only {found} informative probes for pi {pi} x tau {tau} (need {MIN_PROBES})")]
    TooFewProbes { pi: usize, tau: usize, found: usize },
}

/// A Whittaker function built from a Bessel function:
/// `W(g) = sum_i a_i J(L(g) h_i)`, where `L(g) = g`, or after a contragredient
/// twist `L(g) = w_n (g p)^{-T}` for an accumulated right translate `p`.
#[derive(Clone, Debug)]
pub struct WhittakerFunction {
    source: usize,
    bessel: BesselTable,
    model: GroupContext,
    terms: Vec<(Complex64, GroupElement)>,
    twisted: bool,
    post: GroupElement,
}

impl WhittakerFunction {
    /// `R_{g0} J` for the component's Bessel function.
    pub fn translate_of(component: &GenericComponent, g0: &GroupElement) -> Self {
        Self::from_bessel(component.id, component.bessel.clone(), g0)
    }

    pub fn from_bessel(source: usize, bessel: BesselTable, g0: &GroupElement) -> Self {
        let model = bessel.context().clone();
        let n = model.rank();
        WhittakerFunction {
            source,
            bessel,
            model,
            terms: vec![(Complex64::new(1.0, 0.0), *g0)],
            twisted: false,
            post: GroupElement::identity(n),
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn rank(&self) -> usize {
        self.model.rank()
    }

    /// The group and additive character of the model `W` lives in.
    pub fn model(&self) -> &GroupContext {
        &self.model
    }

    /// The single defining translate, when `W = R_{g0} J`.
    pub fn defining_translate(&self) -> Option<GroupElement> {
        match (self.twisted, self.terms.as_slice()) {
            (false, [(a, g)]) if *a == Complex64::new(1.0, 0.0) => Some(*g),
            _ => None,
        }
    }

    pub fn eval(&self, g: &GroupElement) -> Complex64 {
        let ctx = self.bessel.context();
        let x = if self.twisted {
            let gp = ctx.mul(g, &self.post);
            ctx.mul(&ctx.weyl_longest(), &ctx.inverse(&gp).transpose())
        } else {
            *g
        };
        self.terms.iter().map(|(a, h)| a * self.bessel.eval(&ctx.mul(&x, h))).sum()
    }

    /// `R_h W`.
    pub fn right_translate(&self, h: &GroupElement) -> Self {
        let ctx = self.bessel.context();
        let mut out = self.clone();
        if self.twisted {
            out.post = ctx.mul(h, &self.post);
        } else {
            for (_, t) in out.terms.iter_mut() {
                *t = ctx.mul(h, t);
            }
        }
        out
    }

    /// `W~(g) = W(w_n g^{-T})`, which lives in the model with the inverse
    /// additive character.
    pub fn tilde(&self) -> Self {
        let ctx = self.bessel.context();
        let mut out = self.clone();
        out.model = self.model.with_conjugate_psi();
        if self.twisted {
            // w_n (w_n g^{-T} p)^{-T} = g p^{-T}, folded into the translates.
            let pit = ctx.inverse(&self.post).transpose();
            for (_, t) in out.terms.iter_mut() {
                *t = ctx.mul(&pit, t);
            }
            out.twisted = false;
            out.post = GroupElement::identity(ctx.rank());
        } else {
            out.twisted = true;
        }
        out
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        for (c, _) in out.terms.iter_mut() {
            *c *= a;
        }
        out
    }

    /// `self + other`, for two functions built from the same Bessel function
    /// with the same twist state.
    pub fn add(&self, other: &Self) -> Option<Self> {
        if self.source != other.source
            || self.twisted != other.twisted
            || self.post != other.post
            || self.model.psi().is_conjugated() != other.model.psi().is_conjugated()
        {
            return None;
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Some(out)
    }
}

/// `diag(1, -1, 1, ...)`; conjugation by it inverts `psi_n`.
fn sign_diagonal(ctx: &GroupContext) -> GroupElement {
    let f = ctx.field();
    let m1 = f.neg(FieldElement::ONE);
    let d: Vec<FieldElement> = (0..ctx.rank()).map(|i| if i % 2 == 0 { FieldElement::ONE } else { m1 }).collect();
    GroupElement::diagonal(f, &d).expect("units on the diagonal")
}

/// The Bessel function of the same representation in the model with the
/// inverse additive character: `g -> J(t g t^{-1})` for `t = diag(1,-1,...)`.
pub fn bessel_in_inverse_model(table: &BesselTable) -> BesselTable {
    let ctx = table.context();
    let t = sign_diagonal(ctx);
    let values = ctx.cosets().reps().iter().map(|c| table.eval(&ctx.mul(&ctx.mul(&t, c), &t))).collect();
    BesselTable::new(ctx.with_conjugate_psi(), values)
}

/// `[[g,0,0],[x,I_j,0],[0,0,I]]` with `x` read row-major from `x`.
fn embed(g: &GroupElement, x: &[FieldElement], n: usize, j: usize) -> GroupElement {
    let r = g.rank();
    let mut e = vec![FieldElement::ZERO; n * n];
    for a in 0..n {
        e[a * n + a] = FieldElement::ONE;
    }
    for a in 0..r {
        for b in 0..r {
            e[a * n + b] = g.get(a, b);
        }
    }
    for a in 0..j {
        for b in 0..r {
            e[(r + a) * n + b] = x[a * r + b];
        }
    }
    GroupElement::from_entries_unchecked(n, &e)
}

/// The finite zeta sum `Z(W_pi, W_tau; j)`.
pub fn zeta(w_pi: &WhittakerFunction, w_tau: &WhittakerFunction, j: usize) -> Result<Complex64, GammaError> {
    zeta_over(w_pi, w_tau, j, w_tau.model().cosets().reps())
}

/// [`zeta`] with an explicit list of `U_r \ G_r` representatives; the value
/// does not depend on which representatives are used.
pub fn zeta_over(
    w_pi: &WhittakerFunction,
    w_tau: &WhittakerFunction,
    j: usize,
    reps: &[GroupElement],
) -> Result<Complex64, GammaError> {
    let n = w_pi.rank();
    let r = w_tau.rank();
    if r >= n {
        return Err(GammaError::RankOrder { n, r });
    }
    if j > n - r - 1 {
        return Err(GammaError::JOutOfRange { j, max: n - r - 1 });
    }
    if w_pi.model().psi().is_conjugated() == w_tau.model().psi().is_conjugated() {
        return Err(GammaError::ModelMismatch);
    }
    let f = w_pi.model().field();
    if f.order() != w_tau.model().field().order() || f.modulus() != w_tau.model().field().modulus() {
        return Err(GammaError::FieldMismatch);
    }
    let q = f.order() as usize;
    let cells = j * r;
    let count = q.pow(cells as u32);
    let mut total = Complex64::new(0.0, 0.0);
    let mut x = vec![FieldElement::ZERO; cells];
    for c in reps {
        let wt = w_tau.eval(c);
        if wt == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for code in 0..count {
            let mut rest = code;
            for slot in x.iter_mut() {
                *slot = f.element((rest % q) as u32);
                rest /= q;
            }
            inner += w_pi.eval(&embed(c, &x, n, j));
        }
        total += inner * wt;
    }
    Ok(total / (count as f64).sqrt())
}

/// One gamma constant with its well-definedness diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct GammaRecord {
    pub n: usize,
    pub q: u32,
    pub pi_id: usize,
    pub tau_rank: usize,
    pub tau_id: usize,
    pub gamma_re: f64,
    pub gamma_im: f64,
    /// `omega_tau(-1)^{n-1}`, as applied in the functional equation.
    pub sign: i32,
    /// Probes checked against the anchor (vanishing probes excluded).
    pub probes: usize,
    pub skipped_probes: usize,
    pub max_residual: f64,
    pub j_values: Vec<usize>,
}

impl GammaRecord {
    pub fn gamma(&self) -> Complex64 {
        Complex64::new(self.gamma_re, self.gamma_im)
    }

    pub fn well_defined(&self) -> bool {
        self.max_residual <= RESIDUAL_TOL
    }
}

/// Mixes the probe seed so every `(n, q, pi, tau, flag)` has its own stream.
fn probe_seed(n: usize, q: u32, pi: usize, tau_rank: usize, tau: usize, flag: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in [n as u64, q as u64, pi as u64, tau_rank as u64, tau as u64, flag] {
        h ^= v;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
        h ^= h >> 29;
    }
    h
}

struct Pairing<'a> {
    n: usize,
    r: usize,
    pi_id: usize,
    tau_id: usize,
    pi_bessel: &'a BesselTable,
    tau_bessel: &'a BesselTable,
    sign: i32,
}

fn run_probes(p: &Pairing<'_>, seed: u64) -> Result<GammaRecord, GammaError> {
    let ctx_n = p.pi_bessel.context();
    let ctx_r = p.tau_bessel.context();
    let w_nr = ctx_n.w_nr(p.r).expect("r < n");
    let span = p.n - p.r;
    let mut rng = ChaCha8Rng::seed_from_u64(probe_seed(p.n, ctx_n.q(), p.pi_id, p.r, p.tau_id, seed));
    let eps = p.sign as f64;

    // (lhs, rhs, j) per probe.
    let mut probes: Vec<(Complex64, Complex64, usize)> = Vec::new();
    let mut gamma: Option<Complex64> = None;
    let mut informative = 0;
    let mut skipped = 0;
    let mut seen_j = vec![false; span];
    for k in 0..MAX_PROBES {
        let j = k % span;
        let (g0, h0) = if k < span {
            (ctx_n.identity(), ctx_r.identity())
        } else {
            (ctx_n.random_element(&mut rng), ctx_r.random_element(&mut rng))
        };
        let w_pi = WhittakerFunction::from_bessel(p.pi_id, p.pi_bessel.clone(), &g0);
        let w_tau = WhittakerFunction::from_bessel(p.tau_id, p.tau_bessel.clone(), &h0);
        let rhs = zeta(&w_pi, &w_tau, j)?;
        let lhs = zeta(&w_pi.tilde().right_translate(&w_nr), &w_tau.tilde(), span - 1 - j)?;
        if lhs.norm() < ZETA_FLOOR && rhs.norm() < ZETA_FLOOR {
            skipped += 1;
            continue;
        }
        probes.push((lhs, rhs, j));
        if gamma.is_none() && rhs.norm() > ZETA_FLOOR {
            gamma = Some(lhs / (eps * rhs));
        } else {
            informative += 1;
            seen_j[j] = true;
        }
        if gamma.is_some() && informative >= MIN_PROBES && seen_j[0] && seen_j[span - 1] {
            break;
        }
    }
    let Some(gamma) = gamma else {
        return Err(GammaError::AllProbesVanish { pi: p.pi_id, tau: p.tau_id, probes: MAX_PROBES });
    };
    if informative < MIN_PROBES {
        return Err(GammaError::TooFewProbes { pi: p.pi_id, tau: p.tau_id, found: informative });
    }
    let max_residual = probes
        .iter()
        .map(|(lhs, rhs, _)| (lhs - eps * gamma * rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-12))
        .fold(0.0, f64::max);
    let mut j_values: Vec<usize> = probes.iter().map(|p| p.2).collect();
    j_values.sort_unstable();
    j_values.dedup();
    Ok(GammaRecord {
        n: p.n,
        q: ctx_n.q(),
        pi_id: p.pi_id,
        tau_rank: p.r,
        tau_id: p.tau_id,
        gamma_re: gamma.re,
        gamma_im: gamma.im,
        sign: p.sign,
        probes: probes.len() - 1,
        skipped_probes: skipped,
        max_residual,
        j_values,
    })
}

/// `omega_tau(-1)^{n-1}` as `+1` or `-1`.
fn twist_sign(tau: &GenericComponent, n: usize) -> i32 {
    let w = tau.omega_minus_one();
    let s = if w.re < 0.0 { -1 } else { 1 };
    if (n - 1).is_multiple_of(2) {
        1
    } else {
        s
    }
}

fn check_pair(pi: &GenericComponent, tau: &GenericComponent) -> Result<(), GammaError> {
    let (n, r) = (pi.rank(), tau.rank());
    if r >= n {
        return Err(GammaError::RankOrder { n, r });
    }
    let (f, g) = (pi.context().field(), tau.context().field());
    if f.order() != g.order() || f.modulus() != g.modulus() {
        return Err(GammaError::FieldMismatch);
    }
    Ok(())
}

/// `gamma(pi x tau, psi)`, from probes of the functional equation.
///
/// Both components are given in their `psi` models; `tau` is moved to the
/// `psi^{-1}` model internally.
pub fn extract_gamma(pi: &GenericComponent, tau: &GenericComponent, seed: u64) -> Result<GammaRecord, GammaError> {
    check_pair(pi, tau)?;
    let tau_bessel = bessel_in_inverse_model(&tau.bessel);
    run_probes(
        &Pairing {
            n: pi.rank(),
            r: tau.rank(),
            pi_id: pi.id,
            tau_id: tau.id,
            pi_bessel: &pi.bessel,
            tau_bessel: &tau_bessel,
            sign: twist_sign(tau, pi.rank()),
        },
        seed,
    )
}

/// `gamma(pi~ x tau~, psi^{-1})`: the same extraction with both
/// contragredients and the inverse additive character throughout. Applying
/// the functional equation twice returns the original zeta sum, so the
/// product with [`extract_gamma`] is `1`.
pub fn extract_gamma_dual(pi: &GenericComponent, tau: &GenericComponent, seed: u64) -> Result<GammaRecord, GammaError> {
    check_pair(pi, tau)?;
    let pi_dual = pi.bessel.conjugate();
    let tau_dual = bessel_in_inverse_model(&tau.bessel).conjugate();
    run_probes(
        &Pairing {
            n: pi.rank(),
            r: tau.rank(),
            pi_id: pi.id,
            tau_id: tau.id,
            pi_bessel: &pi_dual,
            tau_bessel: &tau_dual,
            sign: twist_sign(tau, pi.rank()),
        },
        seed ^ 0x5555_5555_5555_5555,
    )
}

/// Twist components grouped by rank: `twists[r - 1]` holds the rank-`r` ones.
pub type TwistFamily = Vec<Vec<GenericComponent>>;

/// One record per `(pi, tau)` with `pi` from `pis` and `tau` of rank at most
/// `r_max`, ordered by `(pi id, tau rank, tau id)`. Pairs run in parallel.
pub fn gamma_table(
    pis: &[GenericComponent],
    twists: &TwistFamily,
    r_max: usize,
    seed: u64,
) -> Result<Vec<GammaRecord>, GammaError> {
    let jobs: Vec<(&GenericComponent, &GenericComponent)> = pis
        .iter()
        .flat_map(|pi| twists.iter().take(r_max).flat_map(move |fam| fam.iter().map(move |tau| (pi, tau))))
        .collect();
    jobs.par_iter().map(|(pi, tau)| extract_gamma(pi, tau, seed)).collect()
}

pub const CSV_HEADER: &str = "n,q,pi_id,tau_rank,tau_id,gamma_re,gamma_im,max_residual,probes";

/// CSV rendering of a gamma table, header included.
pub fn gamma_csv(records: &[GammaRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.12e},{:.12e},{:.3e},{}",
            r.n, r.q, r.pi_id, r.tau_rank, r.tau_id, r.gamma_re, r.gamma_im, r.max_residual, r.probes
        );
    }
    out
}
