use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{component_central_exponent, ExperimentConfig, ExperimentError, Report, TwistPolicy, Workspace};
use crate::field::FieldElement;
use crate::gelfand_graev::GenericComponent;
use crate::group::{height, GroupContext, GroupElement};
use crate::rankin_selberg::{gamma_table, GammaRecord};

/// Agreement threshold for Bessel values.
pub const BESSEL_TOL: f64 = 1e-8;
/// Random samples drawn on top of exhaustive checks from rank 4 on.
pub const SAMPLES_AT_RANK_FOUR: usize = 100_000;

/// `J_c(g)` for every component, sharing one coset lookup.
fn values_at(ctx: &GroupContext, comps: &[GenericComponent], g: &GroupElement) -> Vec<Complex64> {
    let (c, s) = ctx.locate(g);
    let phase = ctx.psi_value(s);
    comps.iter().map(|k| phase * k.bessel.values()[c]).collect()
}

fn random_mirabolic(ctx: &GroupContext, rng: &mut ChaCha8Rng) -> GroupElement {
    let n = ctx.rank();
    let f = ctx.field();
    let q = ctx.q();
    loop {
        let mut e = vec![FieldElement::ZERO; n * n];
        for i in 0..n - 1 {
            for j in 0..n {
                e[i * n + j] = f.element(rng.gen_range(0..q));
            }
        }
        e[n * n - 1] = FieldElement::ONE;
        if let Some(g) = GroupElement::from_entries(f, n, &e) {
            return g;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryEntry {
    pub id: usize,
    pub max_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairAgreement {
    pub pi1: usize,
    pub pi2: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecialPairReport {
    pub n: usize,
    pub q: u32,
    pub symmetry_exhaustive: usize,
    pub symmetry_sampled: usize,
    pub mirabolic_exhaustive: usize,
    pub mirabolic_sampled: usize,
    pub symmetry: Vec<SymmetryEntry>,
    pub pairs: Vec<PairAgreement>,
    pub max_symmetry_defect: f64,
    pub max_pair_deviation: f64,
}

impl Report for SpecialPairReport {
    fn kind(&self) -> &'static str {
        "special-pair"
    }

    fn passed(&self) -> bool {
        self.max_symmetry_defect <= BESSEL_TOL && self.pairs.iter().all(|p| p.passed)
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "special-pair audit GL_{}(F_{})", self.n, self.q);
        let _ = writeln!(
            s,
            "conjugation symmetry J(g^-1) = conj J(g): {} elements exhaustive + {} sampled, max defect {:.3e}",
            self.symmetry_exhaustive, self.symmetry_sampled, self.max_symmetry_defect
        );
        let _ = writeln!(
            s,
            "mirabolic agreement: {} elements exhaustive + {} sampled",
            self.mirabolic_exhaustive, self.mirabolic_sampled
        );
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "  pair ({}, {}): max |J1 - J2| on P_n = {:.3e} {}",
                p.pi1,
                p.pi2,
                p.max_deviation,
                if p.passed { "ok" } else { "FAIL" }
            );
        }
        s
    }
}

/// Conjugation symmetry of every cuspidal Bessel function, and pairwise
/// agreement of cuspidal Bessel functions on the mirabolic subgroup.
pub fn run_special_pair_audit(config: &ExperimentConfig) -> Result<SpecialPairReport, ExperimentError> {
    let ws = Workspace::new(config)?;
    let ctx = &ws.main.ctx;
    let n = ctx.rank();
    let cusp = ws.main.cuspidals();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0001);
    let extra = if n >= 4 { SAMPLES_AT_RANK_FOUR } else { 0 };

    let mut sym = vec![0.0f64; cusp.len()];
    let check_sym = |g: &GroupElement, sym: &mut Vec<f64>| {
        let a = values_at(ctx, &cusp, g);
        let b = values_at(ctx, &cusp, &ctx.inverse(g));
        for (m, (x, y)) in sym.iter_mut().zip(a.iter().zip(&b)) {
            *m = m.max((x - y.conj()).norm());
        }
    };
    let elements = ctx.elements()?;
    for g in elements {
        check_sym(g, &mut sym);
    }
    for _ in 0..extra {
        let g = ctx.random_element(&mut rng);
        check_sym(&g, &mut sym);
    }

    let m = cusp.len();
    let mut dev = vec![vec![0.0f64; m]; m];
    let check_pairs = |g: &GroupElement, dev: &mut Vec<Vec<f64>>| {
        let v = values_at(ctx, &cusp, g);
        for a in 0..m {
            for b in a + 1..m {
                dev[a][b] = dev[a][b].max((v[a] - v[b]).norm());
            }
        }
    };
    let mirabolic = ctx.mirabolic_elements()?;
    for g in &mirabolic {
        check_pairs(g, &mut dev);
    }
    for _ in 0..extra {
        let g = random_mirabolic(ctx, &mut rng);
        check_pairs(&g, &mut dev);
    }

    let mut pairs = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            pairs.push(PairAgreement {
                pi1: cusp[a].id,
                pi2: cusp[b].id,
                max_deviation: dev[a][b],
                passed: dev[a][b] <= BESSEL_TOL,
            });
        }
    }
    let symmetry: Vec<SymmetryEntry> =
        cusp.iter().zip(&sym).map(|(c, &d)| SymmetryEntry { id: c.id, max_defect: d }).collect();
    Ok(SpecialPairReport {
        n,
        q: ctx.q(),
        symmetry_exhaustive: elements.len(),
        symmetry_sampled: extra,
        mirabolic_exhaustive: mirabolic.len(),
        mirabolic_sampled: extra,
        max_symmetry_defect: sym.iter().copied().fold(0.0, f64::max),
        max_pair_deviation: pairs.iter().map(|p| p.max_deviation).fold(0.0, f64::max),
        symmetry,
        pairs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HeightRow {
    pub pi1: usize,
    pub pi2: usize,
    pub height: usize,
    pub same_central_character: bool,
    /// Gamma factors agree for every generic twist of rank `height`
    /// (vacuous at height 0).
    pub gammas_agree: bool,
    pub bessel_agree: bool,
    pub max_deviation: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionRow {
    pub pi1: usize,
    pub pi2: usize,
    /// Agreement on heights `0..=n/2`.
    pub low_heights_agree: bool,
    /// Agreement on `Q alpha^k U`, `n - n/2 <= k <= n`.
    pub cells_agree: bool,
    pub max_cell_deviation: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeightAuditReport {
    pub n: usize,
    pub q: u32,
    pub rows: Vec<HeightRow>,
    pub violations: usize,
    /// `max |J(q alpha^k u) - conj J(u^-1 alpha^(n-k) q^-1)|` per cuspidal.
    pub reconstruction_identity: Vec<SymmetryEntry>,
    pub reconstruction_elements: usize,
    pub reconstruction: Vec<ReconstructionRow>,
    pub reconstruction_violations: usize,
}

impl Report for HeightAuditReport {
    fn kind(&self) -> &'static str {
        "height"
    }

    fn passed(&self) -> bool {
        self.violations == 0
            && self.reconstruction_violations == 0
            && self.reconstruction_identity.iter().all(|e| e.max_defect <= BESSEL_TOL)
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "height audit GL_{}(F_{})", self.n, self.q);
        let _ = writeln!(s, "  pi1 pi2 height  same-omega gammas-agree bessel-agree  max-dev");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "  {:>3} {:>3} {:>6}  {:>10} {:>12} {:>12}  {:.3e}{}",
                r.pi1,
                r.pi2,
                r.height,
                r.same_central_character,
                r.gammas_agree,
                r.bessel_agree,
                r.max_deviation,
                if r.violation { "  VIOLATION" } else { "" }
            );
        }
        let worst = self.reconstruction_identity.iter().map(|e| e.max_defect).fold(0.0, f64::max);
        let _ = writeln!(
            s,
            "reconstruction identity on {} elements q alpha^k u: max defect {:.3e}",
            self.reconstruction_elements, worst
        );
        let _ = writeln!(
            s,
            "violations: {} (height), {} (reconstruction)",
            self.violations, self.reconstruction_violations
        );
        s
    }
}

/// Tabulates, per pair of cuspidals and height, the hypothesis "same central
/// character and equal gamma factors at that rank" against agreement of the
/// Bessel functions on the height cell, and checks the inverse-symmetry
/// reconstruction of the cells `Q alpha^k U`.
pub fn run_height_audit(config: &ExperimentConfig) -> Result<HeightAuditReport, ExperimentError> {
    let mut ws = Workspace::new(config)?;
    let n = config.n;
    let half = n / 2;
    let cusp = ws.main.cuspidals();
    let twists = ws.twist_family(n.saturating_sub(1), TwistPolicy::AllGeneric)?;
    let gammas = if n > 1 { gamma_table(&cusp, &twists, n - 1, config.seed)? } else { Vec::new() };
    let by_key: BTreeMap<(usize, usize, usize), &GammaRecord> =
        gammas.iter().map(|r| ((r.pi_id, r.tau_rank, r.tau_id), r)).collect();
    let ctx = &ws.main.ctx;
    let exps: Vec<u32> = cusp.iter().map(|c| component_central_exponent(&ws.field, c)).collect();

    let rep_height: Vec<usize> = ctx.cosets().reps().iter().map(|c| height(ctx, c)).collect();
    let m = cusp.len();
    // dev[a][b][i]: max |J_a - J_b| on height i.
    let mut dev = vec![vec![vec![0.0f64; n]; m]; m];
    for (c, &h) in rep_height.iter().enumerate() {
        for a in 0..m {
            for b in a..m {
                let d = (cusp[a].bessel.values()[c] - cusp[b].bessel.values()[c]).norm();
                dev[a][b][h] = dev[a][b][h].max(d);
            }
        }
    }

    let mut rows = Vec::new();
    for a in 0..m {
        for b in a..m {
            for i in 0..n {
                let same = exps[a] == exps[b];
                let gammas_agree = i == 0
                    || twists[i - 1].iter().all(|t| {
                        let g1 = by_key[&(cusp[a].id, i, t.id)].gamma();
                        let g2 = by_key[&(cusp[b].id, i, t.id)].gamma();
                        (g1 - g2).norm() <= config.tol_sep
                    });
                let bessel_agree = dev[a][b][i] <= BESSEL_TOL;
                rows.push(HeightRow {
                    pi1: cusp[a].id,
                    pi2: cusp[b].id,
                    height: i,
                    same_central_character: same,
                    gammas_agree,
                    bessel_agree,
                    max_deviation: dev[a][b][i],
                    violation: same && gammas_agree && !bessel_agree,
                });
            }
        }
    }
    let violations = rows.iter().filter(|r| r.violation).count();

    let q_elems = ctx.parabolic_q_elements()?;
    let units = ctx.unipotent_elements();
    let alpha = ctx.alpha();
    let mut ident = vec![0.0f64; m];
    let mut cell_dev = vec![vec![0.0f64; m]; m];
    let mut count = 0;
    for k in n - half..=n {
        let ak = alpha.pow(ctx.field(), k);
        let ank = alpha.pow(ctx.field(), n - k);
        for qe in &q_elems {
            let qa = ctx.mul(qe, &ak);
            let right = ctx.mul(&ank, &ctx.inverse(qe));
            for u in &units {
                let g = ctx.mul(&qa, u);
                let mirror = ctx.mul(&ctx.inverse(u), &right);
                let v = values_at(ctx, &cusp, &g);
                let w = values_at(ctx, &cusp, &mirror);
                for a in 0..m {
                    ident[a] = ident[a].max((v[a] - w[a].conj()).norm());
                    for b in a..m {
                        cell_dev[a][b] = cell_dev[a][b].max((v[a] - v[b]).norm());
                    }
                }
                count += 1;
            }
        }
    }
    let mut reconstruction = Vec::new();
    for a in 0..m {
        for b in a..m {
            let low = (0..=half.min(n - 1)).all(|i| dev[a][b][i] <= BESSEL_TOL);
            let cells = cell_dev[a][b] <= BESSEL_TOL;
            reconstruction.push(ReconstructionRow {
                pi1: cusp[a].id,
                pi2: cusp[b].id,
                low_heights_agree: low,
                cells_agree: cells,
                max_cell_deviation: cell_dev[a][b],
                violation: low && !cells,
            });
        }
    }
    let reconstruction_violations = reconstruction.iter().filter(|r| r.violation).count();
    Ok(HeightAuditReport {
        n,
        q: ctx.q(),
        rows,
        violations,
        reconstruction_identity: cusp
            .iter()
            .zip(&ident)
            .map(|(c, &d)| SymmetryEntry { id: c.id, max_defect: d })
            .collect(),
        reconstruction_elements: count,
        reconstruction,
        reconstruction_violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaVector {
    pub pi_id: usize,
    pub central_exponent: u32,
    /// `gamma(pi x chi)` as `[re, im]` for the characters `chi` of `F_q^x`.
    pub gammas: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralCharReport {
    pub n: usize,
    pub q: u32,
    pub vectors: Vec<GammaVector>,
    /// Groups of cuspidals with identical rank-1 gamma vectors.
    pub groups: Vec<Vec<usize>>,
    /// Pairs with identical vectors but different central characters.
    pub collisions: Vec<(usize, usize)>,
}

impl Report for CentralCharReport {
    fn kind(&self) -> &'static str {
        "central-char"
    }

    fn passed(&self) -> bool {
        self.collisions.is_empty()
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "central-character probe GL_{}(F_{})", self.n, self.q);
        for g in &self.groups {
            let _ = writeln!(s, "  identical rank-1 gamma vectors: {:?}", g);
        }
        let _ = writeln!(s, "collisions with distinct central characters: {}", self.collisions.len());
        s
    }
}

/// Groups cuspidals by their rank-1 gamma vectors and reports any group
/// mixing central characters.
pub fn central_character_probe(config: &ExperimentConfig) -> Result<CentralCharReport, ExperimentError> {
    let mut ws = Workspace::new(config)?;
    let n = config.n;
    let cusp = ws.main.cuspidals();
    let mut vectors = Vec::new();
    if n > 1 {
        let twists = ws.twist_family(1, TwistPolicy::AllGeneric)?;
        let table = gamma_table(&cusp, &twists, 1, config.seed)?;
        for c in &cusp {
            vectors.push(GammaVector {
                pi_id: c.id,
                central_exponent: component_central_exponent(&ws.field, c),
                gammas: table.iter().filter(|r| r.pi_id == c.id).map(|r| [r.gamma_re, r.gamma_im]).collect(),
            });
        }
    }
    let same = |a: &GammaVector, b: &GammaVector| {
        a.gammas
            .iter()
            .zip(&b.gammas)
            .all(|(x, y)| (Complex64::new(x[0], x[1]) - Complex64::new(y[0], y[1])).norm() <= config.tol_sep)
    };
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut collisions = Vec::new();
    for (a, va) in vectors.iter().enumerate() {
        for vb in &vectors[a + 1..] {
            if same(va, vb) && va.central_exponent != vb.central_exponent {
                collisions.push((va.pi_id, vb.pi_id));
            }
        }
        match groups.iter_mut().find(|g| same(&vectors[g[0]], va)) {
            Some(g) => g.push(a),
            None => groups.push(vec![a]),
        }
    }
    let groups = groups.into_iter().map(|g| g.into_iter().map(|i| vectors[i].pi_id).collect()).collect();
    Ok(CentralCharReport { n, q: ws.main.ctx.q(), vectors, groups, collisions })
}
