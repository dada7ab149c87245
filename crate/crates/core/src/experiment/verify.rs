use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{inventory_report, ExperimentConfig, ExperimentError, Report, TwistPolicy, Workspace};
use crate::character_oracle::generic_bessel_functions;
use crate::field::{make_field, mult_characters, Field};
use crate::gelfand_graev::{GGModule, SplitOptions};
use crate::group::{height, height_cells_by_enumeration, refined_cover_check};
use crate::rankin_selberg::{
    bessel_in_inverse_model, extract_gamma, extract_gamma_dual, gamma_table, zeta, zeta_over, WhittakerFunction,
};

const TOL: f64 = 1e-8;
/// Largest group handled by the brute-force character oracle.
const CHARACTER_ORACLE_BOUND: usize = 2_000;
const SAMPLES: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fields,
    Group,
    Decompositions,
    Spectral,
    Bessel,
    Zeta,
    Gamma,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 8] =
        ["fields", "group", "decompositions", "spectral", "bessel", "zeta", "gamma", "all"];

    fn members(self) -> Vec<Suite> {
        use Suite::*;
        match self {
            All => vec![Fields, Group, Decompositions, Spectral, Bessel, Zeta, Gamma],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        use Suite::*;
        match self {
            Fields => "fields",
            Group => "group",
            Decompositions => "decompositions",
            Spectral => "spectral",
            Bessel => "bessel",
            Zeta => "zeta",
            Gamma => "gamma",
            All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use Suite::*;
        Ok(match s {
            "fields" => Fields,
            "group" => Group,
            "decompositions" => Decompositions,
            "spectral" => Spectral,
            "bessel" => Bessel,
            "zeta" => Zeta,
            "gamma" => Gamma,
            "all" => All,
            _ => return Err(format!("unknown suite '{s}'; expected one of {}", Suite::NAMES.join(", "))),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub n: usize,
    pub q: u32,
    pub checks: Vec<Check>,
    pub passed_count: usize,
    pub failed_count: usize,
}

impl Report for VerifyReport {
    fn kind(&self) -> &'static str {
        "verify"
    }

    fn passed(&self) -> bool {
        self.failed_count == 0
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verify {} on GL_{}(F_{})", self.suite.name(), self.n, self.q);
        for c in &self.checks {
            let _ = writeln!(s, "  [{}] {}/{}: {}", if c.passed { "pass" } else { "FAIL" }, c.suite, c.name, c.detail);
        }
        let _ = writeln!(s, "passed {}, failed {}", self.passed_count, self.failed_count);
        s
    }
}

struct Checks {
    suite: &'static str,
    out: Vec<Check>,
}

impl Checks {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.out.push(Check { suite: self.suite, name: name.to_string(), passed, detail });
    }

    fn bound(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value <= tol, format!("max deviation {value:.3e} (tolerance {tol:e})"));
    }
}

pub fn run_verify(config: &ExperimentConfig, suite: Suite) -> Result<VerifyReport, ExperimentError> {
    let mut ws = Workspace::new(config)?;
    let mut checks = Vec::new();
    for s in suite.members() {
        let mut c = Checks { suite: s.name(), out: Vec::new() };
        match s {
            Suite::Fields => fields_suite(&ws.field, config.n, &mut c)?,
            Suite::Group => group_suite(&ws, &mut c)?,
            Suite::Decompositions => decomposition_suite(&ws, &mut c)?,
            Suite::Spectral => spectral_suite(&ws, &mut c)?,
            Suite::Bessel => bessel_suite(&ws, &mut c)?,
            Suite::Zeta => zeta_suite(&mut ws, &mut c)?,
            Suite::Gamma => gamma_suite(&mut ws, &mut c)?,
            Suite::All => unreachable!(),
        }
        checks.extend(c.out);
    }
    let failed_count = checks.iter().filter(|c| !c.passed).count();
    Ok(VerifyReport {
        suite,
        n: config.n,
        q: ws.main.ctx.q(),
        passed_count: checks.len() - failed_count,
        failed_count,
        checks,
    })
}

fn rng_for(ws: &Workspace, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(ws.config.seed ^ tag.wrapping_mul(0x2545_f491_4f6c_dd1d))
}

fn mobius(n: u32) -> i64 {
    let mut m = n;
    let mut out = 1;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            m /= d;
            if m.is_multiple_of(d) {
                return 0;
            }
            out = -out;
        }
        d += 1;
    }
    if m > 1 {
        out = -out;
    }
    out
}

fn fields_suite(f: &Field, n: usize, c: &mut Checks) -> Result<(), ExperimentError> {
    let q = f.order();
    let els: Vec<_> = f.elements().collect();
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
    let triples: Vec<(usize, usize, usize)> = if q <= 32 {
        (0..q as usize)
            .flat_map(|a| (0..q as usize).flat_map(move |b| (0..q as usize).map(move |d| (a, b, d))))
            .collect()
    } else {
        (0..20_000)
            .map(|_| (rng.gen_range(0..q as usize), rng.gen_range(0..q as usize), rng.gen_range(0..q as usize)))
            .collect()
    };
    for &(a, b, d) in &triples {
        let (a, b, d) = (els[a], els[b], els[d]);
        ok &= f.mul(a, f.add(b, d)) == f.add(f.mul(a, b), f.mul(a, d));
        ok &= f.mul(f.mul(a, b), d) == f.mul(a, f.mul(b, d));
        ok &= f.add(f.add(a, b), d) == f.add(a, f.add(b, d));
    }
    c.push("ring axioms", ok, format!("{} triples", triples.len()));

    let inv_ok = f.units().all(|a| f.inv(a).map(|b| f.mul(a, b)) == Some(f.element(1)));
    let gen_ok = f.multiplicative_order(f.generator()) == Some(q as u64 - 1);
    c.push("inverses and generator", inv_ok && gen_ok, format!("generator order {}", q - 1));

    let psi = crate::field::canonical_psi(f);
    let mut worst: f64 = 0.0;
    for &a in &els {
        for &b in &els {
            worst = worst.max((psi.value(f.add(a, b)) - psi.value(a) * psi.value(b)).norm());
        }
    }
    c.bound("psi additive", worst, 1e-12);

    let chars = mult_characters(f);
    let mut gauss: f64 = 0.0;
    for chi in chars.iter().filter(|x| !x.is_trivial()) {
        let g: Complex64 = f.units().map(|x| chi.value(x) * psi.value(x)).sum();
        gauss = gauss.max((g.norm() - (q as f64).sqrt()).abs());
    }
    c.bound("gauss sum modulus sqrt(q)", gauss, 1e-9);

    let mut orth: f64 = 0.0;
    for a in &chars {
        for b in &chars {
            let s: Complex64 = f.units().map(|x| a.value(x) * b.value(x).conj()).sum();
            let want = if a == b { q as f64 - 1.0 } else { 0.0 };
            orth = orth.max((s - want).norm());
        }
    }
    c.bound("character orthogonality", orth, 1e-9);

    let big_order = (q as u64).pow(n as u32);
    if big_order <= crate::field::MAX_FIELD_ORDER as u64 {
        let big = make_field(f.characteristic(), f.degree() * n as u32)?;
        let orbits = crate::field::frobenius_orbits(&big, f)?;
        let divisors: Vec<u32> = (1..=n as u32).filter(|d| (n as u32).is_multiple_of(*d)).collect();
        let expected: i64 =
            divisors.iter().map(|&d| mobius(d) * ((q as i64).pow(n as u32 / d) - 1)).sum::<i64>() / n as i64;
        c.push(
            "regular frobenius orbits",
            orbits.regular_count() as i64 == expected,
            format!("{} regular orbits, Moebius count {}", orbits.regular_count(), expected),
        );
    } else {
        c.push("regular frobenius orbits", true, format!("skipped: q^n = {big_order} beyond field tables"));
    }
    Ok(())
}

fn group_suite(ws: &Workspace, c: &mut Checks) -> Result<(), ExperimentError> {
    let ctx = &ws.main.ctx;
    let elements = ctx.elements()?;
    c.push(
        "group order",
        elements.len() as u64 == ctx.order(),
        format!("{} enumerated, |GL_n| = {}", elements.len(), ctx.order()),
    );
    let n = ctx.rank();
    let q = ctx.q() as u64;
    let expect: u64 = (1..=n as u32).map(|i| q.pow(i) - 1).product();
    c.push(
        "coset count",
        ctx.cosets().len() as u64 == expect && expect == ctx.order() / ctx.unipotent_order(),
        format!("|U\\G| = {}", ctx.cosets().len()),
    );

    let mut rng = rng_for(ws, 1);
    let mut locate_ok = true;
    let mut inverse_ok = true;
    for _ in 0..SAMPLES {
        let g = ctx.random_element(&mut rng);
        let (rep, s) = ctx.locate(&g);
        let u = ctx.mul(&g, &ctx.inverse(ctx.cosets().rep(rep)));
        locate_ok &= u.is_unipotent_upper() && ctx.superdiagonal_sum(&u) == s;
        inverse_ok &= ctx.mul(&g, &ctx.inverse(&g)).is_identity();
    }
    c.push("coset location", locate_ok, format!("{SAMPLES} samples: g = u c with psi_n(u) recorded"));
    c.push("inverse", inverse_ok, format!("{SAMPLES} samples"));

    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let a = ctx.random_unipotent(&mut rng);
        let b = ctx.random_unipotent(&mut rng);
        let lhs = ctx.psi_n(&ctx.mul(&a, &b))?;
        worst = worst.max((lhs - ctx.psi_n(&a)? * ctx.psi_n(&b)?).norm());
    }
    c.bound("psi_n multiplicative", worst, 1e-12);
    Ok(())
}

fn decomposition_suite(ws: &Workspace, c: &mut Checks) -> Result<(), ExperimentError> {
    let ctx = &ws.main.ctx;
    let cells = height_cells_by_enumeration(ctx)?;
    let elements = ctx.elements()?;
    let mut seen = vec![0u8; elements.len()];
    let mut agree = true;
    for (i, cell) in cells.iter().enumerate() {
        for &id in cell {
            seen[id] += 1;
            agree &= height(ctx, &elements[id]) == i;
        }
    }
    let disjoint = seen.iter().all(|&k| k == 1);
    c.push(
        "height partition",
        disjoint && agree,
        format!(
            "cell sizes {:?}, disjoint cover: {disjoint}, height function agrees: {agree}",
            cells.iter().map(Vec::len).collect::<Vec<_>>()
        ),
    );
    let cover = refined_cover_check(ctx)?;
    c.push(
        "refined cover",
        cover.complete(),
        format!("{}/{} covered, {} uncovered", cover.covered, cover.group_order, cover.uncovered_count),
    );
    Ok(())
}

fn spectral_suite(ws: &Workspace, c: &mut Checks) -> Result<(), ExperimentError> {
    let inv = &ws.main;
    let report = inventory_report(&ws.field, inv)?;
    c.push(
        "dimension sum",
        report.dimension_sum == report.module_dim,
        format!("sum of dimensions {} vs |U\\G| = {}", report.dimension_sum, report.module_dim),
    );
    c.push(
        "component count",
        inv.components.len() == inv.module.hecke().dim(),
        format!("{} components, Hecke dimension {}", inv.components.len(), inv.module.hecke().dim()),
    );
    c.bound("hecke commutators", inv.module.max_commutator_norm(), TOL);
    c.bound("joint eigenvectors", inv.diagnostics.max_joint_residual, TOL);
    c.push(
        "cuspidal inventory",
        report.oracle_agrees,
        format!(
            "{} cuspidal (oracle {}), dimension {}, central exponents {:?}",
            report.cuspidal_count, report.oracle.count, report.oracle.dimension, report.oracle.central_exponents
        ),
    );
    Ok(())
}

fn bessel_suite(ws: &Workspace, c: &mut Checks) -> Result<(), ExperimentError> {
    let inv = &ws.main;
    let ctx = &inv.ctx;
    let one = ctx.identity();
    let worst_one = inv.components.iter().map(|k| (k.bessel_at(&one) - 1.0).norm()).fold(0.0, f64::max);
    c.bound("J(1) = 1", worst_one, 1e-10);

    let elements = ctx.elements()?;
    let sym = inv.components.iter().map(|k| k.symmetry_defect(elements.iter())).fold(0.0, f64::max);
    c.bound("conjugation symmetry", sym, TOL);

    let mut support_ok = true;
    let mirabolic = ctx.mirabolic_elements()?;
    for k in inv.components.iter().filter(|k| k.cuspidal) {
        for m in &mirabolic {
            support_ok &= (k.bessel_at(m).norm() > TOL) == m.is_unipotent_upper();
        }
    }
    c.push("cuspidal support on P_n", support_ok, "J(m) != 0 exactly for m in U_n".into());

    if elements.len() <= CHARACTER_ORACLE_BOUND {
        let traced = generic_bessel_functions(ctx, ws.config.seed)?;
        let mut used = vec![false; traced.len()];
        let mut worst: f64 = 0.0;
        let mut matched = traced.len() == inv.components.len();
        for k in &inv.components {
            let best = traced
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, (_, j))| {
                    let d = elements.iter().zip(j).map(|(g, v)| (k.bessel_at(g) - v).norm()).fold(0.0, f64::max);
                    (i, d)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((i, d)) => {
                    used[i] = true;
                    worst = worst.max(d);
                }
                None => matched = false,
            }
        }
        c.push(
            "trace-sum oracle",
            matched && worst <= TOL,
            format!("{} generic characters, max deviation {worst:.3e}", traced.len()),
        );
    } else {
        c.push("trace-sum oracle", true, format!("skipped: |G| = {} above {CHARACTER_ORACLE_BOUND}", elements.len()));
    }

    // Splitting with psi^{-1} yields the pointwise conjugates.
    let conj_ctx = ctx.with_conjugate_psi();
    let module = GGModule::new(&conj_ctx)?;
    let (conj, _) = module.split_generic(&SplitOptions { seed: ws.config.seed ^ 0xc0, ..SplitOptions::default() })?;
    let reps = ctx.cosets().len();
    let mut worst: f64 = 0.0;
    for k in &inv.components {
        let d = conj
            .iter()
            .map(|m| (0..reps).map(|i| (m.bessel.values()[i] - k.bessel.values()[i].conj()).norm()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    c.push(
        "inverse character conjugates",
        conj.len() == inv.components.len() && worst <= TOL,
        format!("max deviation {worst:.3e}"),
    );
    Ok(())
}

fn zeta_suite(ws: &mut Workspace, c: &mut Checks) -> Result<(), ExperimentError> {
    let n = ws.config.n;
    if n < 2 {
        c.push("zeta", true, "skipped: no twists below rank 1".into());
        return Ok(());
    }
    ws.ensure_twists(n - 1)?;
    let mut rng = rng_for(ws, 2);
    let ctx = ws.main.ctx.clone();
    let pis = ws.main.cuspidals();
    let pi = pis.first().unwrap_or(&ws.main.components[0]).clone();

    let mut inv_dev: f64 = 0.0;
    let mut equi_dev: f64 = 0.0;
    for _ in 0..20 {
        let w = WhittakerFunction::translate_of(&pi, &ctx.random_element(&mut rng));
        let wt = w.tilde();
        let wtt = wt.tilde();
        for _ in 0..10 {
            let g = ctx.random_element(&mut rng);
            inv_dev = inv_dev.max((wtt.eval(&g) - w.eval(&g)).norm());
            let u = ctx.random_unipotent(&mut rng);
            let want = ctx.psi_n(&u)?.conj() * wt.eval(&g);
            equi_dev = equi_dev.max((wt.eval(&ctx.mul(&u, &g)) - want).norm());
        }
    }
    c.bound("tilde involution", inv_dev, 1e-12);
    c.bound("tilde equivariance", equi_dev, 1e-12);

    let mut bilinear: f64 = 0.0;
    let mut shuffle: f64 = 0.0;
    let mut anchor: f64 = 0.0;
    for r in 1..n {
        let tinv = ws.twist_inventory(r);
        let rctx = tinv.ctx.clone();
        for tau in &tinv.components {
            let tb = bessel_in_inverse_model(&tau.bessel);
            for j in 0..n - r {
                let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let w1 = WhittakerFunction::translate_of(&pi, &ctx.random_element(&mut rng));
                let w2 = WhittakerFunction::translate_of(&pi, &ctx.random_element(&mut rng));
                let wt = WhittakerFunction::from_bessel(tau.id, tb.clone(), &rctx.random_element(&mut rng));
                let combo = w1.scale(a).add(&w2).expect("same source");
                let lhs = zeta(&combo, &wt, j)?;
                let rhs = a * zeta(&w1, &wt, j)? + zeta(&w2, &wt, j)?;
                bilinear = bilinear.max((lhs - rhs).norm());

                let shuffled: Vec<_> =
                    rctx.cosets().reps().iter().map(|g| rctx.mul(&rctx.random_unipotent(&mut rng), g)).collect();
                let z0 = zeta(&w1, &wt, j)?;
                let z1 = zeta_over(&w1, &wt, j, &shuffled)?;
                shuffle = shuffle.max((z0 - z1).norm());
            }
            if r == n - 1 {
                for p in &pis {
                    let w = WhittakerFunction::translate_of(p, &ctx.identity());
                    let wt = WhittakerFunction::from_bessel(tau.id, tb.clone(), &rctx.identity());
                    anchor = anchor.max((zeta(&w, &wt, 0)? - 1.0).norm());
                }
            }
        }
    }
    c.bound("bilinearity", bilinear, 1e-9);
    c.bound("coset representative invariance", shuffle, 1e-9);
    c.bound("Z(J_pi, J_tau; 0) = 1 for cuspidal pi, rank n-1", anchor, 1e-9);
    Ok(())
}

fn gamma_suite(ws: &mut Workspace, c: &mut Checks) -> Result<(), ExperimentError> {
    let n = ws.config.n;
    if n < 2 {
        c.push("gamma", true, "skipped: no twists below rank 1".into());
        return Ok(());
    }
    let pis = ws.main.cuspidals();
    let twists = ws.twist_family(n - 1, TwistPolicy::AllGeneric)?;
    let records = gamma_table(&pis, &twists, n - 1, ws.config.seed)?;
    let worst = records.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let probes_ok = records.iter().all(|r| {
        r.probes >= crate::rankin_selberg::MIN_PROBES
            && r.j_values.first() == Some(&0)
            && r.j_values.last() == Some(&(n - r.tau_rank - 1))
    });
    c.bound("functional-equation residual", worst, crate::rankin_selberg::RESIDUAL_TOL);
    c.push(
        "probe coverage",
        probes_ok,
        format!("{} records, each with >= 8 checked probes covering j = 0 and j = n-r-1", records.len()),
    );

    let mut worst_prod: f64 = 0.0;
    let mut worst_mod: f64 = 0.0;
    for pi in &pis {
        for fam in &twists {
            for tau in fam {
                let a = extract_gamma(pi, tau, ws.config.seed)?;
                let b = extract_gamma_dual(pi, tau, ws.config.seed)?;
                let prod = a.gamma() * b.gamma();
                worst_prod = worst_prod.max((prod.norm() - 1.0).abs());
                worst_mod = worst_mod.max((a.gamma().norm() - 1.0).abs());
            }
        }
    }
    c.bound("double extraction |gamma gamma'| = 1", worst_prod, 1e-6);
    c.bound("|gamma| = 1", worst_mod, 1e-6);
    Ok(())
}
