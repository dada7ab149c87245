//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p converse-core --test acceptance`.

use std::time::{Duration, Instant};

use converse_core::character_oracle::generic_bessel_functions;
use converse_core::experiment::{
    run_converse, run_gamma_table, run_height_audit, run_inventory, run_special_pair_audit, Envelope, ExperimentConfig,
    TwistPolicy,
};
use converse_core::field::make_field;
use converse_core::gelfand_graev::{GGModule, SplitOptions};
use converse_core::group::{gl_order, height, height_cells_by_enumeration, refined_cover_check, GroupContext};
use converse_core::rankin_selberg::{extract_gamma_dual, gamma_table, RESIDUAL_TOL};

const SPECTRAL_CONFIGS: [(usize, u32); 6] = [(2, 2), (2, 3), (2, 5), (3, 2), (3, 3), (4, 2)];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("runtime {elapsed:.1?} exceeds {limit:?}"))
}

fn ctx(n: usize, p: u32) -> GroupContext {
    GroupContext::new(&make_field(p, 1).unwrap(), n).unwrap()
}

/// Sum of generic dimensions equals |G|/|U|; Hecke operators commute.
fn spectral_exhaustion() -> Outcome {
    let start = Instant::now();
    let mut worst_comm: f64 = 0.0;
    for (n, p) in SPECTRAL_CONFIGS {
        let c = ctx(n, p);
        let module = GGModule::new(&c).map_err(|e| e.to_string())?;
        let (comps, _) = module.split_generic(&SplitOptions::default()).map_err(|e| e.to_string())?;
        let q = p as u64;
        let coset_count = gl_order(n, q) / q.pow((n * (n - 1) / 2) as u32);
        let total: usize = comps.iter().map(|c| c.dimension).sum();
        ensure(total as u64 == coset_count, || {
            format!("({n},{p}): dimensions sum to {total}, expected {coset_count}")
        })?;
        let comm = module.max_commutator_norm();
        ensure(comm <= 1e-8, || format!("({n},{p}): commutator norm {comm:e}"))?;
        worst_comm = worst_comm.max(comm);
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("6 configurations exhausted, max commutator {worst_comm:.2e}, {:.1?}", start.elapsed()))
}

/// Regular orbits of `x -> q x` on `Z/(q^n - 1)`, counted by brute force.
fn regular_orbit_count(q: u64, n: u32) -> usize {
    let m = q.pow(n) - 1;
    let regular = (0..m)
        .filter(|&e| {
            let mut x = e;
            let mut len = 0;
            loop {
                x = x * q % m;
                len += 1;
                if x == e {
                    break;
                }
            }
            len == n
        })
        .count();
    regular / n as usize
}

/// Cuspidal counts and dimensions against the Frobenius-orbit count.
fn cuspidal_inventory() -> Outcome {
    let start = Instant::now();
    let mut summary = Vec::new();
    for (n, p) in SPECTRAL_CONFIGS {
        let q = p as u64;
        let report = run_inventory(&ExperimentConfig::new(n, p, 1)).map_err(|e| e.to_string())?;
        let expected_count = regular_orbit_count(q, n as u32);
        let expected_dim: u64 = (1..n as u32).map(|i| q.pow(i) - 1).product();
        let cusp: Vec<_> = report.components.iter().filter(|c| c.cuspidal).collect();
        ensure(cusp.len() == expected_count, || {
            format!("({n},{p}): {} cuspidal, oracle {expected_count}", cusp.len())
        })?;
        ensure(cusp.iter().all(|c| c.dimension as u64 == expected_dim), || {
            format!("({n},{p}): cuspidal dimensions differ from {expected_dim}")
        })?;
        ensure(report.oracle_agrees, || format!("({n},{p}): central characters disagree with orbit restrictions"))?;
        summary.push(format!("({n},{p}):{}x{}", cusp.len(), expected_dim));
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{} in {:.1?}", summary.join(" "), start.elapsed()))
}

/// Spectral Bessel functions equal the character trace sums.
fn bessel_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, p) in [(2, 2), (2, 3)] {
        let c = ctx(n, p);
        let comps = converse_core::gelfand_graev::split_generic(&c).map_err(|e| e.to_string())?;
        let traced = generic_bessel_functions(&c, 11).map_err(|e| e.to_string())?;
        ensure(traced.len() == comps.len(), || {
            format!("({n},{p}): {} generic characters vs {} components", traced.len(), comps.len())
        })?;
        let elements = c.elements().unwrap();
        let mut used = vec![false; traced.len()];
        for comp in &comps {
            let (i, d) = traced
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, (_, j))| {
                    (i, elements.iter().zip(j).map(|(g, v)| (comp.bessel_at(g) - v).norm()).fold(0.0, f64::max))
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[i] = true;
            worst = worst.max(d);
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:e}"))?;
    Ok(format!("(2,2) and (2,3) matched bijectively, max deviation {worst:.2e}"))
}

/// Height cells partition the group; the refined cover has no gaps.
fn decompositions() -> Outcome {
    let start = Instant::now();
    for (n, p) in [(2, 3), (3, 2), (3, 3), (4, 2)] {
        let c = ctx(n, p);
        let cells = height_cells_by_enumeration(&c).map_err(|e| e.to_string())?;
        let elements = c.elements().unwrap();
        let mut hits = vec![0u8; elements.len()];
        for (i, cell) in cells.iter().enumerate() {
            for &id in cell {
                hits[id] += 1;
                ensure(height(&c, &elements[id]) == i, || format!("({n},{p}): height mismatch"))?;
            }
        }
        ensure(hits.iter().all(|&h| h == 1), || format!("({n},{p}): cells do not partition G"))?;
        let cover = refined_cover_check(&c).map_err(|e| e.to_string())?;
        ensure(cover.complete(), || format!("({n},{p}): {} elements uncovered", cover.uncovered_count))?;
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("4 configurations exact and fully covered in {:.1?}", start.elapsed()))
}

/// Global conjugation symmetry and cuspidal agreement on the mirabolic.
fn special_pairs() -> Outcome {
    let mut lines = Vec::new();
    for (n, p) in [(2, 3), (2, 5), (3, 2), (3, 3), (4, 2)] {
        let r = run_special_pair_audit(&ExperimentConfig::new(n, p, 1)).map_err(|e| e.to_string())?;
        ensure(r.max_symmetry_defect <= 1e-8, || format!("({n},{p}): symmetry defect {:e}", r.max_symmetry_defect))?;
        ensure(r.max_pair_deviation <= 1e-8, || format!("({n},{p}): P_n deviation {:e}", r.max_pair_deviation))?;
        let order = gl_order(n, p as u64) as usize;
        ensure(r.symmetry_exhaustive == order, || format!("({n},{p}): symmetry not exhaustive"))?;
        if n >= 4 {
            ensure(r.symmetry_sampled >= 100_000 && r.mirabolic_sampled >= 100_000, || {
                format!("({n},{p}): fewer than 1e5 samples")
            })?;
        }
        lines.push(format!("({n},{p}) {} pairs", r.pairs.len()));
    }
    let h = run_height_audit(&ExperimentConfig::new(3, 2, 1)).map_err(|e| e.to_string())?;
    ensure(h.violations == 0 && h.reconstruction_violations == 0, || "height audit violation at (3,2)".into())?;
    Ok(lines.join(", "))
}

/// Every gamma record is well defined and the double extraction returns 1.
fn gamma_well_defined() -> Outcome {
    let start = Instant::now();
    let mut records = 0;
    let mut worst_res: f64 = 0.0;
    let mut worst_prod: f64 = 0.0;
    for (n, p) in SPECTRAL_CONFIGS {
        let f = make_field(p, 1).unwrap();
        let pis: Vec<_> = converse_core::gelfand_graev::split_generic(&GroupContext::new(&f, n).unwrap())
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|c| c.cuspidal)
            .collect();
        let twists: Vec<Vec<_>> = (1..n)
            .map(|r| converse_core::gelfand_graev::split_generic(&GroupContext::new(&f, r).unwrap()).unwrap())
            .collect();
        let table = gamma_table(&pis, &twists, n - 1, 0).map_err(|e| e.to_string())?;
        for rec in &table {
            ensure(rec.max_residual <= RESIDUAL_TOL, || {
                format!(
                    "({n},{p}) pi {} tau ({},{}): residual {:e}",
                    rec.pi_id, rec.tau_rank, rec.tau_id, rec.max_residual
                )
            })?;
            ensure(rec.probes >= 8, || format!("({n},{p}): only {} probes", rec.probes))?;
            ensure(rec.j_values.contains(&0) && rec.j_values.contains(&(n - rec.tau_rank - 1)), || {
                format!("({n},{p}): probes miss an extreme j")
            })?;
            worst_res = worst_res.max(rec.max_residual);
            let pi = pis.iter().find(|c| c.id == rec.pi_id).unwrap();
            let tau = twists[rec.tau_rank - 1].iter().find(|c| c.id == rec.tau_id).unwrap();
            let dual = extract_gamma_dual(pi, tau, 0).map_err(|e| e.to_string())?;
            let prod = (rec.gamma() * dual.gamma()).norm();
            ensure((prod - 1.0).abs() <= 1e-6, || format!("({n},{p}): |gamma gamma'| = {prod}"))?;
            worst_prod = worst_prod.max((prod - 1.0).abs());
        }
        records += table.len();
    }
    Ok(format!(
        "{records} records, max residual {worst_res:.2e}, max ||gamma gamma'|-1| {worst_prod:.2e}, {:.1?}",
        start.elapsed()
    ))
}

/// The converse experiment separates every same-central-character pair.
fn converse_experiment() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for (n, p, r) in [(2, 3, 1), (3, 2, 1), (3, 3, 1), (4, 2, 2)] {
        let mut cfg = ExperimentConfig::new(n, p, 1);
        cfg.r_max = Some(r);
        let rep = run_converse(&cfg).map_err(|e| e.to_string())?;
        ensure(rep.failures == 0 && rep.ill_defined_gammas == 0, || {
            format!("({n},{p}) r_max={r}: {} failures, {} ill-defined", rep.failures, rep.ill_defined_gammas)
        })?;
        lines.push(format!("({n},{p},r<={r}) {} pairs", rep.pair_count));
    }
    within(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!("0 failures: {} in {:.1?}", lines.join(", "), start.elapsed()))
}

/// Reports are byte-identical across runs and thread counts.
fn determinism() -> Outcome {
    let render = |threads: usize| -> Result<Vec<String>, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| {
            let mut cfg = ExperimentConfig::new(4, 2, 1);
            cfg.r_max = Some(2);
            cfg.seed = 17;
            let conv = run_converse(&cfg).map_err(|e| e.to_string())?;
            cfg.twist_policy = TwistPolicy::AllGeneric;
            let gam = run_gamma_table(&cfg).map_err(|e| e.to_string())?;
            let inv_cfg = ExperimentConfig::new(3, 3, 1);
            let inv = run_inventory(&inv_cfg).map_err(|e| e.to_string())?;
            Ok(vec![
                Envelope::new(&cfg, &conv).to_json(),
                Envelope::new(&cfg, &gam).to_json(),
                Envelope::new(&inv_cfg, &inv).to_json(),
            ])
        })
    };
    let a = render(1)?;
    let b = render(4)?;
    let c = render(4)?;
    ensure(a == b && b == c, || "structured reports differ between runs".into())?;
    Ok(format!("3 reports x 3 runs identical ({} bytes)", a.iter().map(String::len).sum::<usize>()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("spectral exhaustion", spectral_exhaustion),
        ("cuspidal inventory vs Frobenius orbits", cuspidal_inventory),
        ("Bessel trace-sum oracle", bessel_oracle),
        ("height partition and refined cover", decompositions),
        ("conjugation symmetry and special pairs", special_pairs),
        ("gamma well-definedness", gamma_well_defined),
        ("converse experiment", converse_experiment),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name} [{elapsed:.1?}]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name} [{elapsed:.1?}]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
