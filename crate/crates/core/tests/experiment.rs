use converse_core::experiment::{
    central_character_probe, cuspidal_oracle, run_converse, run_gamma_table, run_height_audit, run_inventory,
    run_special_pair_audit, run_verify, Envelope, ExperimentConfig, ExperimentError, Report, Suite, TwistPolicy,
    SCHEMA_VERSION,
};
use converse_core::field::make_field;

fn cfg(n: usize, p: u32) -> ExperimentConfig {
    ExperimentConfig::new(n, p, 1)
}

#[test]
fn converse_separates_pairs_at_small_ranks() {
    for (n, p) in [(2, 3), (2, 5), (3, 2), (3, 3)] {
        let rep = run_converse(&cfg(n, p)).unwrap();
        assert_eq!(rep.failures, 0, "({n},{p})");
        assert_eq!(rep.distinguished, rep.pair_count);
        assert!(rep.passed());
        for pair in &rep.pairs {
            let d = pair.distinguished_by.as_ref().unwrap();
            assert!(d.delta > rep.separation_tolerance);
            assert!(d.tau_rank <= rep.r_max);
        }
    }
}

#[test]
fn converse_pairs_share_central_character() {
    let rep = run_converse(&cfg(3, 3)).unwrap();
    let inv = run_inventory(&cfg(3, 3)).unwrap();
    let exponent = |id: usize| inv.components.iter().find(|c| c.id == id).unwrap().central_exponent;
    assert!(!rep.pairs.is_empty());
    for pair in &rep.pairs {
        assert_eq!(exponent(pair.pi1), exponent(pair.pi2));
        assert_eq!(exponent(pair.pi1), pair.central_exponent);
    }
    let cusp = inv.cuspidal_count;
    let mut per_class = std::collections::BTreeMap::new();
    for c in inv.components.iter().filter(|c| c.cuspidal) {
        *per_class.entry(c.central_exponent).or_insert(0usize) += 1;
    }
    let expected: usize = per_class.values().map(|m| m * (m - 1) / 2).sum();
    assert_eq!(rep.pair_count, expected);
    assert_eq!(rep.cuspidal_count, cusp);
}

#[test]
fn all_generic_twists_extend_the_table() {
    let mut c = cfg(3, 2);
    c.r_max = Some(2);
    let cusp_only = run_gamma_table(&c).unwrap();
    c.twist_policy = TwistPolicy::AllGeneric;
    let all = run_gamma_table(&c).unwrap();
    assert!(all.records.len() > cusp_only.records.len());
    assert_eq!(all.ill_defined, 0);
    assert!(all.records.iter().all(|r| (r.gamma().norm() - 1.0).abs() < 1e-8));
}

#[test]
fn special_pair_audit_is_clean() {
    for (n, p) in [(2, 3), (3, 2), (3, 3)] {
        let rep = run_special_pair_audit(&cfg(n, p)).unwrap();
        assert!(rep.passed(), "({n},{p})");
        assert!(rep.max_symmetry_defect < 1e-8);
        assert!(rep.pairs.iter().all(|pair| pair.passed));
    }
}

#[test]
fn height_audit_is_clean_and_self_pairs_agree() {
    for (n, p) in [(2, 3), (3, 2)] {
        let rep = run_height_audit(&cfg(n, p)).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.reconstruction_violations, 0);
        for row in rep.rows.iter().filter(|r| r.pi1 == r.pi2) {
            assert!(row.gammas_agree && row.bessel_agree);
            assert!(row.max_deviation < 1e-12);
        }
    }
}

#[test]
fn central_character_probe_reports_groups() {
    let rep = central_character_probe(&cfg(3, 3)).unwrap();
    assert_eq!(rep.vectors.len(), 8);
    let grouped: usize = rep.groups.iter().map(Vec::len).sum();
    assert_eq!(grouped, rep.vectors.len());
    assert!(rep.vectors.iter().all(|v| v.gammas.len() == 2));
}

#[test]
fn verify_suites_pass() {
    for (n, p) in [(2, 3), (3, 2)] {
        let rep = run_verify(&cfg(n, p), Suite::All).unwrap();
        let failed: Vec<_> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        assert!(failed.is_empty(), "({n},{p}): {failed:?}");
        assert_eq!(rep.failed_count, 0);
    }
    for name in Suite::NAMES {
        let suite: Suite = name.parse().unwrap();
        assert!(run_verify(&cfg(2, 3), suite).unwrap().passed());
    }
    let err = "nope".parse::<Suite>().unwrap_err();
    assert!(err.contains("nope") && err.contains("fields"));
}

#[test]
fn invalid_configurations_are_usage_errors() {
    let bad = [
        ExperimentConfig::new(0, 3, 1),
        ExperimentConfig::new(2, 4, 1),
        ExperimentConfig::new(2, 3, 0),
        ExperimentConfig::new(4, 3, 1),
        ExperimentConfig { r_max: Some(3), ..cfg(3, 2) },
        ExperimentConfig { tol_sep: 1e-9, ..cfg(2, 3) },
    ];
    for c in &bad {
        let err = c.validate().unwrap_err();
        assert!(err.is_usage(), "{err}");
        assert!(run_inventory(c).is_err());
    }
    assert!(matches!(cfg(4, 3).validate(), Err(ExperimentError::Config(msg)) if msg.contains("33280")));
}

#[test]
fn inventory_agrees_with_orbit_oracle() {
    for (n, p, k) in [(2, 2, 2), (3, 2, 1), (1, 7, 1)] {
        let c = ExperimentConfig::new(n, p, k);
        let rep = run_inventory(&c).unwrap();
        assert!(rep.oracle_agrees);
        let oracle = cuspidal_oracle(&make_field(p, k).unwrap(), n).unwrap();
        assert_eq!(rep.cuspidal_count, oracle.count);
        assert_eq!(rep.dimension_sum, rep.module_dim);
    }
}

#[test]
fn envelopes_are_deterministic() {
    let c = cfg(3, 3);
    let render = || {
        let rep = run_converse(&c).unwrap();
        Envelope::new(&c, &rep).to_json()
    };
    let a = render();
    assert_eq!(a, render());
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema"], SCHEMA_VERSION);
    assert_eq!(v["kind"], "converse");
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["n"], 3);
}
