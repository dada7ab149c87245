use converse_core::character_oracle::{generic_bessel_functions, irreducible_characters, whittaker_multiplicity};
use converse_core::field::make_field;
use converse_core::gelfand_graev::{central_character_defect, split_generic, GGModule, SpectralError, SplitOptions};
use converse_core::group::{GroupContext, GroupElement};
use num_complex::Complex64;

fn ctx(n: usize, p: u32, k: u32) -> GroupContext {
    GroupContext::new(&make_field(p, k).unwrap(), n).unwrap()
}

fn dims(c: &GroupContext) -> Vec<usize> {
    let mut d: Vec<_> = split_generic(c).unwrap().iter().map(|x| x.dimension).collect();
    d.sort_unstable();
    d
}

#[test]
fn component_dimensions_match_character_degrees() {
    for (n, p) in [(2, 2), (2, 3), (3, 2), (2, 5)] {
        let c = ctx(n, p, 1);
        let mut degrees: Vec<_> = irreducible_characters(&c, 9)
            .unwrap()
            .into_iter()
            .filter(|chi| (whittaker_multiplicity(&c, chi) - 1.0).norm() < 1e-6)
            .map(|chi| chi.degree)
            .collect();
        degrees.sort_unstable();
        assert_eq!(dims(&c), degrees, "({n},{p})");
    }
}

#[test]
fn module_is_multiplicity_free() {
    for (n, p, k) in [(2, 3, 1), (3, 2, 1), (3, 3, 1), (2, 2, 2)] {
        let c = ctx(n, p, k);
        let module = GGModule::new(&c).unwrap();
        let (comps, diag) = module.split_generic(&SplitOptions::default()).unwrap();
        assert_eq!(comps.len(), module.hecke().dim());
        assert_eq!(diag.hecke_dim, comps.len());
        assert_eq!(diag.module_dim, c.cosets().len());
        assert!(module.max_commutator_norm() < 1e-8);
        assert!(diag.max_joint_residual < 1e-8);
    }
}

/// Cuspidal iff no vector is fixed by the unipotent radical of a proper
/// standard parabolic, read off from `sum_{v in N} chi(v)`.
fn cuspidal_by_characters(c: &GroupContext, values: &[Complex64]) -> bool {
    (1..c.rank()).all(|a| {
        let s: Complex64 = c.radical_elements(a).unwrap().iter().map(|v| values[c.element_id(v).unwrap()]).sum();
        s.norm() < 1e-8
    })
}

#[test]
fn cuspidal_flags_match_radical_character_sums() {
    for (n, p) in [(2, 3), (3, 2), (2, 5)] {
        let c = ctx(n, p, 1);
        let comps = split_generic(&c).unwrap();
        let elements = c.elements().unwrap();
        let traced = generic_bessel_functions(&c, 4).unwrap();
        for comp in &comps {
            let (chi, _) = traced
                .iter()
                .find(|(_, j)| elements.iter().zip(j).all(|(g, v)| (comp.bessel_at(g) - v).norm() < 1e-8))
                .expect("matched character");
            assert_eq!(comp.cuspidal, cuspidal_by_characters(&c, &chi.values), "({n},{p}) component {}", comp.id);
            assert_eq!(comp.dimension, chi.degree);
        }
    }
}

#[test]
fn bessel_functions_are_normalized_and_equivariant() {
    let c = ctx(3, 3, 1);
    for comp in split_generic(&c).unwrap() {
        assert!((comp.bessel_at(&c.identity()) - 1.0).norm() < 1e-10);
        for u in c.unipotent_generators() {
            for g in [c.alpha(), c.weyl_longest(), c.w_nr(1).unwrap()] {
                let left = comp.bessel_at(&c.mul(&u, &g));
                let right = comp.bessel_at(&c.mul(&g, &u));
                let psi = c.psi_n(&u).unwrap();
                assert!((left - psi * comp.bessel_at(&g)).norm() < 1e-10);
                assert!((right - psi * comp.bessel_at(&g)).norm() < 1e-10);
            }
            let z = GroupElement::scalar(3, c.field().element(2));
            assert!(
                (comp.bessel_at(&c.mul(&z, &u)) - comp.omega(c.field().element(2)) * comp.bessel_at(&u)).norm() < 1e-10
            );
        }
    }
}

#[test]
fn central_characters_and_contragredients() {
    let c = ctx(2, 5, 1);
    let comps = split_generic(&c).unwrap();
    let units: Vec<_> = c.field().units().collect();
    for comp in &comps {
        let omega: Vec<_> = units.iter().map(|&z| comp.omega(z)).collect();
        assert!(central_character_defect(&c, &omega) < 1e-8);
        let dual = comp.contragredient();
        for &z in &units {
            assert!((dual.omega(z) - comp.omega(z).conj()).norm() < 1e-10);
        }
        assert!(comp.symmetry_defect(c.elements().unwrap()) < 1e-8);
        let dual_dual = dual.contragredient();
        for g in c.elements().unwrap().iter().step_by(17) {
            assert!((dual_dual.bessel_at(g) - comp.bessel_at(g)).norm() < 1e-12);
        }
    }
}

#[test]
fn splitting_is_reproducible_across_seeds() {
    let c = ctx(3, 3, 1);
    let module = GGModule::new(&c).unwrap();
    let a = module.split_generic(&SplitOptions { seed: 1, ..SplitOptions::default() }).unwrap().0;
    let b = module.split_generic(&SplitOptions { seed: 2, ..SplitOptions::default() }).unwrap().0;
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.dimension, y.dimension);
        assert_eq!(x.cuspidal, y.cuspidal);
        for g in c.cosets().reps().iter().step_by(7) {
            assert!((x.bessel_at(g) - y.bessel_at(g)).norm() < 1e-8);
        }
    }
}

#[test]
fn known_inventories() {
    assert_eq!(dims(&ctx(2, 2, 1)), vec![1, 2]);
    assert_eq!(dims(&ctx(2, 3, 1)), vec![2, 2, 2, 3, 3, 4]);
    assert_eq!(dims(&ctx(3, 2, 1)), vec![3, 3, 7, 8]);
    assert_eq!(dims(&ctx(1, 5, 1)), vec![1, 1, 1, 1]);
}

#[test]
fn oversized_modules_are_rejected() {
    let c = ctx(4, 3, 1);
    assert!(matches!(GGModule::new(&c), Err(SpectralError::TooLarge { .. })));
}
