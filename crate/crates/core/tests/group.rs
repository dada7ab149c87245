use std::sync::OnceLock;

use converse_core::field::{make_field, FieldElement};
use converse_core::group::{gl_order, height, unipotent_order, GroupContext, GroupElement};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(n: usize, p: u32, k: u32) -> GroupContext {
    GroupContext::new(&make_field(p, k).unwrap(), n).unwrap()
}

fn shared() -> &'static [GroupContext] {
    static CTXS: OnceLock<Vec<GroupContext>> = OnceLock::new();
    CTXS.get_or_init(|| vec![ctx(3, 3, 1), ctx(4, 2, 1), ctx(3, 2, 2), ctx(4, 3, 1)])
}

/// Random element of the parabolic with last row `(0, ..., 0, *)`.
fn random_q<R: Rng>(c: &GroupContext, rng: &mut R) -> GroupElement {
    let n = c.rank();
    let f = c.field();
    loop {
        let mut e: Vec<FieldElement> = (0..n * n).map(|_| f.element(rng.gen_range(0..c.q()))).collect();
        for j in 0..n - 1 {
            e[(n - 1) * n + j] = FieldElement::ZERO;
        }
        if let Some(g) = GroupElement::from_entries(f, n, &e) {
            return g;
        }
    }
}

#[test]
fn height_is_invariant_under_u_and_q_translates() {
    for (n, p, k) in [(2, 5, 1), (3, 3, 1), (4, 2, 1), (3, 2, 2)] {
        let c = ctx(n, p, k);
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 101 + p as u64);
        for _ in 0..1500 {
            let g = c.random_element(&mut rng);
            let u = c.random_unipotent(&mut rng);
            let q = random_q(&c, &mut rng);
            assert!(q.in_parabolic_q());
            assert_eq!(height(&c, &g), height(&c, &c.mul(&c.mul(&u, &g), &q)), "({n},{p}^{k}) at {g:?}");
        }
    }
}

#[test]
fn height_of_alpha_powers() {
    let c = ctx(4, 3, 1);
    let alpha = c.alpha();
    let mut a = c.identity();
    for i in 0..4 {
        assert_eq!(height(&c, &a), i);
        a = c.mul(&a, &alpha);
    }
    assert!(a.is_identity());
}

#[test]
fn locate_recovers_unipotent_factor() {
    for (n, p, k) in [(2, 3, 1), (3, 2, 1), (3, 3, 1), (4, 2, 1), (2, 2, 2)] {
        let c = ctx(n, p, k);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let g = c.random_element(&mut rng);
            let (idx, s) = c.locate(&g);
            let rep = c.cosets().rep(idx);
            let u = c.mul(&g, &c.inverse(rep));
            assert!(u.is_unipotent_upper());
            assert!(c.superdiagonal_sum(&u) == s);
            let v = c.random_unipotent(&mut rng);
            assert_eq!(c.locate(&c.mul(&v, &g)).0, idx);
        }
    }
}

#[test]
fn coset_counts_match_orders() {
    for (n, p, k) in [(1, 5, 1), (2, 2, 1), (2, 3, 1), (3, 2, 1), (3, 3, 1), (4, 2, 1), (2, 2, 2)] {
        let c = ctx(n, p, k);
        let q = c.q() as u64;
        assert_eq!(c.cosets().len() as u64, gl_order(n, q) / unipotent_order(n, q));
        assert_eq!(c.unipotent_elements().len() as u64, unipotent_order(n, q));
    }
    assert_eq!(gl_order(2, 3), 48);
    assert_eq!(gl_order(3, 2), 168);
}

#[test]
fn enumeration_matches_order() {
    for (n, p) in [(2, 3), (3, 2), (2, 5)] {
        let c = ctx(n, p, 1);
        let elements = c.elements().unwrap();
        assert_eq!(elements.len() as u64, c.order());
        for (i, g) in elements.iter().enumerate() {
            assert_eq!(c.element_id(g), Some(i));
        }
    }
}

#[test]
fn weyl_elements() {
    let c = ctx(4, 3, 1);
    let w = c.weyl_longest();
    assert!(c.mul(&w, &w).is_identity());
    let w2 = c.w_nr(2).unwrap();
    assert_eq!(w2.top_left(c.field(), 2), Some(GroupElement::identity(2)));
    assert!(c.w_nr(0).is_err() && c.w_nr(4).is_err());
}

proptest! {
    #[test]
    fn psi_n_is_a_character_of_u(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in &shared()[..3] {
            let u = c.random_unipotent(&mut rng);
            let v = c.random_unipotent(&mut rng);
            let lhs = c.psi_n(&c.mul(&u, &v)).unwrap();
            let rhs: Complex64 = c.psi_n(&u).unwrap() * c.psi_n(&v).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_and_determinant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = &shared()[3];
        let f = c.field();
        let g = c.random_element(&mut rng);
        let h = c.random_element(&mut rng);
        prop_assert!(c.mul(&g, &c.inverse(&g)).is_identity());
        let dg = g.determinant(f);
        let dh = h.determinant(f);
        prop_assert!(c.mul(&g, &h).determinant(f) == f.mul(dg, dh));
        prop_assert!(c.mul(&g, &h).transpose() == c.mul(&h.transpose(), &g.transpose()));
    }
}

#[test]
fn psi_n_rejects_non_unipotent() {
    let c = ctx(2, 3, 1);
    let f = c.field();
    let g = GroupElement::diagonal(f, &[f.element(2), f.element(1)]).unwrap();
    assert!(c.psi_n(&g).is_err());
    assert!(GroupElement::from_ints(f, &[&[1, 1], &[1, 1]]).is_none());
}
