//! Brute-force irreducible characters of a small `G_n`, and the Bessel
//! function `J(g) = |U|^{-1} sum_u psi_n(u)^{-1} chi(g u)` built from them.
//!
//! This is independent of the Gelfand-Graev machinery: it never looks at
//! cosets or Hecke algebras, only at conjugacy classes and the regular
//! representation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{GroupContext, GroupError};
use crate::spectral::split_hermitian;

/// Conjugacy classes as lists of element ids.
pub fn conjugacy_classes(ctx: &GroupContext) -> Result<Vec<Vec<usize>>, GroupError> {
    let elements = ctx.elements()?;
    let inverses: Vec<_> = elements.iter().map(|g| ctx.inverse(g)).collect();
    let mut class_of = vec![usize::MAX; elements.len()];
    let mut classes = Vec::new();
    for start in 0..elements.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let mut class = Vec::new();
        for (h, hi) in elements.iter().zip(&inverses) {
            let id = ctx.element_id(&ctx.mul(&ctx.mul(h, &elements[start]), hi)).expect("enumerated");
            if class_of[id] == usize::MAX {
                class_of[id] = classes.len();
                class.push(id);
            }
        }
        class.sort_unstable();
        classes.push(class);
    }
    Ok(classes)
}

/// One irreducible character, as values on element ids.
#[derive(Clone, Debug)]
pub struct Character {
    pub degree: usize,
    pub values: Vec<Complex64>,
}

/// All irreducible characters of `G_n`, from the isotypic splitting of the
/// regular representation under a random Hermitian central element.
///
/// The projection onto an isotypic block is left multiplication by the
/// central idempotent `e_chi = chi(1)/|G| sum_g chi(g^{-1}) g`, so its column
/// at the identity reads off `chi`.
pub fn irreducible_characters(ctx: &GroupContext, seed: u64) -> Result<Vec<Character>, GroupError> {
    let elements = ctx.elements()?;
    let order = elements.len();
    let classes = conjugacy_classes(ctx)?;
    let mut class_of = vec![0; order];
    for (k, c) in classes.iter().enumerate() {
        for &g in c {
            class_of[g] = k;
        }
    }
    let inv_id: Vec<usize> = elements.iter().map(|g| ctx.element_id(&ctx.inverse(g)).expect("enumerated")).collect();
    let identity = ctx.element_id(&ctx.identity()).expect("enumerated");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = vec![Complex64::new(0.0, 0.0); classes.len()];
    let mut done = vec![false; classes.len()];
    for k in 0..classes.len() {
        if done[k] {
            continue;
        }
        let kinv = class_of[inv_id[classes[k][0]]];
        if kinv == k {
            coef[k] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        } else {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            coef[k] = c;
            coef[kinv] = c.conj();
            done[kinv] = true;
        }
        done[k] = true;
    }

    // (Z f)(g) = sum_h Z(h) f(h^{-1} g).
    let mut z = DMatrix::from_element(order, order, Complex64::new(0.0, 0.0));
    for (gi, g) in elements.iter().enumerate() {
        for (hi, _) in elements.iter().enumerate() {
            let x = ctx.element_id(&ctx.mul(&elements[inv_id[hi]], g)).expect("enumerated");
            z[(gi, x)] += coef[class_of[hi]];
        }
    }
    let split = split_hermitian(z, 1e-9);
    let v = &split.eigenvectors;
    let mut chars: Vec<Character> = split
        .clusters
        .iter()
        .map(|cluster| {
            let pee: f64 = cluster.iter().map(|&k| v[(identity, k)].norm_sqr()).sum();
            let degree = (order as f64 * pee).sqrt();
            let values = (0..order)
                .map(|g| {
                    let pge: Complex64 = cluster.iter().map(|&k| v[(g, k)] * v[(identity, k)].conj()).sum();
                    pge.conj() * order as f64 / degree
                })
                .collect();
            Character { degree: degree.round() as usize, values }
        })
        .collect();
    chars.sort_by_key(|a| a.degree);
    Ok(chars)
}

/// `<chi|_U, psi_n>`: the multiplicity of `psi_n` in the restriction to `U_n`.
pub fn whittaker_multiplicity(ctx: &GroupContext, chi: &Character) -> Complex64 {
    let units = ctx.unipotent_elements();
    let sum: Complex64 = units
        .iter()
        .map(|u| chi.values[ctx.element_id(u).expect("enumerated")] * ctx.psi_n(u).expect("unipotent").conj())
        .sum();
    sum / units.len() as f64
}

/// `J(g) = |U|^{-1} sum_u psi_n(u)^{-1} chi(g u)` for every element id.
pub fn trace_bessel(ctx: &GroupContext, chi: &Character) -> Result<Vec<Complex64>, GroupError> {
    let elements = ctx.elements()?;
    let units: Vec<_> = ctx
        .unipotent_elements()
        .into_iter()
        .map(|u| {
            let w = ctx.psi_n(&u).expect("unipotent").conj();
            (u, w)
        })
        .collect();
    Ok(elements
        .iter()
        .map(|g| {
            units
                .iter()
                .map(|(u, w)| w * chi.values[ctx.element_id(&ctx.mul(g, u)).expect("enumerated")])
                .sum::<Complex64>()
                / units.len() as f64
        })
        .collect())
}

/// Trace-sum Bessel functions of all generic irreducible characters.
pub fn generic_bessel_functions(ctx: &GroupContext, seed: u64) -> Result<Vec<(Character, Vec<Complex64>)>, GroupError> {
    let chars = irreducible_characters(ctx, seed)?;
    let mut out = Vec::new();
    for chi in chars {
        let m = whittaker_multiplicity(ctx, &chi);
        if (m - Complex64::new(1.0, 0.0)).norm() < 1e-6 {
            let j = trace_bessel(ctx, &chi)?;
            out.push((chi, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn gl2_f2_is_s3() {
        let f = make_field(2, 1).unwrap();
        let ctx = GroupContext::new(&f, 2).unwrap();
        assert_eq!(conjugacy_classes(&ctx).unwrap().len(), 3);
        let chars = irreducible_characters(&ctx, 1).unwrap();
        let degrees: Vec<_> = chars.iter().map(|c| c.degree).collect();
        assert_eq!(degrees, vec![1, 1, 2]);
        // Sum of squared degrees is the group order.
        assert_eq!(degrees.iter().map(|d| d * d).sum::<usize>(), 6);
    }

    #[test]
    fn gl2_f3_character_table_shape() {
        let f = make_field(3, 1).unwrap();
        let ctx = GroupContext::new(&f, 2).unwrap();
        let chars = irreducible_characters(&ctx, 7).unwrap();
        assert_eq!(chars.len(), 8);
        assert_eq!(chars.iter().map(|c| c.degree * c.degree).sum::<usize>(), 48);
        let generic = generic_bessel_functions(&ctx, 7).unwrap();
        assert_eq!(generic.len(), 6);
    }
}
