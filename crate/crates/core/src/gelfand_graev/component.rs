use num_complex::Complex64;

use crate::group::{GroupContext, GroupElement};

/// The Bessel function of a generic component, stored on the `U_n \ G_n`
/// representatives and expanded by `J(u c) = psi_n(u) J(c)`.
///
/// Since `J` is also right-equivariant, its support is a union of relevant
/// double cosets; values on the other cosets are zero.
#[derive(Clone, Debug)]
pub struct BesselTable {
    ctx: GroupContext,
    values: Vec<Complex64>,
}

impl BesselTable {
    pub(crate) fn new(ctx: GroupContext, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), ctx.cosets().len());
        BesselTable { ctx, values }
    }

    pub fn context(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.ctx.rank()
    }

    /// Values on the coset representatives, in [`crate::group::CosetIndex`] order.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn eval(&self, g: &GroupElement) -> Complex64 {
        let (c, s) = self.ctx.locate(g);
        self.ctx.psi_value(s) * self.values[c]
    }

    /// The table of the same function read in the `psi^{-1}` model: the
    /// pointwise conjugate, `g -> conj(J(g)) = J(g^{-1})`.
    pub fn conjugate(&self) -> BesselTable {
        BesselTable { ctx: self.ctx.with_conjugate_psi(), values: self.values.iter().map(|v| v.conj()).collect() }
    }
}

/// One generic irreducible constituent of `Ind_{U_n}^{G_n}(psi_n)`.
#[derive(Clone, Debug)]
pub struct GenericComponent {
    pub id: usize,
    pub dimension: usize,
    pub cuspidal: bool,
    /// Eigenvalue of each Hecke basis element on this component.
    pub fingerprint: Vec<Complex64>,
    /// `omega(z)` for the units `z` of the field, in element order.
    pub central_character: Vec<Complex64>,
    pub bessel: BesselTable,
}

impl GenericComponent {
    pub fn rank(&self) -> usize {
        self.bessel.rank()
    }

    pub fn context(&self) -> &GroupContext {
        self.bessel.context()
    }

    /// `J(g)`.
    pub fn bessel_at(&self, g: &GroupElement) -> Complex64 {
        self.bessel.eval(g)
    }

    /// `omega(z)` for a unit `z` given by its field-element index.
    pub fn omega(&self, z: crate::field::FieldElement) -> Complex64 {
        assert!(!z.is_zero(), "central character is defined on units");
        self.central_character[z.index() - 1]
    }

    /// `omega(-1)`.
    pub fn omega_minus_one(&self) -> Complex64 {
        let f = self.context().field();
        self.omega(f.neg(crate::field::FieldElement::ONE))
    }

    /// The contragredient read in the conjugated model: Bessel function
    /// `conj(J)`, conjugated fingerprint and central character.
    pub fn contragredient(&self) -> GenericComponent {
        GenericComponent {
            id: self.id,
            dimension: self.dimension,
            cuspidal: self.cuspidal,
            fingerprint: self.fingerprint.iter().map(|v| v.conj()).collect(),
            central_character: self.central_character.iter().map(|v| v.conj()).collect(),
            bessel: self.bessel.conjugate(),
        }
    }

    /// `max |J(g) - conj(J(g^{-1}))|` over the given elements.
    pub fn symmetry_defect<'a>(&self, elements: impl IntoIterator<Item = &'a GroupElement>) -> f64 {
        let ctx = self.context();
        elements
            .into_iter()
            .map(|g| (self.bessel_at(g) - self.bessel_at(&ctx.inverse(g)).conj()).norm())
            .fold(0.0, f64::max)
    }
}
