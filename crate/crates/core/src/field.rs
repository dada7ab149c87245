//! Exact arithmetic in `F_q = F_p[x]/(f)` together with the additive and
//! multiplicative character data consumed by the rest of the crate.
//!
//! Elements are encoded as integers in `[0, q)` whose base-`p` digits are the
//! polynomial coefficients (constant term first). Every operation goes through
//! precomputed tables, so a [`Field`] is cheap to clone and safe to share.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// Largest supported field order. Tables are `q * q` entries.
pub const MAX_FIELD_ORDER: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{k} exceeds the supported bound {MAX_FIELD_ORDER}")]
    TooLarge { p: u32, k: u32 },
    #[error("no irreducible polynomial of degree {k} over F_{p} found")]
    NoIrreducible { p: u32, k: u32 },
    #[error("F_{small} is not a subfield of F_{large}")]
    NotSubfield { small: u32, large: u32 },
}

/// An element of a finite field, as its base-`p` digit encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(pub(crate) u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, coefficients low to high (length `k + 1`).
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    trace: Vec<u16>,
    generator: u16,
    /// `exp[m] = g^m` for `m in [0, q-1)`.
    exp: Vec<u16>,
    /// `log[x]` for `x != 0`; `log[0]` is unused.
    log: Vec<u32>,
}

/// The finite field `F_{p^k}`.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.t, &other.t) || (self.t.p == other.t.p && self.t.modulus == other.t.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{} (modulus {:?})", self.t.q, self.t.modulus)
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn digits(mut x: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(c: &[u32], p: u32) -> u32 {
    c.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `a` modulo monic `m` over `F_p` (coefficients low to high).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &mc) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * mc) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Monic polynomial of degree `k` whose lower coefficients are the digits of `code`.
fn monic_from_code(code: u32, p: u32, k: u32) -> Vec<u32> {
    let mut c = digits(code, p, k);
    c.push(1);
    c
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let k = (f.len() - 1) as u32;
    for d in 1..=k / 2 {
        for code in 0..p.pow(d) {
            let g = monic_from_code(code, p, d);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Builds `F_{p^k}` with the lexicographically least irreducible monic modulus
/// (ordered by the coefficient of `x^{k-1}` first) and the least generator of
/// the multiplicative group.
pub fn make_field(p: u32, k: u32) -> Result<Field, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if k == 0 {
        return Err(FieldError::ZeroDegree);
    }
    let q = (p as u64).checked_pow(k).filter(|&q| q <= MAX_FIELD_ORDER as u64);
    let q = q.ok_or(FieldError::TooLarge { p, k })? as u32;

    let modulus = (0..q)
        .map(|code| monic_from_code(code, p, k))
        .find(|f| k == 1 || is_irreducible(f, p))
        .ok_or(FieldError::NoIrreducible { p, k })?;

    let qs = q as usize;
    let elems: Vec<Vec<u32>> = (0..q).map(|x| digits(x, p, k)).collect();
    let mut add = vec![0u16; qs * qs];
    let mut mul = vec![0u16; qs * qs];
    for a in 0..qs {
        for b in 0..qs {
            let s: Vec<u32> = elems[a].iter().zip(&elems[b]).map(|(x, y)| (x + y) % p).collect();
            add[a * qs + b] = undigits(&s, p) as u16;
            let m = poly_rem(&poly_mul(&elems[a], &elems[b], p), &modulus, p);
            let mut m = m;
            m.resize(k as usize, 0);
            mul[a * qs + b] = undigits(&m, p) as u16;
        }
    }
    let neg: Vec<u16> = (0..qs).map(|a| (0..qs).find(|&b| add[a * qs + b] == 0).unwrap() as u16).collect();
    let mut inv = vec![0u16; qs];
    for a in 1..qs {
        inv[a] = (1..qs).find(|&b| mul[a * qs + b] == 1).unwrap() as u16;
    }

    let order = (q - 1) as u64;
    let pow = |x: u16, mut e: u64| -> u16 {
        let mut base = x;
        let mut acc = 1u16;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul[acc as usize * qs + base as usize];
            }
            base = mul[base as usize * qs + base as usize];
            e >>= 1;
        }
        acc
    };
    let ells = prime_divisors(order);
    let generator = (1..q as u16)
        .find(|&g| ells.iter().all(|&l| pow(g, order / l) != 1))
        .expect("finite field has a cyclic unit group");
    let mut exp = Vec::with_capacity(order as usize);
    let mut log = vec![0u32; qs];
    let mut x = 1u16;
    for m in 0..order as u32 {
        exp.push(x);
        log[x as usize] = m;
        x = mul[x as usize * qs + generator as usize];
    }
    debug_assert_eq!(x, 1);

    let mut trace = vec![0u16; qs];
    for (a, t) in trace.iter_mut().enumerate() {
        let mut acc = 0u16;
        let mut y = a as u16;
        for _ in 0..k {
            acc = add[acc as usize * qs + y as usize];
            y = pow(y, p as u64);
        }
        // The trace lies in the prime field, i.e. is a constant polynomial.
        debug_assert!((acc as u32) < p);
        *t = acc;
    }

    Ok(Field { t: Arc::new(Tables { p, k, q, modulus, add, mul, neg, inv, trace, generator, exp, log }) })
}

impl Field {
    pub fn characteristic(&self) -> u32 {
        self.t.p
    }

    pub fn degree(&self) -> u32 {
        self.t.k
    }

    pub fn order(&self) -> u32 {
        self.t.q
    }

    /// Modulus coefficients, constant term first, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    pub fn element(&self, index: u32) -> FieldElement {
        assert!(index < self.t.q, "element index {index} out of range for F_{}", self.t.q);
        FieldElement(index as u16)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElement {
        let mut c: Vec<u32> = coeffs.iter().map(|&x| x % self.t.p).collect();
        c.resize(self.t.k as usize, 0);
        FieldElement(undigits(&c, self.t.p) as u16)
    }

    /// Embeds an integer through the prime field.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.t.p as i64) as u16)
    }

    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        digits(x.0 as u32, self.t.p, self.t.k)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.t.q as u16).map(FieldElement)
    }

    pub fn units(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.t.q as u16).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.t.add[a.index() * self.t.q as usize + b.index()])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.t.neg[a.index()])
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.t.mul[a.index() * self.t.q as usize + b.index()])
    }

    #[inline]
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        (!a.is_zero()).then(|| FieldElement(self.t.inv[a.index()]))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if a.is_zero() {
            return if e == 0 { FieldElement::ONE } else { FieldElement::ZERO };
        }
        let m = (self.t.log[a.index()] as u64 * (e % (self.t.q as u64 - 1))) % (self.t.q as u64 - 1);
        FieldElement(self.t.exp[m as usize])
    }

    pub fn generator(&self) -> FieldElement {
        FieldElement(self.t.generator)
    }

    /// Discrete logarithm to the stored generator.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        (!a.is_zero()).then(|| self.t.log[a.index()])
    }

    /// `g^m` for the stored generator `g`.
    pub fn exp(&self, m: u64) -> FieldElement {
        FieldElement(self.t.exp[(m % (self.t.q as u64 - 1)) as usize])
    }

    /// Absolute trace to `F_p`, as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u32 {
        self.t.trace[a.index()] as u32
    }

    /// Absolute norm to `F_p`, as an integer in `[0, p)`.
    pub fn norm(&self, a: FieldElement) -> u32 {
        let e = (self.t.q as u64 - 1) / (self.t.p as u64 - 1);
        self.pow(a, e).0 as u32
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.t.p as u64)
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: FieldElement) -> Option<u64> {
        let n = self.t.q as u64 - 1;
        let l = self.log(a)? as u64;
        Some(n / gcd(n, l))
    }

    /// Whether `small` embeds into `self`.
    pub fn contains_subfield(&self, small: &Field) -> bool {
        small.t.p == self.t.p && self.t.k.is_multiple_of(small.t.k)
    }

    /// The image of each element of `small` under an embedding into `self`.
    ///
    /// The embedding sends the residue class of `x` to the least root (by
    /// index) of `small`'s modulus in `self`.
    pub fn embedding_of(&self, small: &Field) -> Result<Vec<FieldElement>, FieldError> {
        if !self.contains_subfield(small) {
            return Err(FieldError::NotSubfield { small: small.order(), large: self.order() });
        }
        let m = small.modulus();
        let eval = |theta: FieldElement, coeffs: &[u32]| {
            coeffs
                .iter()
                .rev()
                .fold(FieldElement::ZERO, |acc, &c| self.add(self.mul(acc, theta), self.from_int(c as i64)))
        };
        let theta = self
            .elements()
            .find(|&t| eval(t, m).is_zero())
            .ok_or(FieldError::NotSubfield { small: small.order(), large: self.order() })?;
        Ok(small.elements().map(|x| eval(theta, &small.coeffs(x))).collect())
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `exp(2 pi i num / den)`.
#[inline]
pub fn root_of_unity(num: i64, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i64) as f64 / den as f64;
    Complex64::from_polar(1.0, TAU * r)
}

/// `x -> exp(+-2 pi i Tr(x) / p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveCharacter {
    field: Field,
    conjugated: bool,
    values: Arc<Vec<Complex64>>,
}

impl AdditiveCharacter {
    fn build(field: &Field, conjugated: bool) -> Self {
        let p = field.characteristic() as u64;
        let sign = if conjugated { -1 } else { 1 };
        let values = field.elements().map(|x| root_of_unity(sign * field.trace(x) as i64, p)).collect();
        AdditiveCharacter { field: field.clone(), conjugated, values: Arc::new(values) }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_conjugated(&self) -> bool {
        self.conjugated
    }

    #[inline]
    pub fn value(&self, x: FieldElement) -> Complex64 {
        self.values[x.index()]
    }

    /// Exact phase: `value(x) = exp(2 pi i phase(x) / p)`.
    #[inline]
    pub fn phase(&self, x: FieldElement) -> u32 {
        let p = self.field.characteristic();
        let t = self.field.trace(x);
        if self.conjugated {
            (p - t) % p
        } else {
            t
        }
    }

    /// The character `x -> conj(psi(x)) = psi(-x)`.
    pub fn conjugate(&self) -> Self {
        AdditiveCharacter::build(&self.field, !self.conjugated)
    }
}

/// The trace character `psi(x) = exp(2 pi i Tr(x) / p)`.
pub fn canonical_psi(field: &Field) -> AdditiveCharacter {
    AdditiveCharacter::build(field, false)
}

/// `chi(g^m) = exp(2 pi i e m / (q - 1))` for the stored generator `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativeCharacter {
    field: Field,
    exponent: u32,
}

impl MultiplicativeCharacter {
    pub fn new(field: &Field, exponent: i64) -> Self {
        let n = field.order() as i64 - 1;
        MultiplicativeCharacter { field: field.clone(), exponent: exponent.rem_euclid(n) as u32 }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == 0
    }

    /// Value at `x`; zero at `x = 0`.
    pub fn value(&self, x: FieldElement) -> Complex64 {
        match self.field.log(x) {
            None => Complex64::new(0.0, 0.0),
            Some(m) => {
                let n = self.field.order() as u64 - 1;
                root_of_unity((self.exponent as u64 * m as u64 % n) as i64, n)
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        MultiplicativeCharacter::new(&self.field, self.exponent as i64 + other.exponent as i64)
    }

    pub fn inverse(&self) -> Self {
        MultiplicativeCharacter::new(&self.field, -(self.exponent as i64))
    }

    /// Restriction along an embedding `small -> self.field`.
    pub fn restrict_to(&self, small: &Field) -> Result<MultiplicativeCharacter, FieldError> {
        let emb = self.field.embedding_of(small)?;
        let big_n = self.field.order() as u64 - 1;
        let small_n = small.order() as u64 - 1;
        let m = self.field.log(emb[small.generator().index()]).expect("embedding is injective") as u64;
        // The embedded generator lies in the subgroup of order q - 1.
        debug_assert_eq!((m * small_n) % big_n, 0);
        let e = (self.exponent as u64 * m) % big_n;
        Ok(MultiplicativeCharacter::new(small, (e * small_n / big_n) as i64))
    }
}

/// All `q - 1` multiplicative characters, trivial first, by exponent.
pub fn mult_characters(field: &Field) -> Vec<MultiplicativeCharacter> {
    (0..field.order() as i64 - 1).map(|e| MultiplicativeCharacter::new(field, e)).collect()
}

/// Frobenius orbits on the character group of `field^x` relative to `base`.
#[derive(Clone, Debug)]
pub struct FrobeniusOrbits {
    /// `[field : base]`.
    pub degree: u32,
    /// Orbits as sorted exponent lists, ordered by least exponent.
    pub orbits: Vec<Vec<u32>>,
}

impl FrobeniusOrbits {
    pub fn character_count(&self) -> usize {
        self.orbits.iter().map(Vec::len).sum()
    }

    pub fn fixed_count(&self) -> usize {
        self.orbits.iter().filter(|o| o.len() == 1).count()
    }

    /// Orbits of size exactly `degree`.
    pub fn regular(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.orbits.iter().filter(move |o| o.len() == self.degree as usize)
    }

    pub fn regular_count(&self) -> usize {
        self.regular().count()
    }
}

/// Partitions the characters `e` of `field^x` under `e -> |base| * e`.
pub fn frobenius_orbits(field: &Field, base: &Field) -> Result<FrobeniusOrbits, FieldError> {
    if !field.contains_subfield(base) {
        return Err(FieldError::NotSubfield { small: base.order(), large: field.order() });
    }
    let n = field.order() as u64 - 1;
    let q = base.order() as u64;
    let mut seen = vec![false; n as usize];
    let mut orbits = Vec::new();
    for e in 0..n {
        if seen[e as usize] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut x = e;
        while !seen[x as usize] {
            seen[x as usize] = true;
            orbit.push(x as u32);
            x = x * q % n;
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    Ok(FrobeniusOrbits { degree: field.degree() / base.degree(), orbits })
}
