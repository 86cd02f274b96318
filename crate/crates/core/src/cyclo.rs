//! Exact arithmetic in cyclotomic fields `Q(zeta_n)`, Laurent polynomials
//! over them, and their fraction fields.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ring::Ring;

/// Dense polynomial over Q, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly(vec![c]).trimmed()
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect()).trimmed()
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = BigRational::one();
        QPoly(v)
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        QPoly(
            (0..n)
                .map(|i| {
                    let a = self.0.get(i).cloned().unwrap_or_default();
                    let b = o.0.get(i).cloned().unwrap_or_default();
                    a + b
                })
                .collect(),
        )
        .trimmed()
    }

    pub fn neg(&self) -> Self {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        QPoly(self.0.iter().map(|c| c * k).collect()).trimmed()
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut v = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        QPoly(v).trimmed()
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.0.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            q[k] = c;
        }
        r.truncate(dd);
        (QPoly(q).trimmed(), QPoly(r).trimmed())
    }

    /// Inverse modulo `m`, if `gcd(self, m) = 1`.
    pub fn inverse_mod(&self, m: &Self) -> Option<Self> {
        let (mut r0, mut r1) = (m.clone(), self.divrem(m).1);
        let (mut s0, mut s1) = (Self::zero(), Self::constant(BigRational::one()));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != Some(0) {
            return None;
        }
        let c = r0.0[0].clone();
        Some(s0.scale(&(BigRational::one() / c)).divrem(m).1)
    }
}

/// The n-th cyclotomic polynomial with integer coefficients.
pub fn cyclotomic_poly(n: u64) -> QPoly {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    let mut p = QPoly::monomial(n as usize).sub(&QPoly::from_ints(&[1]));
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = p.divrem(&cyclotomic_poly(d)).0;
        }
    }
    p
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    (1..=n).filter(|&k| num_integer::gcd(k, n) == 1).count() as u64
}

#[derive(Debug, PartialEq, Eq)]
pub struct CycloField {
    n: u64,
    modulus: QPoly,
}

impl CycloField {
    pub fn new(n: u64) -> Arc<Self> {
        let n = n.max(1);
        Arc::new(CycloField { n, modulus: cyclotomic_poly(n) })
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap_or(0)
    }
}

/// An element of `Q(zeta_n)` represented modulo the n-th cyclotomic polynomial.
#[derive(Clone)]
pub struct Cyclo {
    field: Arc<CycloField>,
    c: QPoly,
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        self.field.n == other.field.n && self.c == other.c
    }
}

impl Eq for Cyclo {}

impl Cyclo {
    pub fn from_poly(field: &Arc<CycloField>, p: QPoly) -> Self {
        Cyclo { field: field.clone(), c: p.divrem(&field.modulus).1 }
    }

    pub fn from_int(field: &Arc<CycloField>, k: impl Into<BigInt>) -> Self {
        Self::from_poly(field, QPoly::constant(BigRational::from_integer(k.into())))
    }

    pub fn from_rational(field: &Arc<CycloField>, q: BigRational) -> Self {
        Self::from_poly(field, QPoly::constant(q))
    }

    /// `zeta^k` for any integer `k`.
    pub fn zeta(field: &Arc<CycloField>, k: i64) -> Self {
        let e = k.rem_euclid(field.n as i64) as usize;
        Self::from_poly(field, QPoly::monomial(e))
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn poly(&self) -> &QPoly {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.c == QPoly::from_ints(&[1])
    }

    pub fn add(&self, o: &Self) -> Self {
        Cyclo { field: self.field.clone(), c: self.c.add(&o.c) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Cyclo { field: self.field.clone(), c: self.c.sub(&o.c) }
    }

    pub fn neg(&self) -> Self {
        Cyclo { field: self.field.clone(), c: self.c.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_poly(&self.field, self.c.mul(&o.c))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Cyclo { field: self.field.clone(), c: self.c.scale(k) }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        self.c.inverse_mod(&self.field.modulus).map(|c| Cyclo { field: self.field.clone(), c })
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut r = Self::from_int(&self.field, 1);
        for _ in 0..e.unsigned_abs() {
            r = r.mul(&base);
        }
        Some(r)
    }

    /// Galois automorphism `zeta -> zeta^a` (a coprime to n).
    pub fn galois(&self, a: i64) -> Self {
        let n = self.field.n as i64;
        let mut p = QPoly::zero();
        for (i, c) in self.c.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (a * i as i64).rem_euclid(n) as usize;
            p = p.add(&QPoly::monomial(e).scale(c));
        }
        Self::from_poly(&self.field, p)
    }

    /// Complex conjugation.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// Value under the embedding `zeta -> exp(2 pi i / n)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let n = self.field.n as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, c) in self.c.coeffs().iter().enumerate() {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let ang = 2.0 * std::f64::consts::PI * i as f64 / n;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    /// If `self = sign * zeta^k`, returns `(sign, k)`.
    pub fn as_signed_root(&self) -> Option<(i8, u64)> {
        let n = self.field.n;
        for k in 0..n {
            let z = Cyclo::zeta(&self.field, k as i64);
            if *self == z {
                return Some((1, k));
            }
            if *self == z.neg() {
                return Some((-1, k));
            }
        }
        None
    }

    /// Rational number if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.c.degree() {
            None => Some(BigRational::zero()),
            Some(0) => Some(self.c.coeffs()[0].clone()),
            _ => None,
        }
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.is_zero() {
            return write!(f, "0");
        }
        let z = format!("z{}", self.field.n);
        let mut first = true;
        for (i, c) in self.c.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => z.clone(),
                _ => format!("{z}^{i}"),
            };
            if mono.is_empty() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Ring for Cyclo {
    fn zero_like(&self) -> Self {
        Cyclo::from_int(&self.field, 0)
    }
    fn one_like(&self) -> Self {
        Cyclo::from_int(&self.field, 1)
    }
    fn is_zero(&self) -> bool {
        self.c.is_zero()
    }
    fn add_r(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn mul_r(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn neg_r(&self) -> Self {
        self.neg()
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.inv()
    }
    fn is_trivial_unit(&self) -> bool {
        self.as_signed_root().is_some()
    }
}

/// Laurent polynomial in `T` with coefficients in `Q(zeta_n)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Laurent {
    field: Arc<CycloField>,
    terms: BTreeMap<i64, Cyclo>,
}

impl Laurent {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        Laurent { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: Cyclo) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Cyclo, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        let field = c.field.clone();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Laurent { field, terms }
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Cyclo)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert_add(&mut self, e: i64, c: &Cyclo) {
        let v = match self.terms.get(&e) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        if v.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.insert_add(*e, c);
        }
        r
    }

    pub fn neg(&self) -> Self {
        Laurent { field: self.field.clone(), terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(&self.field);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.insert_add(e1 + e2, &c1.mul(c2));
            }
        }
        r
    }

    /// Single-term element `c T^e`.
    pub fn as_monomial(&self) -> Option<(Cyclo, i64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(e, c)| (c.clone(), *e))
        } else {
            None
        }
    }

    fn low(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(0)
    }

    fn high(&self) -> i64 {
        self.terms.keys().next_back().copied().unwrap_or(0)
    }

    fn shift(&self, k: i64) -> Self {
        Laurent { field: self.field.clone(), terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    /// Polynomial division of `self` by `d` after normalising both to start at T^0.
    /// Returns `(q, r)` with `self = q d + r` up to the recorded shifts.
    fn poly_divrem(&self, d: &Self) -> (Self, Self) {
        let a = self.shift(-self.low());
        let b = d.shift(-d.low());
        let db = b.high();
        let lead_inv = b.terms[&db].inv().expect("nonzero leading coefficient");
        let mut r = a;
        let mut q = Self::zero(&self.field);
        while !r.is_zero() && r.high() >= db {
            let h = r.high();
            let c = r.terms[&h].mul(&lead_inv);
            let m = Laurent::monomial(c, h - db);
            r = r.add(&m.mul(&b).neg());
            q = q.add(&m);
        }
        (q, r)
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(self.clone());
        }
        let (q, r) = self.poly_divrem(d);
        if !r.is_zero() {
            return None;
        }
        Some(q.shift(self.low() - d.low()))
    }

    /// Monic gcd as polynomials (the result starts at T^0).
    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.shift(-self.low());
        let mut b = o.shift(-o.low());
        while !b.is_zero() {
            let (_, r) = a.poly_divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.terms[&a.high()].inv().expect("nonzero");
        let a = a.shift(-a.low());
        a.mul(&Laurent::constant(lead))
    }

    /// Applies the involution `T -> T^-1` together with complex conjugation.
    pub fn conj(&self) -> Self {
        Laurent { field: self.field.clone(), terms: self.terms.iter().map(|(e, c)| (-e, c.conj())).collect() }
    }

    /// Applies a Galois automorphism to every coefficient.
    pub fn galois(&self, a: i64) -> Self {
        Laurent { field: self.field.clone(), terms: self.terms.iter().map(|(e, c)| (*e, c.galois(a))).collect() }
    }

    /// Value at `T = 1`.
    pub fn at_one(&self) -> Cyclo {
        self.terms.values().fold(Cyclo::from_int(&self.field, 0), |acc, c| acc.add(c))
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| match e {
                0 => format!("({c})"),
                1 => format!("({c})*T"),
                _ => format!("({c})*T^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Ring for Laurent {
    fn zero_like(&self) -> Self {
        Laurent::zero(&self.field)
    }
    fn one_like(&self) -> Self {
        Laurent::constant(Cyclo::from_int(&self.field, 1))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_r(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn mul_r(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn neg_r(&self) -> Self {
        self.neg()
    }
    fn unit_inverse(&self) -> Option<Self> {
        let (c, e) = self.as_monomial()?;
        Some(Laurent::monomial(c.inv()?, -e))
    }
    fn is_trivial_unit(&self) -> bool {
        self.as_monomial().is_some_and(|(c, _)| c.as_signed_root().is_some())
    }
}

/// Element of the fraction field `Q(zeta_n)(T)`, kept in lowest terms.
#[derive(Clone)]
pub struct RatFunc {
    num: Laurent,
    den: Laurent,
}

impl RatFunc {
    pub fn new(num: Laurent, den: Laurent) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            let one = den.one_like();
            return Some(RatFunc { num, den: one });
        }
        let g = num.gcd(&den);
        let mut n = num.div_exact(&g).expect("gcd divides");
        let mut d = den.div_exact(&g).expect("gcd divides");
        // normalise: denominator starts at T^0 with leading coefficient 1
        let sh = d.low();
        n = n.shift(-sh);
        d = d.shift(-sh);
        let lead = d.terms[&d.high()].inv().expect("nonzero");
        let l = Laurent::constant(lead);
        Some(RatFunc { num: n.mul(&l), den: d.mul(&l) })
    }

    pub fn from_laurent(x: Laurent) -> Self {
        let one = x.one_like();
        RatFunc { num: x, den: one }
    }

    pub fn numerator(&self) -> &Laurent {
        &self.num
    }

    pub fn denominator(&self) -> &Laurent {
        &self.den
    }

    /// The Laurent polynomial this fraction equals, if any.
    pub fn as_laurent(&self) -> Option<Laurent> {
        self.num.div_exact(&self.den)
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &Self) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_laurent() {
            Some(l) => write!(f, "{l}"),
            None => write!(f, "[{}] / [{}]", self.num, self.den),
        }
    }
}

impl Ring for RatFunc {
    fn zero_like(&self) -> Self {
        RatFunc::from_laurent(self.num.zero_like())
    }
    fn one_like(&self) -> Self {
        RatFunc::from_laurent(self.num.one_like())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add_r(&self, o: &Self) -> Self {
        RatFunc::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den)).expect("nonzero denominator")
    }
    fn mul_r(&self, o: &Self) -> Self {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero denominator")
    }
    fn neg_r(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }
    fn unit_inverse(&self) -> Option<Self> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }
    fn is_trivial_unit(&self) -> bool {
        self.as_laurent().is_some_and(|l| l.is_trivial_unit())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), QPoly::from_ints(&[-1, 1]));
        assert_eq!(cyclotomic_poly(4), QPoly::from_ints(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(5), QPoly::from_ints(&[1, 1, 1, 1, 1]));
        assert_eq!(cyclotomic_poly(6), QPoly::from_ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(12), QPoly::from_ints(&[1, 0, -1, 0, 1]));
        assert_eq!(totient(12), 4);
    }

    #[test]
    fn golden_unit_value() {
        let f = CycloField::new(5);
        let z = |k| Cyclo::zeta(&f, k);
        let one = Cyclo::from_int(&f, 1);
        let u = z(1).add(&z(4)).sub(&one);
        let v = z(2).add(&z(3)).sub(&one);
        assert!(u.mul(&v).is_one());
        assert_eq!(u.inv().unwrap(), v);
        assert!(u.as_signed_root().is_none());
        assert_eq!(u.conj(), u);
        let (re, im) = u.to_complex();
        assert!((re - (2.0 * (2.0 * std::f64::consts::PI / 5.0).cos() - 1.0)).abs() < 1e-12);
        assert!(im.abs() < 1e-12);
    }

    #[test]
    fn roots_detected() {
        let f = CycloField::new(7);
        assert_eq!(Cyclo::zeta(&f, 10).neg().as_signed_root(), Some((-1, 3)));
        assert_eq!(Cyclo::zeta(&f, 7), Cyclo::from_int(&f, 1));
    }

    #[test]
    fn laurent_division_and_gcd() {
        let f = CycloField::new(1);
        let c = |k: i64| Cyclo::from_int(&f, k);
        let one_minus_t = Laurent::constant(c(1)).add(&Laurent::monomial(c(-1), 1));
        let sq = one_minus_t.mul(&one_minus_t).mul(&Laurent::monomial(c(3), -4));
        let q = sq.div_exact(&one_minus_t).unwrap();
        assert_eq!(q.mul(&one_minus_t), sq);
        assert!(one_minus_t.div_exact(&sq).is_none());
        let g = sq.gcd(&one_minus_t);
        assert_eq!(g.mul(&Laurent::constant(c(-1))), one_minus_t);
    }

    #[test]
    fn ratfunc_arithmetic() {
        let f = CycloField::new(3);
        let c = |k: i64| Cyclo::from_int(&f, k);
        let x = Laurent::constant(c(1)).add(&Laurent::monomial(c(-1), 1));
        let r = RatFunc::new(Laurent::constant(c(1)), x.clone()).unwrap();
        let back = r.unit_inverse().unwrap();
        assert_eq!(back.as_laurent().unwrap(), x);
        assert!(r.mul_r(&back).as_laurent().unwrap() == x.one_like());
    }
}
