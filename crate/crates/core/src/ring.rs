//! The integral group ring Z[G] and the small ring interface shared by the
//! matrix code.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::group::{GroupElement, GroupMorphism, GroupSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("operands live in different group rings")]
    Mismatch,
    #[error("morphism source does not match the element's group")]
    MorphismSource,
}

/// Operations needed by generic matrix and elimination code.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add_r(&self, other: &Self) -> Self;
    fn mul_r(&self, other: &Self) -> Self;
    fn neg_r(&self) -> Self;
    fn sub_r(&self, other: &Self) -> Self {
        self.add_r(&other.neg_r())
    }
    /// Certified two-sided inverse, if one can be found.
    fn unit_inverse(&self) -> Option<Self>;
    /// Units that are cheap to pivot on (and trivial in Whitehead groups).
    fn is_trivial_unit(&self) -> bool;
}

/// A finite Z-linear combination of group elements.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupRingElement {
    group: Arc<GroupSpec>,
    terms: BTreeMap<GroupElement, BigInt>,
}

pub(crate) fn same_group(a: &Arc<GroupSpec>, b: &Arc<GroupSpec>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GroupRingElement {
    pub fn zero(group: &Arc<GroupSpec>) -> Self {
        GroupRingElement { group: group.clone(), terms: BTreeMap::new() }
    }

    pub fn one(group: &Arc<GroupSpec>) -> Self {
        Self::monomial(group, group.identity(), BigInt::one())
    }

    pub fn from_int(group: &Arc<GroupSpec>, n: impl Into<BigInt>) -> Self {
        Self::monomial(group, group.identity(), n.into())
    }

    pub fn monomial(group: &Arc<GroupSpec>, g: GroupElement, coeff: impl Into<BigInt>) -> Self {
        let c = coeff.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(g, c);
        }
        GroupRingElement { group: group.clone(), terms }
    }

    /// Builds an element from (coefficient, group element) pairs, merging repeats.
    pub fn from_terms<I>(group: &Arc<GroupSpec>, items: I) -> Self
    where
        I: IntoIterator<Item = (BigInt, GroupElement)>,
    {
        let mut e = Self::zero(group);
        for (c, g) in items {
            e.add_term(g, c);
        }
        e
    }

    /// Sum of `coeffs[k] * g^k` for a single generator `g` of the base.
    pub fn from_powers(group: &Arc<GroupSpec>, g: &GroupElement, coeffs: &[i64]) -> Self {
        Self::from_terms(
            group,
            coeffs.iter().enumerate().map(|(k, &c)| (BigInt::from(c), group.pow(g, k as i64))),
        )
    }

    /// Norm element: the sum of all elements of the finite part of the base.
    pub fn norm_element(group: &Arc<GroupSpec>) -> Self {
        Self::from_terms(group, group.finite_part_elements().into_iter().map(|g| (BigInt::one(), g)))
    }

    fn add_term(&mut self, g: GroupElement, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(g).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, g: &GroupElement) -> BigInt {
        self.terms.get(g).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().is_some_and(|(g, c)| *g == self.group.identity() && c.is_one())
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// `Some((sign, g))` when the element is `sign * g`.
    pub fn as_trivial_unit(&self) -> Option<(i8, GroupElement)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (g, c) = self.terms.iter().next()?;
        if c.is_one() {
            Some((1, g.clone()))
        } else if (-c).is_one() {
            Some((-1, g.clone()))
        } else {
            None
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, RingError> {
        if !same_group(&self.group, &other.group) {
            return Err(RingError::Mismatch);
        }
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, RingError> {
        if !same_group(&self.group, &other.group) {
            return Err(RingError::Mismatch);
        }
        let mut acc: BTreeMap<GroupElement, BigInt> = BTreeMap::new();
        for (g, a) in &self.terms {
            for (h, b) in &other.terms {
                *acc.entry(self.group.mul(g, h)).or_insert_with(BigInt::zero) += a * b;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(GroupRingElement { group: self.group.clone(), terms: acc })
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(&self.group);
        }
        GroupRingElement {
            group: self.group.clone(),
            terms: self.terms.iter().map(|(g, c)| (g.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one(&self.group);
        for _ in 0..n {
            r = &r * self;
        }
        r
    }

    /// The w-twisted anti-involution `sum l_g g -> sum w(g) l_g g^-1`.
    pub fn involution(&self) -> Self {
        Self::from_terms(
            &self.group,
            self.terms.iter().map(|(g, c)| {
                let s = self.group.w_of(g);
                (if s == 1 { c.clone() } else { -c }, self.group.inv(g))
            }),
        )
    }

    /// Image under a group homomorphism, extended linearly.
    pub fn map_group(&self, m: &GroupMorphism) -> Result<Self, RingError> {
        if !same_group(&self.group, m.source()) {
            return Err(RingError::MorphismSource);
        }
        Ok(Self::from_terms(m.target(), self.terms.iter().map(|(g, c)| (c.clone(), m.apply(g)))))
    }

    /// Conjugation by `s^k` in a twisted group (`s^k x s^-k`); identity otherwise.
    pub fn conjugate_by_stable(&self, k: i64) -> Self {
        let Some(s) = self.group.stable() else { return self.clone() };
        let sk = self.group.pow(&s, k);
        let ski = self.group.inv(&sk);
        Self::from_terms(
            &self.group,
            self.terms.iter().map(|(g, c)| (c.clone(), self.group.mul(&self.group.mul(&sk, g), &ski))),
        )
    }

    /// Multiplies every group element on the left by `g`.
    pub fn left_shift(&self, g: &GroupElement) -> Self {
        Self::from_terms(&self.group, self.terms.iter().map(|(h, c)| (c.clone(), self.group.mul(g, h))))
    }

    /// True if every term has stable exponent zero.
    pub fn in_base(&self) -> bool {
        self.terms.keys().all(|g| g.stable_power() == 0)
    }

    /// Largest absolute coefficient, used to bound search heuristics.
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Two-sided inverse if one can be certified; see [`crate::units`].
    pub fn inverse(&self) -> Option<Self> {
        if let Some((s, g)) = self.as_trivial_unit() {
            return Some(Self::monomial(&self.group, self.group.inv(&g), s));
        }
        crate::units::certify_unit(self)
    }
}

impl fmt::Debug for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.terms.iter().enumerate() {
            let word = self.group.format_element(g);
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if word == "1" {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{word}")?;
            } else {
                write!(f, "{a}*{word}")?;
            }
        }
        Ok(())
    }
}

impl Add for &GroupRingElement {
    type Output = GroupRingElement;
    fn add(self, rhs: Self) -> GroupRingElement {
        self.try_add(rhs).expect("group ring mismatch in addition")
    }
}

impl Sub for &GroupRingElement {
    type Output = GroupRingElement;
    fn sub(self, rhs: Self) -> GroupRingElement {
        self.try_add(&-rhs).expect("group ring mismatch in subtraction")
    }
}

impl Mul for &GroupRingElement {
    type Output = GroupRingElement;
    fn mul(self, rhs: Self) -> GroupRingElement {
        self.try_mul(rhs).expect("group ring mismatch in multiplication")
    }
}

impl Neg for &GroupRingElement {
    type Output = GroupRingElement;
    fn neg(self) -> GroupRingElement {
        GroupRingElement {
            group: self.group.clone(),
            terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect(),
        }
    }
}

impl Ring for GroupRingElement {
    fn zero_like(&self) -> Self {
        Self::zero(&self.group)
    }
    fn one_like(&self) -> Self {
        Self::one(&self.group)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_r(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_r(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_r(&self) -> Self {
        -self
    }
    fn unit_inverse(&self) -> Option<Self> {
        self.inverse()
    }
    fn is_trivial_unit(&self) -> bool {
        self.as_trivial_unit().is_some()
    }
}

/// The inclusion `Z[G] -> Z[G x_alpha Z]` of the base.
pub fn induced_inclusion(a: &GroupRingElement, twisted: &Arc<GroupSpec>) -> Result<GroupRingElement, RingError> {
    let inc = GroupMorphism::base_inclusion(twisted).map_err(|_| RingError::MorphismSource)?;
    a.map_group(&inc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zn(n: u64) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(n))
    }

    fn powers(g: &Arc<GroupSpec>, coeffs: &[i64]) -> GroupRingElement {
        GroupRingElement::from_powers(g, &g.generator(0), coeffs)
    }

    #[test]
    fn golden_unit_in_z5() {
        // oracle: the nine monomial products reduce to t^0 with total coefficient 1
        let g = zn(5);
        let u = powers(&g, &[-1, 1, 0, 0, 1]);
        let v = powers(&g, &[-1, 0, 1, 1, 0]);
        assert!((&u * &v).is_one());
    }

    #[test]
    fn norm_kills_t_minus_one() {
        for n in [2, 3, 5] {
            let g = zn(n);
            let t = powers(&g, &[-1, 1]);
            let norm = GroupRingElement::norm_element(&g);
            assert!((&t * &norm).is_zero(), "n = {n}");
        }
    }

    #[test]
    fn involution_examples() {
        let g = zn(5);
        let t = powers(&g, &[0, 1]);
        assert_eq!(t.involution(), powers(&g, &[0, 0, 0, 0, 1]));
        let z = Arc::new(GroupSpec::infinite_cyclic());
        let x = GroupRingElement::from_terms(&z, [(BigInt::from(2), z.identity()), (BigInt::from(3), z.generator(0))]);
        let expected =
            GroupRingElement::from_terms(&z, [(BigInt::from(2), z.identity()), (BigInt::from(3), z.pow(&z.generator(0), -1))]);
        assert_eq!(x.involution(), expected);
        let z2 = Arc::new(GroupSpec::cyclic(2).with_w(vec![-1]).unwrap());
        let s = powers(&z2, &[0, 1]);
        assert_eq!(s.involution(), -&s);
    }

    #[test]
    fn mismatched_groups_rejected() {
        let a = GroupRingElement::one(&zn(5));
        let b = GroupRingElement::one(&zn(3));
        assert_eq!(a.try_mul(&b), Err(RingError::Mismatch));
    }

    #[test]
    fn inclusion_respects_twist() {
        for (n, a) in [(5u64, 2i64), (7, 3), (3, 2)] {
            let base = Arc::new(GroupSpec::cyclic(n));
            let tw = Arc::new(GroupSpec::cyclic(n).semidirect(vec![vec![a]], "s", 1).unwrap());
            let g = GroupRingElement::monomial(&base, base.generator(0), 1);
            let ag = GroupRingElement::monomial(&base, base.pow(&base.generator(0), a), 1);
            let lhs = induced_inclusion(&ag, &tw).unwrap();
            let rhs = induced_inclusion(&g, &tw).unwrap().conjugate_by_stable(1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn display_is_readable() {
        let g = zn(5);
        assert_eq!(powers(&g, &[-1, 1, 0, 0, 1]).to_string(), "-1 + t + t^4");
        assert_eq!(GroupRingElement::zero(&g).to_string(), "0");
    }
}
