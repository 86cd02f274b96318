//! Certified inverses of units in group rings of finite abelian groups,
//! through the integral regular representation.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::intlin::IntSolver;
use crate::ring::GroupRingElement;

/// Largest finite part for which the regular representation is attempted.
pub const MAX_REGULAR_REP: u64 = 256;

/// Returns a verified two-sided inverse of `x`, or `None` if `x` is not a
/// unit or lies outside the supported shape `x = y * g0` with `y`
/// supported on the finite part of the base.
pub fn certify_unit(x: &GroupRingElement) -> Option<GroupRingElement> {
    let group = x.group().clone();
    let (g0, _) = x.terms().next()?;
    let g0 = g0.clone();
    let g0_inv = group.inv(&g0);
    let y = GroupRingElement::from_terms(&group, x.terms().map(|(g, c)| (c.clone(), group.mul(g, &g0_inv))));
    if !y.terms().all(|(g, _)| group.in_finite_part(g)) {
        return None;
    }
    if !y.augmentation().abs().is_one() {
        return None;
    }
    if group.finite_part_size() > MAX_REGULAR_REP {
        return None;
    }
    let elems = group.finite_part_elements();
    let index: HashMap<_, _> = elems.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
    let n = elems.len();
    let mut reg = vec![vec![BigInt::zero(); n]; n];
    for (r, h) in elems.iter().enumerate() {
        for (g, c) in y.terms() {
            let k = index[&group.mul(h, g)];
            reg[r][k] += c;
        }
    }
    let mut target = vec![BigInt::zero(); n];
    target[index[&group.identity()]] = BigInt::one();
    let z = IntSolver::new(&reg, n, n).solve(&target)?;
    let y_inv = GroupRingElement::from_terms(&group, z.into_iter().zip(elems.iter().cloned()));
    let x_inv = GroupRingElement::monomial(&group, g0_inv, 1);
    let x_inv = &x_inv * &y_inv;
    ((x * &x_inv).is_one() && (&x_inv * x).is_one()).then_some(x_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use std::sync::Arc;

    #[test]
    fn golden_unit_certified() {
        let g = Arc::new(GroupSpec::cyclic(5));
        let t = g.generator(0);
        let u = GroupRingElement::from_powers(&g, &t, &[-1, 1, 0, 0, 1]);
        let v = GroupRingElement::from_powers(&g, &t, &[-1, 0, 1, 1, 0]);
        assert_eq!(certify_unit(&u), Some(v));
    }

    #[test]
    fn zero_divisor_rejected() {
        let g = Arc::new(GroupSpec::cyclic(5));
        let x = GroupRingElement::from_powers(&g, &g.generator(0), &[-1, 1]);
        assert_eq!(certify_unit(&x), None);
    }

    #[test]
    fn shifted_units_in_twisted_groups() {
        let g = Arc::new(GroupSpec::cyclic(5).semidirect(vec![vec![2]], "s", 1).unwrap());
        let t = g.generator(0);
        let u = GroupRingElement::from_powers(&g, &t, &[-1, 1, 0, 0, 1]);
        let s = GroupRingElement::monomial(&g, g.stable().unwrap(), 1);
        let us = &u * &s;
        let inv = certify_unit(&us).unwrap();
        assert!((&us * &inv).is_one());
        let not_finite = &u + &s;
        assert_eq!(certify_unit(&not_finite), None);
    }
}
