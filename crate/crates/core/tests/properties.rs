use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use wh_core::group::GroupSpec;
use wh_core::random::{golden_unit, InstanceGen};
use wh_core::ring::GroupRingElement;
use wh_core::torsion;
use wh_core::whitehead::TorsionClass;

fn groups() -> Vec<Arc<GroupSpec>> {
    vec![
        Arc::new(GroupSpec::cyclic(5)),
        Arc::new(GroupSpec::abelian(vec![3, 0])),
        Arc::new(GroupSpec::cyclic(5).semidirect(vec![vec![2]], "s", 1).unwrap()),
    ]
}

/// Up to four terms `c * g`, with `g` given by a base exponent and a stable power.
fn terms() -> impl Strategy<Value = Vec<(i64, i64, i64)>> {
    prop::collection::vec((-3i64..=3, -4i64..=4, -1i64..=1), 0..4)
}

fn build(g: &Arc<GroupSpec>, items: &[(i64, i64, i64)]) -> GroupRingElement {
    GroupRingElement::from_terms(
        g,
        items.iter().map(|&(c, e, t)| {
            let mut exps = vec![e; g.rank()];
            exps.iter_mut().zip(g.orders()).for_each(|(x, &n)| if n > 0 { *x = x.rem_euclid(n as i64) });
            let t = if g.is_twisted() { t } else { 0 };
            (BigInt::from(c), g.element(exps, t).unwrap())
        }),
    )
}

proptest! {
    #[test]
    fn involution_reverses_products(which in 0usize..3, a in terms(), b in terms()) {
        let g = &groups()[which];
        let (a, b) = (build(g, &a), build(g, &b));
        prop_assert_eq!((&a * &b).involution(), &b.involution() * &a.involution());
        prop_assert_eq!(a.involution().involution(), a);
    }

    #[test]
    fn multiplication_is_associative_and_augmented(which in 0usize..3, a in terms(), b in terms(), c in terms()) {
        let g = &groups()[which];
        let (a, b, c) = (build(g, &a), build(g, &b), build(g, &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!((&a * &b).augmentation(), a.augmentation() * b.augmentation());
    }

    #[test]
    fn unit_classes_add_like_exponents(k in -3i64..=3, m in -3i64..=3) {
        let g = Arc::new(GroupSpec::cyclic(5));
        let (u, v) = golden_unit(&g);
        let power = |n: i64| if n >= 0 { u.pow(n as u32) } else { v.pow(n.unsigned_abs() as u32) };
        let x = TorsionClass::from_unit(&power(k)).unwrap();
        let y = TorsionClass::from_unit(&power(m)).unwrap();
        let z = TorsionClass::from_unit(&power(k + m)).unwrap();
        prop_assert!(x.add(&y).unwrap().compare(&z).unwrap().is_trivial());
        prop_assert_eq!(z.classify().is_trivial(), k + m == 0);
    }

    #[test]
    fn random_isomorphisms_have_their_planted_torsion(seed in any::<u64>()) {
        let mut gen = InstanceGen::new(seed);
        let g = gen.group();
        let c = gen.complex(&g);
        let twist = gen.gen_bool(0.5);
        let (f, expected) = gen.iso(&c, twist);
        let got = torsion::whitehead_torsion(&f).unwrap();
        prop_assert!(!got.compare(&expected).unwrap().is_nontrivial());
    }
}
