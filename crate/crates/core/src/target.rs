//! Ring morphisms out of Z[G] into commutative targets: Z (augmentation),
//! `Q(zeta_n)` (finite characters) and `Q(zeta_n)[T, T^-1]` (characters that
//! also see infinite generators).

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

use crate::cyclo::{Cyclo, CycloField, Laurent};
use crate::group::GroupSpec;
use crate::ring::{same_group, GroupRingElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("expected {expected} generator images, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("image of generator {0} does not satisfy its order relation")]
    Order(usize),
    #[error("character is not invariant under the twisting automorphism at generator {0}")]
    NotInvariant(usize),
    #[error("stable letter image missing or superfluous")]
    Stable,
    #[error("morphism is defined on a different group")]
    GroupMismatch,
}

/// Image `sign * zeta^root * T^power` of one generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnitImage {
    pub sign: i8,
    pub root: i64,
    pub power: i64,
}

impl UnitImage {
    pub const ONE: UnitImage = UnitImage { sign: 1, root: 0, power: 0 };

    fn to_laurent(self, field: &Arc<CycloField>) -> Laurent {
        let c = Cyclo::zeta(field, self.root);
        let c = if self.sign < 0 { c.neg() } else { c };
        Laurent::monomial(c, self.power)
    }
}

/// A ring homomorphism `Z[G] -> Q(zeta_n)[T, T^-1]` determined by generator images.
#[derive(Clone, Debug)]
pub struct RingMorphism {
    group: Arc<GroupSpec>,
    field: Arc<CycloField>,
    base: Vec<UnitImage>,
    stable: Option<UnitImage>,
    label: String,
}

impl RingMorphism {
    pub fn new(
        group: &Arc<GroupSpec>,
        n: u64,
        base: Vec<UnitImage>,
        stable: Option<UnitImage>,
    ) -> Result<Self, MorphismError> {
        if base.len() != group.rank() {
            return Err(MorphismError::Arity { expected: group.rank(), got: base.len() });
        }
        if group.is_twisted() != stable.is_some() {
            return Err(MorphismError::Stable);
        }
        let field = CycloField::new(n);
        let label = format!("chi{:?}", base.iter().map(|u| u.root).collect::<Vec<_>>());
        let m = RingMorphism { group: group.clone(), field, base, stable, label };
        let one = Laurent::constant(Cyclo::from_int(&m.field, 1));
        for (i, &ord) in group.orders().iter().enumerate() {
            if ord > 0 {
                let img = m.base[i].to_laurent(&m.field);
                let mut p = one.clone();
                for _ in 0..ord {
                    p = p.mul(&img);
                }
                if p != one {
                    return Err(MorphismError::Order(i));
                }
            }
        }
        if group.is_twisted() {
            for i in 0..group.rank() {
                let g = group.generator(i);
                let ag = group.alpha_element(&g, 1);
                let a = m.apply(&GroupRingElement::monomial(group, g, 1));
                let b = m.apply(&GroupRingElement::monomial(group, ag, 1));
                if a != b {
                    return Err(MorphismError::NotInvariant(i));
                }
            }
        }
        Ok(m)
    }

    /// The augmentation `Z[G] -> Z`.
    pub fn augmentation(group: &Arc<GroupSpec>) -> Self {
        let stable = group.is_twisted().then_some(UnitImage::ONE);
        let mut m = RingMorphism::new(group, 1, vec![UnitImage::ONE; group.rank()], stable).expect("augmentation is valid");
        m.label = "augmentation".into();
        m
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    pub fn base_images(&self) -> &[UnitImage] {
        &self.base
    }

    pub fn stable_image(&self) -> Option<UnitImage> {
        self.stable
    }

    /// True when no generator is sent to a nonzero power of T.
    pub fn is_finite_character(&self) -> bool {
        self.base.iter().chain(self.stable.iter()).all(|u| u.power == 0)
    }

    pub fn apply(&self, a: &GroupRingElement) -> Laurent {
        let mut acc = Laurent::zero(&self.field);
        for (g, c) in a.terms() {
            let mut sign = 1i64;
            let mut root = 0i64;
            let mut power = 0i64;
            for (e, img) in g.exponents().iter().zip(&self.base) {
                if img.sign < 0 && e.rem_euclid(2) == 1 {
                    sign = -sign;
                }
                root += e * img.root;
                power += e * img.power;
            }
            if let Some(s) = &self.stable {
                let e = g.stable_power();
                if s.sign < 0 && e.rem_euclid(2) == 1 {
                    sign = -sign;
                }
                root += e * s.root;
                power += e * s.power;
            }
            let z = Cyclo::zeta(&self.field, root);
            let coeff = Cyclo::from_int(&self.field, c.clone() * sign);
            acc = acc.add(&Laurent::monomial(z.mul(&coeff), power));
        }
        acc
    }

    pub fn try_apply(&self, a: &GroupRingElement) -> Result<Laurent, MorphismError> {
        if !same_group(&self.group, a.group()) {
            return Err(MorphismError::GroupMismatch);
        }
        Ok(self.apply(a))
    }

    /// Images of the trivial units `+-g`: `(root subgroup step, T-power step)`;
    /// `+-zeta^j T^m` is the image of a group element iff `step_root | j` and
    /// `step_power | m` (a step of 0 means only 0 occurs).
    pub fn trivial_steps(&self) -> (u64, i64) {
        let n = self.field.order() as i64;
        let mut rs = n;
        let mut ps = 0i64;
        for img in self.base.iter().chain(self.stable.iter()) {
            rs = rs.gcd(&img.root.rem_euclid(n));
            ps = ps.gcd(&img.power);
        }
        (rs.max(1) as u64, ps)
    }

    /// Whether `x` is the image of a trivial unit `+-g`.
    pub fn is_trivial_value(&self, x: &Laurent) -> bool {
        let Some((c, m)) = x.as_monomial() else { return false };
        let Some((_, j)) = c.as_signed_root() else { return false };
        let (rs, ps) = self.trivial_steps();
        let root_ok = j % rs == 0;
        let power_ok = if ps == 0 { m == 0 } else { m % ps == 0 };
        root_ok && power_ok
    }
}

impl fmt::Display for RingMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Weight assigned to the i-th free coordinate so that distinct free
/// generators land on well separated powers of T.
fn free_weight(i: usize) -> i64 {
    1000i64.pow(i as u32)
}

/// All characters of the finite part (one per Galois orbit if `orbit_reps`),
/// with free coordinates sent to powers of `T` and the stable letter to `T`.
/// In a twisted group only automorphism-invariant characters are kept and
/// free base coordinates are sent to 1.
pub fn detecting_characters(group: &Arc<GroupSpec>, orbit_reps: bool) -> Vec<RingMorphism> {
    let orders = group.orders();
    let e = group.torsion_exponent();
    let finite: Vec<usize> = (0..orders.len()).filter(|&i| orders[i] > 0).collect();
    let twisted = group.is_twisted();
    let mut tuples: Vec<Vec<i64>> = vec![vec![]];
    for &i in &finite {
        let n = orders[i] as i64;
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |a| {
                    let mut v = t.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    let mut seen: Vec<Vec<i64>> = Vec::new();
    let mut out = Vec::new();
    for tup in tuples {
        let roots: Vec<i64> = tup.iter().zip(&finite).map(|(a, &i)| a * (e as i64 / orders[i] as i64)).collect();
        if orbit_reps {
            let canon = galois_canonical(&roots, e as i64);
            if seen.contains(&canon) {
                continue;
            }
            seen.push(canon);
        }
        // conductor of the character: the smallest field containing its values
        let cond = roots.iter().fold(e as i64, |g, &r| g.gcd(&r));
        let cond_n = (e as i64 / cond.max(1)).max(1);
        let scale = e as i64 / cond_n;
        let mut base = Vec::with_capacity(orders.len());
        let mut fi = 0usize;
        let mut free_count = 0usize;
        for &ord in orders {
            if ord > 0 {
                base.push(UnitImage { sign: 1, root: roots[fi] / scale, power: 0 });
                fi += 1;
            } else if twisted {
                base.push(UnitImage::ONE);
            } else {
                base.push(UnitImage { sign: 1, root: 0, power: free_weight(free_count) });
                free_count += 1;
            }
        }
        let stable = twisted.then_some(UnitImage { sign: 1, root: 0, power: 1 });
        if let Ok(m) = RingMorphism::new(group, cond_n as u64, base, stable) {
            let label = if roots.iter().all(|&r| r == 0) {
                "trivial character".to_string()
            } else {
                format!("chi{:?} into Q(z{cond_n})", roots.iter().map(|r| r / scale).collect::<Vec<_>>())
            };
            out.push(m.with_label(label));
        }
    }
    out
}

fn galois_canonical(roots: &[i64], e: i64) -> Vec<i64> {
    (1..=e.max(1))
        .filter(|a| a.gcd(&e) == 1)
        .map(|a| roots.iter().map(|r| (r * a).rem_euclid(e.max(1))).collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}
