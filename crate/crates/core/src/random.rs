//! Seeded generators of small test instances. Everything is assembled from
//! identity maps, `cone(id)` and elementary operations, so the torsion of a
//! generated object is known by construction: trivial, unless a unit twist
//! was requested, in which case it is the recorded sum of unit classes.

use std::sync::Arc;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{BasedChainComplex, ChainMap};
use crate::group::GroupSpec;
use crate::matrix::{GRMatrix, Matrix};
use crate::ring::GroupRingElement;
use crate::whitehead::TorsionClass;

/// `t^4 + t - 1` over `Z[Z/5]` and its inverse `t^3 + t^2 - 1`.
pub fn golden_unit(g: &Arc<GroupSpec>) -> (GroupRingElement, GroupRingElement) {
    let t = g.generator(0);
    (
        GroupRingElement::from_powers(g, &t, &[-1, 1, 0, 0, 1]),
        GroupRingElement::from_powers(g, &t, &[-1, 0, 1, 1]),
    )
}

/// A change of basis for every degree, each matrix with its inverse, plus
/// the Whitehead class of the change (`sum (-1)^k [M_k]`).
#[derive(Clone, Debug)]
pub struct Rebasing {
    pub change: Vec<(GRMatrix, GRMatrix)>,
    pub class: TorsionClass,
}

impl Rebasing {
    /// Map from the old complex to the rebased one (components `M_k^-1`);
    /// its torsion is minus the class of the change.
    pub fn forward(&self, c: &BasedChainComplex) -> ChainMap {
        let d = c.rebased(&self.change).expect("rebasing shapes");
        let comps = self.change.iter().map(|(_, inv)| inv.clone()).collect();
        ChainMap::new(c, &d, comps).expect("rebasing yields a chain isomorphism")
    }
}

pub struct InstanceGen {
    rng: ChaCha8Rng,
}

impl InstanceGen {
    pub fn new(seed: u64) -> Self {
        InstanceGen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// One of the trivial group, `Z/2` and `Z/5`.
    pub fn group(&mut self) -> Arc<GroupSpec> {
        let n = *[1u64, 2, 5].choose(&mut self.rng).expect("nonempty");
        Arc::new(if n == 1 { GroupSpec::trivial() } else { GroupSpec::cyclic(n) })
    }

    pub fn element(&mut self, g: &Arc<GroupSpec>, max_terms: usize, max_coeff: i64) -> GroupRingElement {
        let elems = g.finite_part_elements();
        let terms = self.rng.gen_range(0..=max_terms);
        GroupRingElement::from_terms(
            g,
            (0..terms).map(|_| {
                let e = elems.choose(&mut self.rng).expect("nonempty").clone();
                (BigInt::from(self.rng.gen_range(-max_coeff..=max_coeff)), e)
            }),
        )
    }

    fn trivial_unit(&mut self, g: &Arc<GroupSpec>) -> (GroupRingElement, GroupRingElement) {
        let elems = g.finite_part_elements();
        let e = elems.choose(&mut self.rng).expect("nonempty").clone();
        let s = if self.rng.gen_bool(0.5) { 1 } else { -1 };
        let inv = g.inv(&e);
        (GroupRingElement::monomial(g, e, s), GroupRingElement::monomial(g, inv, s))
    }

    /// A product of elementary, permutation and trivial-unit matrices of size
    /// `n`, with its inverse. With `twist`, a unit `u^(+-1)` of `Z[Z/5]` is
    /// multiplied in as well and its class returned.
    pub fn invertible(&mut self, g: &Arc<GroupSpec>, n: usize, twist: bool) -> (GRMatrix, GRMatrix, TorsionClass) {
        let zero = GroupRingElement::zero(g);
        let mut m = GRMatrix::gr_identity(n, g);
        let mut minv = GRMatrix::gr_identity(n, g);
        let mut class = TorsionClass::trivial(g);
        if n == 0 {
            return (m, minv, class);
        }
        let steps = self.rng.gen_range(n..=2 * n + 1);
        for _ in 0..steps {
            let (e, einv) = match self.rng.gen_range(0..6) {
                0 if n > 1 => {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(&mut self.rng);
                    let mut e = GRMatrix::gr_zeros(n, n, g);
                    let mut einv = GRMatrix::gr_zeros(n, n, g);
                    for (i, &j) in p.iter().enumerate() {
                        e.set(i, j, GroupRingElement::one(g));
                        einv.set(j, i, GroupRingElement::one(g));
                    }
                    (e, einv)
                }
                1 => {
                    let i = self.rng.gen_range(0..n);
                    let (u, ui) = self.trivial_unit(g);
                    let mut e = GRMatrix::gr_identity(n, g);
                    let mut einv = GRMatrix::gr_identity(n, g);
                    e.set(i, i, u);
                    einv.set(i, i, ui);
                    (e, einv)
                }
                _ if n > 1 => {
                    let i = self.rng.gen_range(0..n);
                    let mut j = self.rng.gen_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    let r = self.element(g, 2, 2);
                    let mut e = GRMatrix::gr_identity(n, g);
                    let mut einv = GRMatrix::gr_identity(n, g);
                    e.set(i, j, r.clone());
                    einv.set(i, j, -&r);
                    (e, einv)
                }
                _ => {
                    let (u, ui) = self.trivial_unit(g);
                    (Matrix::diag(&[u], &zero), Matrix::diag(&[ui], &zero))
                }
            };
            m = e.mul(&m).expect("square");
            minv = minv.mul(&einv).expect("square");
        }
        if twist && g.order() == Some(5) && !g.is_twisted() {
            let (u, ui) = golden_unit(g);
            let (u, ui) = if self.rng.gen_bool(0.5) { (u, ui) } else { (ui, u) };
            let i = self.rng.gen_range(0..n);
            let mut e = GRMatrix::gr_identity(n, g);
            let mut einv = GRMatrix::gr_identity(n, g);
            e.set(i, i, u.clone());
            einv.set(i, i, ui);
            m = m.mul(&e).expect("square");
            minv = einv.mul(&minv).expect("square");
            class = TorsionClass::from_unit(&u).expect("certified unit");
        }
        (m, minv, class)
    }

    /// Random rebasing of `c`; with `twist`, one degree carries a unit of
    /// `Z[Z/5]`.
    pub fn rebasing(&mut self, c: &BasedChainComplex, twist: bool) -> Rebasing {
        let g = c.group().clone();
        let top = c.top();
        let candidates: Vec<i64> = (0..=top).filter(|&k| c.rank(k) > 0).collect();
        let twisted = if twist { candidates.choose(&mut self.rng).copied() } else { None };
        let mut class = TorsionClass::trivial(&g);
        let change = (0..=top)
            .map(|k| {
                let (m, minv, cl) = self.invertible(&g, c.rank(k), twisted == Some(k));
                class = class.add(&cl.signed(k)).expect("same group");
                (m, minv)
            })
            .collect();
        Rebasing { change, class }
    }

    fn zero_differential(&mut self, g: &Arc<GroupSpec>, max_rank: usize, max_degree: i64) -> BasedChainComplex {
        let top = self.rng.gen_range(0..=max_degree);
        let ranks: Vec<usize> = (0..=top).map(|_| self.rng.gen_range(0..=max_rank)).collect();
        let diffs = (1..=top as usize).map(|k| GRMatrix::gr_zeros(ranks[k], ranks[k - 1], g)).collect();
        BasedChainComplex::new(g, ranks, diffs).expect("zero differentials")
    }

    /// `cone(id_C)` for a random `C` with ranks at most 2 in degrees at most
    /// 2, rebased by elementary operations: ranks at most 4, degrees at most 3,
    /// trivial torsion.
    pub fn acyclic(&mut self, g: &Arc<GroupSpec>) -> BasedChainComplex {
        loop {
            let c = self.zero_differential(g, 2, 2);
            if c.total_rank() == 0 {
                continue;
            }
            let cone = ChainMap::identity(&c).cone();
            let r = self.rebasing(&cone, false);
            return cone.rebased(&r.change).expect("rebasing shapes");
        }
    }

    /// A based complex with homology: a zero-differential part plus an
    /// elementary acyclic part, mixed by a rebasing.
    pub fn complex(&mut self, g: &Arc<GroupSpec>) -> BasedChainComplex {
        let z = self.zero_differential(g, 1, 2);
        let a = ChainMap::identity(&self.zero_differential(g, 1, 1)).cone();
        let c = z.direct_sum(&a).expect("same group");
        let r = self.rebasing(&c, false);
        c.rebased(&r.change).expect("rebasing shapes")
    }

    /// A based isomorphism out of `c` and its torsion (minus the change class).
    pub fn iso(&mut self, c: &BasedChainComplex, twist: bool) -> (ChainMap, TorsionClass) {
        let r = self.rebasing(c, twist);
        (r.forward(c), r.class.neg())
    }

    /// Two composable isomorphisms over a random group.
    pub fn composable(&mut self, g: &Arc<GroupSpec>) -> (ChainMap, ChainMap) {
        let c = self.complex(g);
        let tw = self.rng.gen_bool(0.5);
        let (f, _) = self.iso(&c, tw);
        let tw = self.rng.gen_bool(0.5);
        let (h, _) = self.iso(f.target(), tw);
        (f, h)
    }

    /// Data for the sum formula: `f0: C0 -> D0` and two extensions
    /// `fi: Ci -> Di` in which `C0`, `D0` are basis prefixes and `fi`
    /// restricts to `f0`.
    pub fn sum_instance(&mut self, g: &Arc<GroupSpec>) -> (ChainMap, ChainMap, ChainMap) {
        let c0 = self.complex(g);
        let top = c0.top() + 1;
        let c0 = c0.extended_to(top);
        let tw = self.rng.gen_bool(0.5);
        let r0 = self.rebasing(&c0, tw);
        let f0 = r0.forward(&c0);
        let mut ext = || {
            let e = self.zero_differential(g, 1, top).direct_sum(&ChainMap::identity(&self.zero_differential(g, 1, top - 1)).cone()).expect("same group");
            let e = e.extended_to(top);
            let ci = c0.direct_sum(&e).expect("same group");
            // mix extra cells into the prefix, keeping the prefix a subcomplex
            let mix: Vec<(GRMatrix, GRMatrix)> = (0..=top)
                .map(|k| {
                    let (n0, n1) = (c0.rank(k), e.rank(k));
                    let (nm, nminv, _) = self.invertible(g, n1, false);
                    let x = self.sparse(g, n1, n0);
                    let zero = GRMatrix::gr_zeros(n0, n1, g);
                    let id = GRMatrix::gr_identity(n0, g);
                    let m = Matrix::block(&id, &zero, &x, &nm).expect("block shapes");
                    let lower = nminv.mul(&x).expect("shapes").neg();
                    let minv = Matrix::block(&id, &zero, &lower, &nminv).expect("block shapes");
                    (m, minv)
                })
                .collect();
            let ci = ci.rebased(&mix).expect("rebasing shapes");
            // the map: prefix block r0, the rest mixed again
            let change: Vec<(GRMatrix, GRMatrix)> = (0..=top)
                .map(|k| {
                    let (n0, n1) = (c0.rank(k), e.rank(k));
                    let (p, pinv, _) = self.invertible(g, n1, false);
                    let y = self.sparse(g, n1, n0);
                    let (m0, m0inv) = &r0.change[k as usize];
                    let zero = GRMatrix::gr_zeros(n0, n1, g);
                    let m = Matrix::block(m0, &zero, &y, &p).expect("block shapes");
                    let lower = pinv.mul(&y).and_then(|x| x.mul(m0inv)).expect("shapes").neg();
                    let minv = Matrix::block(m0inv, &zero, &lower, &pinv).expect("block shapes");
                    (m, minv)
                })
                .collect();
            let di = ci.rebased(&change).expect("rebasing shapes");
            let comps = change.into_iter().map(|(_, inv)| inv).collect();
            ChainMap::new(&ci, &di, comps).expect("chain isomorphism")
        };
        let f1 = ext();
        let f2 = ext();
        (f0, f1, f2)
    }

    /// Two isomorphisms over independent random groups, for the product formula.
    pub fn product_instance(&mut self) -> (ChainMap, ChainMap) {
        let g1 = self.group();
        let g2 = Arc::new(if self.rng.gen_bool(0.5) { GroupSpec::trivial() } else { GroupSpec::cyclic(2) });
        let c1 = self.complex(&g1);
        let c2 = self.complex(&g2);
        let tw = self.rng.gen_bool(0.5);
        let (f1, _) = self.iso(&c1, tw);
        let (f2, _) = self.iso(&c2, false);
        (f1, f2)
    }

    fn sparse(&mut self, g: &Arc<GroupSpec>, rows: usize, cols: usize) -> GRMatrix {
        let mut m = GRMatrix::gr_zeros(rows, cols, g);
        for i in 0..rows {
            for j in 0..cols {
                if self.rng.gen_bool(0.4) {
                    m.set(i, j, self.element(g, 2, 2));
                }
            }
        }
        m
    }

    pub fn gen_bool(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torsion::{torsion_of_acyclic, whitehead_torsion};

    #[test]
    fn invertible_pairs_multiply_to_identity() {
        let mut gen = InstanceGen::new(7);
        for _ in 0..20 {
            let g = gen.group();
            let n = gen.rng.gen_range(1..4);
            let (m, minv, _) = gen.invertible(&g, n, true);
            assert!(m.mul(&minv).unwrap().is_identity());
            assert!(minv.mul(&m).unwrap().is_identity());
        }
    }

    #[test]
    fn generated_acyclic_complexes_are_simple() {
        let mut gen = InstanceGen::new(1);
        for _ in 0..10 {
            let g = gen.group();
            let c = gen.acyclic(&g);
            assert!(c.ranks().iter().all(|&r| r <= 4) && c.top() <= 3);
            assert!(torsion_of_acyclic(&c).unwrap().class.classify().is_trivial());
        }
    }

    #[test]
    fn iso_torsion_matches_recorded_class() {
        let mut gen = InstanceGen::new(3);
        let g = Arc::new(GroupSpec::cyclic(5));
        for _ in 0..5 {
            let c = gen.complex(&g);
            let (f, expected) = gen.iso(&c, true);
            assert!(whitehead_torsion(&f).unwrap().compare(&expected).unwrap().is_trivial());
        }
    }

    #[test]
    fn seeds_reproduce() {
        let a = InstanceGen::new(42).acyclic(&Arc::new(GroupSpec::cyclic(5)));
        let b = InstanceGen::new(42).acyclic(&Arc::new(GroupSpec::cyclic(5)));
        assert_eq!(a, b);
    }
}
