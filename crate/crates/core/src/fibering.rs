//! Fibering obstructions: the transport cocycle, simple-structure changes,
//! mapping-torus models over the circle, glued h-cobordisms and the product
//! transfer.

use std::sync::Arc;

use thiserror::Error;

use crate::chain::{BasedChainComplex, ChainError, ChainMap, SelfEquivalenceWithTwist, TensorLayout};
use crate::group::{GroupError, GroupMorphism, GroupSpec};
use crate::matrix::{GRMatrix, Matrix, MatrixError};
use crate::ring::GroupRingElement;
use crate::torsion::{homotopy_inverse, whitehead_torsion, TorsionError};
use crate::whitehead::{rebase, Certificate, TorsionClass, TriState, Verdict, WhError, WhTensorClass};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberingError {
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Torsion(#[from] TorsionError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Wh(#[from] WhError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

impl FiberingError {
    pub fn is_stuck(&self) -> bool {
        matches!(self, FiberingError::Torsion(e) if e.is_stuck())
    }
}

type Result<T> = std::result::Result<T, FiberingError>;

/// Fiber transport classes, one per generator of the fundamental group of
/// the base. `orders[i]` is the order of generator `i` when it is finite.
#[derive(Clone, Debug)]
pub struct FiberTransportDatum {
    pub generators: Vec<String>,
    pub classes: Vec<TorsionClass>,
    pub orders: Vec<Option<u64>>,
}

#[derive(Clone, Debug)]
pub struct ThetaReport {
    pub classes: Vec<(String, TorsionClass, Verdict)>,
    /// Whether every generator class is trivial.
    pub is_simple: TriState,
}

pub fn theta(datum: &FiberTransportDatum) -> Result<ThetaReport> {
    let n = datum.generators.len();
    if datum.classes.len() != n || datum.orders.len() != n {
        return Err(FiberingError::Inconsistent("one class and one order entry per generator".into()));
    }
    let mut classes = Vec::with_capacity(n);
    for ((name, x), order) in datum.generators.iter().zip(&datum.classes).zip(&datum.orders) {
        if let Some(k) = order {
            let total = x.scale(*k as i64);
            if total.classify().is_nontrivial() {
                return Err(FiberingError::Inconsistent(format!(
                    "generator {name} has order {k} but {k} times its class is nontrivial"
                )));
            }
        }
        classes.push((name.clone(), x.clone(), x.classify()));
    }
    let is_simple = if classes.iter().all(|c| c.2.is_trivial()) {
        TriState::Trivial
    } else if classes.iter().any(|c| c.2.is_nontrivial()) {
        TriState::NonTrivial
    } else {
        TriState::Unknown
    };
    Ok(ThetaReport { classes, is_simple })
}

/// Cells of a base space, each with its dimension and the torsion of the
/// comparison path through it.
#[derive(Clone, Debug)]
pub struct SpiderLedger {
    pub base_dimension: usize,
    pub cells: Vec<(usize, TorsionClass)>,
}

/// `sum (-1)^dim(c) x_c` over the cells of the ledger.
pub fn simple_structure_change(ledger: &SpiderLedger, group: &Arc<GroupSpec>) -> Result<TorsionClass> {
    if let Some((d, _)) = ledger.cells.iter().find(|(d, _)| *d > ledger.base_dimension) {
        return Err(FiberingError::Inconsistent(format!(
            "cell of dimension {d} in a base of dimension {}",
            ledger.base_dimension
        )));
    }
    let signed: Vec<TorsionClass> =
        ledger.cells.iter().map(|(d, x)| rebase(x, group).map(|x| x.signed(*d as i64))).collect::<std::result::Result<_, _>>()?;
    Ok(TorsionClass::sum(group, &signed)?)
}

/// Restricts a matrix over a twisted group whose entries avoid the stable
/// letter to the base group.
fn to_base(m: &GRMatrix, base: &Arc<GroupSpec>) -> Result<GRMatrix> {
    let zero = GroupRingElement::zero(base);
    let mut out = Matrix::zeros(m.rows(), m.cols(), &zero);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let x = m.get(i, j);
            let mut terms = Vec::with_capacity(x.num_terms());
            for (g, c) in x.terms() {
                if g.stable_power() != 0 {
                    return Err(FiberingError::Inconsistent("entry involves the stable letter".into()));
                }
                terms.push((c.clone(), base.element(g.exponents().to_vec(), 0)?));
            }
            out.set(i, j, GroupRingElement::from_terms(base, terms));
        }
    }
    Ok(out)
}

fn stable_unit(g: &Arc<GroupSpec>, power: i64) -> Result<GroupRingElement> {
    let t = g.stable().ok_or_else(|| FiberingError::Unsupported("group has no stable letter".into()))?;
    Ok(GroupRingElement::monomial(g, g.pow(&t, power), 1))
}

/// Algebraic model of a map to the circle: the fiber complex with its
/// twisted self-equivalence, the total complex with its simple basis, and an
/// equivalence from the mapping torus to it.
#[derive(Clone, Debug)]
pub struct S1FiberingModel {
    pub fiber: SelfEquivalenceWithTwist,
    pub total: BasedChainComplex,
    pub e_hat: ChainMap,
}

#[derive(Clone, Debug)]
pub struct S1Invariants {
    pub theta: TorsionClass,
    pub theta_verdict: Verdict,
    /// Agreement of `theta` with the torsion of `t v` over the twisted group.
    pub theta_cross_check: Verdict,
    pub tau_prime: TorsionClass,
    pub tau_prime_verdict: Verdict,
    /// Reported only when `theta` is trivial.
    pub tau_fib: Option<TorsionClass>,
}

impl S1FiberingModel {
    pub fn new(fiber: SelfEquivalenceWithTwist, total: BasedChainComplex, e_hat: ChainMap) -> Result<Self> {
        let torus = fiber.mapping_torus()?;
        if e_hat.source() != &torus {
            return Err(FiberingError::Inconsistent("equivalence does not start at the mapping torus".into()));
        }
        if e_hat.target() != &total {
            return Err(FiberingError::Inconsistent("equivalence does not end at the total complex".into()));
        }
        Ok(S1FiberingModel { fiber, total, e_hat })
    }

    /// Model whose total complex is the mapping torus itself rebased by the
    /// given degreewise isomorphisms `(M_k, M_k^-1)`; the equivalence is the
    /// change of basis.
    pub fn rebased_torus(fiber: SelfEquivalenceWithTwist, change: &[(GRMatrix, GRMatrix)]) -> Result<Self> {
        let torus = fiber.mapping_torus()?;
        if change.len() != torus.ranks().len() {
            return Err(FiberingError::Inconsistent(format!(
                "need {} basis changes, got {}",
                torus.ranks().len(),
                change.len()
            )));
        }
        let total = torus.rebased(change)?;
        let e_hat = ChainMap::new(&torus, &total, change.iter().map(|(_, inv)| inv.clone()).collect())?;
        Self::new(fiber, total, e_hat)
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        self.fiber.complex.group()
    }

    fn base(&self) -> Arc<GroupSpec> {
        Arc::new(self.group().base())
    }

    /// The fiber complex over the base group and the complex with `alpha^-1`
    /// applied to its differentials.
    fn base_complexes(&self) -> Result<(BasedChainComplex, BasedChainComplex)> {
        let base = self.base();
        let c = &self.fiber.complex;
        let diffs = (1..=c.top()).map(|k| to_base(&c.d(k), &base)).collect::<Result<Vec<_>>>()?;
        let twisted = (1..=c.top()).map(|k| to_base(&c.d(k).conjugate_by_stable(-1), &base)).collect::<Result<Vec<_>>>()?;
        Ok((
            BasedChainComplex::new(&base, c.ranks().to_vec(), diffs)?,
            BasedChainComplex::new(&base, c.ranks().to_vec(), twisted)?,
        ))
    }

    /// `v` as a chain map `alpha^-1 C -> C` over the base group.
    pub fn v_over_base(&self) -> Result<ChainMap> {
        let base = self.base();
        let (c, ac) = self.base_complexes()?;
        let comps = (0..=c.top()).map(|k| to_base(&self.fiber.f(k), &base)).collect::<Result<Vec<_>>>()?;
        Ok(ChainMap::new(&ac, &c, comps)?)
    }

    pub fn invariants(&self) -> Result<S1Invariants> {
        let g = self.group().clone();
        let incl = GroupMorphism::base_inclusion(&g)?;
        let tv = whitehead_torsion(&self.v_over_base()?)?;
        let theta = rebase(&tv, incl.source())?.induced(&incl)?;
        let t = stable_unit(&g, 1)?;
        let c = &self.fiber.complex;
        let a_comps = (0..=c.top()).map(|k| self.fiber.f(k).scale_left(&t)).collect();
        let a = ChainMap::new(c, c, a_comps)?;
        let theta_cross_check = theta.compare(&whitehead_torsion(&a)?)?;
        let tau_prime = whitehead_torsion(&self.e_hat)?;
        let theta_verdict = theta.classify();
        let tau_fib = theta_verdict.is_trivial().then(|| tau_prime.clone());
        Ok(S1Invariants { theta_verdict, theta, theta_cross_check, tau_prime_verdict: tau_prime.classify(), tau_prime, tau_fib })
    }

    /// The orientation-reversed model: `v` replaced by a homotopy inverse,
    /// the twist by its inverse. Returned together with the isomorphism from
    /// its group to the group of `self` (stable letter to its inverse).
    pub fn reversed(&self) -> Result<(S1FiberingModel, GroupMorphism)> {
        let g = self.group().clone();
        let base = self.base();
        let mut name = format!("{}'", g.stable_name().unwrap_or("s"));
        while g.names().contains(&name) {
            name.push('\'');
        }
        let g_rev = Arc::new(g.reversed_twist(&name)?);
        let gens = |target: &Arc<GroupSpec>| (0..target.rank()).map(|i| target.generator(i)).collect::<Vec<_>>();
        let t_inv = g.pow(&g.stable().expect("twisted"), -1);
        let t_rev_inv = g_rev.pow(&g_rev.stable().expect("twisted"), -1);
        let psi = GroupMorphism::new(g_rev.clone(), g.clone(), gens(&g), Some(t_inv))?;
        let psi_inv = GroupMorphism::new(g.clone(), g_rev.clone(), gens(&g_rev), Some(t_rev_inv))?;

        let v = self.v_over_base()?;
        let hi = homotopy_inverse(&v)?;
        let top = self.fiber.complex.top();
        let incl = GroupMorphism::base_inclusion(&g)?;
        let lift = |m: &GRMatrix| -> Result<GRMatrix> { Ok(m.map_group(&rebase_morphism(&incl, &base)?)?) };

        // W = alpha(v') lives over the reversed group; its complex is the same.
        let incl_rev = GroupMorphism::base_inclusion(&g_rev)?;
        let c_rev = self.fiber.complex.induce(&psi_inv)?;
        let w_comps = (0..=top)
            .map(|k| -> Result<GRMatrix> {
                let vk = hi.inverse.f(k).map_group(&rebase_morphism(&incl_rev, &base)?)?;
                Ok(vk.conjugate_by_stable(-1))
            })
            .collect::<Result<Vec<_>>>()?;
        let fiber_rev = SelfEquivalenceWithTwist::new(c_rev, w_comps)?;

        // Reflection from the reversed torus (transported to G) to the torus.
        let c = &self.fiber.complex;
        let t_inv_el = stable_unit(&g, -1)?;
        let one_minus = |b: &dyn Fn(i64) -> Result<GRMatrix>| -> Result<ChainMap> {
            let comps = (0..=top)
                .map(|k| Ok(GRMatrix::gr_identity(c.rank(k), &g).sub(&b(k)?)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(ChainMap::new(c, c, comps)?)
        };
        let b = |k: i64| -> Result<GRMatrix> {
            let vk = lift(&hi.inverse.f(k))?;
            let tk = GRMatrix::gr_identity(c.rank(k), &g).scale_left(&t_inv_el);
            Ok(vk.mul(&tk)?)
        };
        let a = |k: i64| -> Result<GRMatrix> { Ok(self.fiber.f(k).scale_left(&stable_unit(&g, 1)?)) };
        let f_rev = one_minus(&b)?;
        let f_fwd = one_minus(&a)?;
        // I - v'v = K d + d K with K = -H, H the homotopy v'v ~ 1.
        let k_h = |j: i64| -> Result<GRMatrix> {
            let h = hi.target_homotopy.h(j, &hi.inverse.then(&v)?).into_owned();
            Ok(lift(&h)?.neg())
        };
        let torus_rev = f_rev.cone();
        let torus = f_fwd.cone();
        let mut comps = Vec::new();
        for k in 0..=torus.top() {
            let psi_k = GRMatrix::gr_identity(c.rank(k), &g);
            let l = k_h(k - 1)?;
            let phi = b(k - 1)?.neg();
            let z = GRMatrix::gr_zeros(c.rank(k), c.rank(k - 1), &g);
            comps.push(Matrix::block(&psi_k, &z, &l, &phi)?);
        }
        let h = ChainMap::new(&torus_rev, &torus, comps)?;
        let e_rev = h.then(&self.e_hat)?.induce(&psi_inv)?;
        let total_rev = self.total.induce(&psi_inv)?;
        let model = S1FiberingModel::new(fiber_rev, total_rev, e_rev)?;
        Ok((model, psi))
    }
}

/// The same morphism with its source replaced by a structurally equal group.
fn rebase_morphism(m: &GroupMorphism, source: &Arc<GroupSpec>) -> Result<GroupMorphism> {
    let imgs = (0..source.rank()).map(|i| m.apply(&m.source().generator(i))).collect();
    Ok(GroupMorphism::new(source.clone(), m.target().clone(), imgs, None)?)
}

/// Comparison of the mapping-torus obstruction with the fiber torsions of a
/// model and its orientation reversal, under both orderings of the difference.
#[derive(Clone, Debug)]
pub struct OrientationCheck {
    pub theta: TorsionClass,
    pub tau_prime: TorsionClass,
    /// `tau'` of the reversed model, transported to the group of the model.
    pub tau_prime_reversed: TorsionClass,
    /// `theta - (tau' - tau'_reversed)`.
    pub stated: Verdict,
    /// `theta - (tau'_reversed - tau')`.
    pub swapped: Verdict,
}

pub fn orientation_check(model: &S1FiberingModel) -> Result<OrientationCheck> {
    let inv = model.invariants()?;
    let (rev, psi) = model.reversed()?;
    let inv_rev = rev.invariants()?;
    let tau_rev = rebase(&inv_rev.tau_prime.induced(&psi)?, model.group())?;
    let stated = inv.theta.sub(&inv.tau_prime.sub(&tau_rev)?)?.classify();
    let swapped = inv.theta.sub(&tau_rev.sub(&inv.tau_prime)?)?.classify();
    Ok(OrientationCheck { theta: inv.theta, tau_prime: inv.tau_prime, tau_prime_reversed: tau_rev, stated, swapped })
}

/// An h-cobordism given by its torsion over the group of one end, together
/// with the gluing automorphism.
#[derive(Clone, Debug)]
pub struct HCobordismAlgebraic {
    pub group: Arc<GroupSpec>,
    pub phi: Vec<Vec<i64>>,
    pub dim: i64,
    pub tau_w: TorsionClass,
    pub stable_w: i8,
}

impl HCobordismAlgebraic {
    pub fn new(group: Arc<GroupSpec>, phi: Vec<Vec<i64>>, dim: i64, tau_w: TorsionClass) -> Result<Self> {
        if dim < 2 {
            return Err(FiberingError::Inconsistent(format!("dimension {dim} is below 2")));
        }
        if group.is_twisted() {
            return Err(FiberingError::Inconsistent("the end group must be untwisted".into()));
        }
        let h = HCobordismAlgebraic { tau_w: rebase(&tau_w, &group)?, group, phi, dim, stable_w: 1 };
        h.glued_group()?;
        Ok(h)
    }

    /// `G x_phi Z`; fails when `phi` is not an automorphism or does not
    /// preserve the orientation character.
    pub fn glued_group(&self) -> Result<Arc<GroupSpec>> {
        let mut name = String::from("s");
        while self.group.names().contains(&name) {
            name.push('\'');
        }
        Ok(Arc::new((*self.group).clone().semidirect(self.phi.clone(), &name, self.stable_w)?))
    }
}

#[derive(Clone, Debug)]
pub struct GlueReport {
    pub group: Arc<GroupSpec>,
    /// `x = l_* tau(W)`.
    pub x: TorsionClass,
    pub theta: TorsionClass,
    pub tau_prime: TorsionClass,
    /// Reported only when `theta` classifies trivial: `-x`.
    pub tau_fib: Option<TorsionClass>,
    pub verdicts: GlueVerdicts,
    /// `tau' - (x - theta)`, which must reduce to nothing by elementary operations.
    pub identity: Verdict,
    /// Comparison of `tau'` with `(-1)^dim * x`.
    pub stated_sign: Verdict,
    /// The equivalence of the three vanishing statements; `None` when some
    /// classification is undecided.
    pub vanishing_equivalence: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct GlueVerdicts {
    pub x: Verdict,
    pub theta: Verdict,
    pub tau_prime: Verdict,
    pub tau_fib: Option<Verdict>,
}

impl GlueReport {
    pub fn identity_holds(&self) -> bool {
        matches!(self.identity.certificate, Certificate::Elimination { .. })
    }
}

pub fn glue_hcobordism(h: &HCobordismAlgebraic) -> Result<GlueReport> {
    let g = h.glued_group()?;
    let incl = GroupMorphism::base_inclusion(&g)?;
    let x = rebase(&h.tau_w, incl.source())?.induced(&incl)?;
    let star = x.involution();
    let theta = star.signed(h.dim).add(&x)?;
    // (-1)^(dim - 1) * x, the sign produced by the sum formula for the glued torus.
    let tau_prime = star.signed(h.dim - 1);
    let identity = tau_prime.sub(&x.sub(&theta)?)?.classify();
    let stated_sign = tau_prime.compare(&star.signed(h.dim))?;
    let verdicts = GlueVerdicts {
        x: x.classify(),
        theta: theta.classify(),
        tau_prime: tau_prime.classify(),
        tau_fib: None,
    };
    let tau_fib = verdicts.theta.is_trivial().then(|| x.neg());
    let verdicts = GlueVerdicts { tau_fib: tau_fib.as_ref().map(|t| t.classify()), ..verdicts };
    let vanishing_equivalence = decisive(&verdicts.x).and_then(|a| {
        let b = decisive(&verdicts.tau_prime)?;
        let th = decisive(&verdicts.theta)?;
        let c = if th { decisive(verdicts.tau_fib.as_ref()?)? } else { false };
        Some(a == b && b == (th && c))
    });
    Ok(GlueReport { group: g, x, theta, tau_prime, tau_fib, verdicts, identity, stated_sign, vanishing_equivalence })
}

fn decisive(v: &Verdict) -> Option<bool> {
    match v.state {
        TriState::Trivial => Some(true),
        TriState::NonTrivial => Some(false),
        TriState::Unknown => None,
    }
}

#[derive(Clone, Debug)]
pub struct BridgeReport {
    pub tensor: WhTensorClass,
    /// `j` of the tensor class.
    pub image: TorsionClass,
    /// Comparison of the image with `(-1)^dim * (tau')^*`.
    pub stated: Verdict,
    /// Comparison of the image with `(-1)^(dim - 1) * (tau')^*`.
    pub corrected: Verdict,
}

pub fn tensor_bridge(h: &HCobordismAlgebraic) -> Result<BridgeReport> {
    let glue = glue_hcobordism(h)?;
    if !glue.verdicts.theta.is_trivial() {
        return Err(FiberingError::Precondition(format!("mapping torus obstruction is {}", glue.verdicts.theta.state)));
    }
    let alpha = GroupMorphism::from_matrix(&h.group, &h.phi)?;
    let tensor = WhTensorClass::new(h.tau_w.clone(), alpha)?;
    let image = tensor.include(&glue.group)?;
    let star = glue.tau_prime.involution();
    let stated = image.compare(&star.signed(h.dim))?;
    let corrected = image.compare(&star.signed(h.dim - 1))?;
    Ok(BridgeReport { tensor, image, stated, corrected })
}

/// Transfer of a class along a product fibration with fiber Euler
/// characteristic `chi`: `chi` times the induced class.
pub fn transfer_product(tau: &TorsionClass, chi: i64, inclusion: &GroupMorphism) -> Result<TorsionClass> {
    Ok(rebase(tau, inclusion.source())?.induced(inclusion)?.scale(chi))
}

/// Fiber complexes over the trivial group used for product fibrations.
pub fn point_fiber() -> BasedChainComplex {
    BasedChainComplex::concentrated(&Arc::new(GroupSpec::trivial()), 0, 1)
}

/// Two cells with zero differential, Euler characteristic zero.
pub fn circle_fiber() -> BasedChainComplex {
    let g = Arc::new(GroupSpec::trivial());
    BasedChainComplex::new(&g, vec![1, 1], vec![GRMatrix::gr_zeros(1, 1, &g)]).expect("valid complex")
}

/// Cells in degrees 0 and 2, Euler characteristic two.
pub fn sphere_fiber() -> BasedChainComplex {
    let g = Arc::new(GroupSpec::trivial());
    BasedChainComplex::new(&g, vec![1, 0, 1], vec![GRMatrix::gr_zeros(0, 1, &g), GRMatrix::gr_zeros(1, 0, &g)])
        .expect("valid complex")
}

/// Outcome of the composition formula on a product-built composite.
#[derive(Clone, Debug)]
pub struct CompositeCheck {
    pub composite: S1FiberingModel,
    pub lhs: TorsionClass,
    pub rhs: TorsionClass,
    pub verdict: Verdict,
}

/// Builds the model of `F x M -> M -> S^1` from a model of `M -> S^1`, a
/// fiber complex `fiber` over the trivial group and a basis change `sigma`
/// of `fiber (x) D`, and compares `tau_fib` of the composite with
/// `tau(sigma) + chi(F) * tau_fib(g)`.
pub fn check_composite_product(
    g_model: &S1FiberingModel,
    fiber: &BasedChainComplex,
    sigma: &[(GRMatrix, GRMatrix)],
) -> Result<CompositeCheck> {
    if fiber.group().rank() != 0 || fiber.group().is_twisted() {
        return Err(FiberingError::Unsupported("only product fibrations with simply connected fiber".into()));
    }
    let gamma = g_model.group().clone();
    let g_inv = g_model.invariants()?;
    let tau_fib_g = g_inv
        .tau_fib
        .ok_or_else(|| FiberingError::Precondition("the map to the circle must have trivial mapping torus obstruction".into()))?;

    let ef = fiber.tensor(&g_model.fiber.complex)?;
    let c2 = ef.complex.clone();
    let top = c2.top();
    let v2 = (0..=top)
        .map(|k| {
            let mut m = GRMatrix::gr_zeros(c2.rank(k), c2.rank(k), c2.group());
            for i in 0..=k {
                let blk = crate::chain::kron(&GRMatrix::gr_identity(fiber.rank(i), c2.group()), &g_model.fiber.f(k - i).map_group(&same(&gamma, c2.group())?)?);
                paste(&mut m, &blk, ef.layout.offset(k, i), ef.layout.offset(k, i));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let fiber2 = SelfEquivalenceWithTwist::new(c2, v2)?;
    let torus2 = fiber2.mapping_torus()?;

    let id_f = ChainMap::identity(fiber);
    let e_prod = id_f.tensor(&g_model.e_hat)?;
    let pi = torus_product_iso(fiber, &g_model.fiber.complex, &torus2, e_prod.source())?;
    let d_prod = e_prod.target().clone();
    if sigma.len() != d_prod.ranks().len() {
        return Err(FiberingError::Inconsistent(format!("need {} basis changes, got {}", d_prod.ranks().len(), sigma.len())));
    }
    let total = d_prod.rebased(sigma)?;
    let sig = ChainMap::new(&d_prod, &total, sigma.iter().map(|(_, inv)| inv.clone()).collect())?;
    let e2 = pi.then(&e_prod)?.then(&sig)?;
    let composite = S1FiberingModel::new(fiber2, total, e2)?;

    let inv = composite.invariants()?;
    let lhs = rebase(inv.tau_fib.as_ref().unwrap_or(&inv.tau_prime), &gamma)?;
    let sigma_t = rebase(&whitehead_torsion(&sig)?, &gamma)?;
    let transfer = transfer_product(&tau_fib_g, fiber.euler_characteristic(), &GroupMorphism::identity(&gamma))?;
    let rhs = sigma_t.add(&transfer)?;
    let verdict = lhs.sub(&rhs)?.classify();
    Ok(CompositeCheck { composite, lhs, rhs, verdict })
}

fn same(a: &Arc<GroupSpec>, b: &Arc<GroupSpec>) -> Result<GroupMorphism> {
    let imgs = (0..b.rank()).map(|i| b.generator(i)).collect();
    Ok(GroupMorphism::new(a.clone(), b.clone(), imgs, b.stable())?)
}

fn paste(m: &mut GRMatrix, blk: &GRMatrix, r0: usize, c0: usize) {
    for i in 0..blk.rows() {
        for j in 0..blk.cols() {
            m.set(r0 + i, c0 + j, blk.get(i, j).clone());
        }
    }
}

/// The based isomorphism `T(id (x) v) -> E (x) T(v)`: `e (x) c` in the first
/// summand goes to `e (x) (c, 0)`, and `e (x) c` in the shifted summand to
/// `(-1)^|e| e (x) (0, c)`.
fn torus_product_iso(
    e: &BasedChainComplex,
    c: &BasedChainComplex,
    torus2: &BasedChainComplex,
    target: &BasedChainComplex,
) -> Result<ChainMap> {
    let g = target.group().clone();
    let lx = TensorLayout::new(e, c);
    let torus_ranks: Vec<usize> = (0..=c.top() + 1).map(|j| c.rank(j) + c.rank(j - 1)).collect();
    let t_rank = |j: i64| if j < 0 || j as usize >= torus_ranks.len() { 0 } else { torus_ranks[j as usize] };
    let offset_t = |k: i64, i: i64| -> usize { (0..i).map(|a| e.rank(a) * t_rank(k - a)).sum() };
    let mut comps = Vec::new();
    for k in 0..=torus2.top() {
        let mut m = GRMatrix::gr_zeros(torus2.rank(k), target.rank(k), &g);
        let first = lx.rank(k);
        for i in 0..=k {
            for p in 0..e.rank(i) {
                for q in 0..c.rank(k - i) {
                    let col = offset_t(k, i) + p * t_rank(k - i) + q;
                    m.set(lx.index(k, i, p, q), col, GroupRingElement::one(&g));
                }
                for q in 0..c.rank(k - 1 - i) {
                    let col = offset_t(k, i) + p * t_rank(k - i) + c.rank(k - i) + q;
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    m.set(first + lx.index(k - 1, i, p, q), col, GroupRingElement::from_int(&g, sign));
                }
            }
        }
        comps.push(m);
    }
    Ok(ChainMap::new(torus2, target, comps)?)
}

/// Zero differential fiber complex with the given ranks over a twisted group,
/// and `v` acting diagonally by the given base units in each degree.
pub fn diagonal_model(
    group: &Arc<GroupSpec>,
    units: &[Vec<GroupRingElement>],
    change: Option<&[(GRMatrix, GRMatrix)]>,
) -> Result<S1FiberingModel> {
    let ranks: Vec<usize> = units.iter().map(|u| u.len()).collect();
    let diffs = (1..ranks.len()).map(|k| GRMatrix::gr_zeros(ranks[k], ranks[k - 1], group)).collect();
    let c = BasedChainComplex::new(group, ranks, diffs)?;
    let zero = GroupRingElement::zero(group);
    let comps = units.iter().map(|u| Matrix::diag(u, &zero)).collect();
    let fiber = SelfEquivalenceWithTwist::new(c, comps)?;
    let torus = fiber.mapping_torus()?;
    let identity: Vec<(GRMatrix, GRMatrix)> = torus
        .ranks()
        .iter()
        .map(|&r| (GRMatrix::gr_identity(r, group), GRMatrix::gr_identity(r, group)))
        .collect();
    S1FiberingModel::rebased_torus(fiber, change.unwrap_or(&identity))
}

/// Diagonal basis change by units, with inverses supplied by the caller's
/// units being certified in the ring.
pub fn diagonal_change(group: &Arc<GroupSpec>, units: &[Vec<GroupRingElement>]) -> Result<Vec<(GRMatrix, GRMatrix)>> {
    let zero = GroupRingElement::zero(group);
    units
        .iter()
        .map(|us| {
            let inv = us
                .iter()
                .map(|u| u.inverse().ok_or_else(|| FiberingError::Inconsistent(format!("{u} is not a certified unit"))))
                .collect::<Result<Vec<_>>>()?;
            Ok((Matrix::diag(us, &zero), Matrix::diag(&inv, &zero)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z5() -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(5))
    }

    fn twisted(mult: i64) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(5).semidirect(vec![vec![mult]], "s", 1).unwrap())
    }

    fn p(g: &Arc<GroupSpec>, c: &[i64]) -> GroupRingElement {
        GroupRingElement::from_powers(g, &g.generator(0), c)
    }

    fn golden(g: &Arc<GroupSpec>) -> GroupRingElement {
        p(g, &[-1, 1, 0, 0, 1])
    }

    fn u_class(g: &Arc<GroupSpec>) -> TorsionClass {
        TorsionClass::from_unit(&golden(g)).unwrap()
    }

    #[test]
    fn theta_homomorphism_check() {
        let g = z5();
        let ok = FiberTransportDatum { generators: vec!["a".into()], classes: vec![TorsionClass::trivial(&g)], orders: vec![Some(3)] };
        assert_eq!(theta(&ok).unwrap().is_simple, TriState::Trivial);
        let bad = FiberTransportDatum { generators: vec!["a".into()], classes: vec![u_class(&g)], orders: vec![Some(2)] };
        assert!(matches!(theta(&bad), Err(FiberingError::Inconsistent(_))));
        let gt = twisted(1);
        let inc = GroupMorphism::base_inclusion(&gt).unwrap();
        let x = rebase(&u_class(&g), inc.source()).unwrap().induced(&inc).unwrap();
        let free = FiberTransportDatum { generators: vec!["t".into()], classes: vec![x], orders: vec![None] };
        assert_eq!(theta(&free).unwrap().is_simple, TriState::NonTrivial);
    }

    #[test]
    fn spider_ledger_alternates() {
        let g = z5();
        let x = u_class(&g);
        let circle = SpiderLedger { base_dimension: 1, cells: vec![(0, x.clone()), (1, x.clone())] };
        assert!(simple_structure_change(&circle, &g).unwrap().classify().is_trivial());
        let point = SpiderLedger { base_dimension: 0, cells: vec![(0, x.clone())] };
        assert!(simple_structure_change(&point, &g).unwrap().compare(&x).unwrap().is_trivial());
        let bad = SpiderLedger { base_dimension: 0, cells: vec![(1, x)] };
        assert!(simple_structure_change(&bad, &g).is_err());
    }

    #[test]
    fn bundle_shaped_model_is_simple() {
        let g = twisted(2);
        let one = GroupRingElement::one(&g);
        let m = diagonal_model(&g, &[vec![one.clone()], vec![one]], None).unwrap();
        let inv = m.invariants().unwrap();
        assert!(inv.theta_verdict.is_trivial());
        assert!(inv.tau_prime_verdict.is_trivial());
        assert!(inv.tau_fib.is_some());
    }

    #[test]
    fn theta_of_golden_unit() {
        let g = twisted(1);
        let m = diagonal_model(&g, &[vec![golden(&g)]], None).unwrap();
        let inv = m.invariants().unwrap();
        assert!(inv.theta_verdict.is_nontrivial());
        assert!(inv.theta_cross_check.is_trivial());
        let inc = GroupMorphism::base_inclusion(&g).unwrap();
        let x = rebase(&u_class(&z5()), inc.source()).unwrap().induced(&inc).unwrap();
        assert!(inv.theta.compare(&x).unwrap().is_trivial());
    }

    #[test]
    fn reversed_model_is_well_formed() {
        let g = twisted(2);
        let u = golden(&g);
        let change = diagonal_change(&g, &[vec![u.clone()], vec![GroupRingElement::one(&g)]]).unwrap();
        let m = diagonal_model(&g, &[vec![u]], Some(&change)).unwrap();
        let oc = orientation_check(&m).unwrap();
        // 2 j(u) vanishes over this group, so both orderings agree.
        assert!(oc.stated.is_trivial());
        assert!(oc.swapped.is_trivial());
    }

    #[test]
    fn glue_zero_and_golden() {
        let g = z5();
        let zero = HCobordismAlgebraic::new(g.clone(), vec![vec![1]], 5, TorsionClass::trivial(&g)).unwrap();
        let r = glue_hcobordism(&zero).unwrap();
        assert!(r.verdicts.x.is_trivial() && r.verdicts.theta.is_trivial() && r.verdicts.tau_prime.is_trivial());
        assert_eq!(r.vanishing_equivalence, Some(true));

        let odd = HCobordismAlgebraic::new(g.clone(), vec![vec![1]], 5, u_class(&g)).unwrap();
        let r = glue_hcobordism(&odd).unwrap();
        assert!(r.identity_holds(), "{}", r.identity);
        assert!(r.verdicts.theta.is_trivial());
        assert!(r.tau_prime.compare(&r.x).unwrap().is_trivial());
        assert!(r.tau_fib.as_ref().unwrap().compare(&r.x.neg()).unwrap().is_trivial());
        assert_eq!(r.vanishing_equivalence, Some(true));

        let even = HCobordismAlgebraic::new(g.clone(), vec![vec![1]], 4, u_class(&g)).unwrap();
        let r = glue_hcobordism(&even).unwrap();
        assert!(r.identity_holds(), "{}", r.identity);
        assert!(r.verdicts.theta.is_nontrivial());
        assert!(r.tau_fib.is_none());
    }

    #[test]
    fn bridge_reports_both_signs() {
        let g = z5();
        let h = HCobordismAlgebraic::new(g.clone(), vec![vec![1]], 5, u_class(&g)).unwrap();
        let b = tensor_bridge(&h).map_err(|e| e.to_string()).unwrap();
        assert!(b.corrected.is_trivial());
        assert!(b.stated.is_nontrivial());
        let even = HCobordismAlgebraic::new(g.clone(), vec![vec![1]], 4, u_class(&g)).unwrap();
        assert!(matches!(tensor_bridge(&even), Err(FiberingError::Precondition(_))));
        let twisted = HCobordismAlgebraic::new(g.clone(), vec![vec![2]], 5, u_class(&g)).unwrap();
        let b = tensor_bridge(&twisted).unwrap();
        assert!(b.stated.is_trivial() && b.corrected.is_trivial());
    }

    #[test]
    fn transfer_scales() {
        let g = z5();
        let x = u_class(&g);
        let id = GroupMorphism::identity(&g);
        assert!(transfer_product(&x, 0, &id).unwrap().classify().is_trivial());
        assert!(transfer_product(&x, 1, &id).unwrap().compare(&x).unwrap().is_trivial());
    }

    #[test]
    fn composite_product_formula() {
        let g = twisted(1);
        let one = GroupRingElement::one(&g);
        let u = golden(&g);
        let change = diagonal_change(&g, &[vec![u.clone()], vec![one.clone()]]).unwrap();
        let gm = diagonal_model(&g, &[vec![one.clone()]], Some(&change)).unwrap();
        for fib in [point_fiber(), circle_fiber(), sphere_fiber()] {
            let tp = fib.tensor(&gm.total).unwrap();
            let ranks = tp.complex.ranks().to_vec();
            let mut units: Vec<Vec<GroupRingElement>> = ranks.iter().map(|&r| vec![one.clone(); r]).collect();
            if let Some(first) = units.iter_mut().find(|v| !v.is_empty()) {
                first[0] = u.clone();
            }
            let sigma = diagonal_change(&g, &units).unwrap();
            let chk = check_composite_product(&gm, &fib, &sigma).unwrap();
            assert!(chk.verdict.is_trivial(), "{:?}", chk.verdict);
        }
    }
}
