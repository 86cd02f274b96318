//! Execution of document tasks.

use std::time::Instant;

use wh_core::chain::ChainError;
use wh_core::fibering::{self, FiberTransportDatum, FiberingError, HCobordismAlgebraic, S1FiberingModel};
use wh_core::group::GroupMorphism;
use wh_core::poincare::{self, PoincareError};
use wh_core::ring::GroupRingElement;
use wh_core::torsion::{self, TorsionError};
use wh_core::whitehead::{Certificate, TateVerdict, TorsionClass, TriState, Verdict, WhError};

use crate::document::{FiberSpec, Resolved, Task};
use crate::error::CliError;
use crate::report::{Fields, Status, TaskReport};

/// A failure inside the engine: either undecidable by elimination, or a
/// violated precondition of the input.
#[derive(Debug)]
pub(crate) enum RunError {
    Stuck(String),
    Invalid(String),
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                if stuck(&e) { RunError::Stuck(e.to_string()) } else { RunError::Invalid(e.to_string()) }
            }
        }
    )*};
}

trait MaybeStuck {
    fn maybe_stuck(&self) -> bool {
        false
    }
}
impl MaybeStuck for PoincareError {
    fn maybe_stuck(&self) -> bool {
        self.is_stuck()
    }
}
impl MaybeStuck for FiberingError {
    fn maybe_stuck(&self) -> bool {
        self.is_stuck()
    }
}
impl MaybeStuck for TorsionError {
    fn maybe_stuck(&self) -> bool {
        self.is_stuck()
    }
}
impl MaybeStuck for WhError {}
impl MaybeStuck for ChainError {}

fn stuck(e: &impl MaybeStuck) -> bool {
    e.maybe_stuck()
}

from_core!(PoincareError, FiberingError, TorsionError, WhError, ChainError);

pub(crate) struct Outcome {
    pub status: Status,
    pub fields: Fields,
    pub certificate: Option<String>,
}

impl Outcome {
    fn new(status: Status, fields: Fields) -> Self {
        Outcome { status, fields, certificate: None }
    }
}

/// Status of a check whose verdict should be trivial.
pub(crate) fn check_status(v: &Verdict) -> Status {
    match v.state {
        TriState::Trivial => Status::Pass,
        TriState::NonTrivial => Status::Fail,
        TriState::Unknown => Status::Stuck,
    }
}

fn worst(a: Status, b: Status) -> Status {
    let rank = |s: Status| match s {
        Status::Ok => 0,
        Status::Pass => 1,
        Status::Stuck => 2,
        Status::Fail => 3,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

/// Short form of a class: the matrix itself when small.
pub(crate) fn describe(x: &TorsionClass) -> String {
    let n = x.size();
    if n <= 2 {
        x.representative().to_string()
    } else {
        format!("{n}x{n} representative")
    }
}

/// Pushes the representative, augmentation determinant, character
/// invariants and verdict of a class under `key`.
pub(crate) fn class_fields(f: &mut Fields, key: &str, x: &TorsionClass) -> Verdict {
    f.push(key, describe(x));
    f.push(format!("{key}.augmentation"), x.augmentation_determinant());
    for inv in x.invariants() {
        f.push(format!("{key}.det[{}]", inv.character), &inv.value);
    }
    let v = x.classify();
    f.push(format!("{key}.verdict"), &v);
    v
}

fn certificate_of(v: &Verdict) -> Option<String> {
    match &v.certificate {
        Certificate::Character { character, value, excluded } => {
            Some(format!("{character} gives {value}, outside {{{}}}", excluded.join(", ")))
        }
        Certificate::Undecided { .. } => None,
        _ => Some(v.to_string()),
    }
}

pub fn run_task(task: &Task, timings: bool) -> Result<TaskReport, CliError> {
    let start = Instant::now();
    let outcome = match execute(&task.resolved) {
        Ok(o) => o,
        Err(RunError::Stuck(reason)) => {
            let mut f = Fields::default();
            f.push("reason", reason);
            Outcome::new(Status::Stuck, f)
        }
        Err(RunError::Invalid(msg)) => return Err(CliError::Invariant(format!("task {}: {msg}", task.name))),
    };
    Ok(TaskReport {
        name: task.name.clone(),
        op: task.spec.op().into(),
        inputs_digest: task.digest.clone(),
        status: outcome.status,
        fields: outcome.fields,
        certificate: outcome.certificate,
        wall_ms: timings.then(|| start.elapsed().as_millis()),
    })
}

fn execute(r: &Resolved) -> Result<Outcome, RunError> {
    let mut f = Fields::default();
    match r {
        Resolved::Torsion(map) => {
            let x = torsion::whitehead_torsion(map)?;
            let v = class_fields(&mut f, "tau", &x);
            Ok(Outcome { certificate: certificate_of(&v), ..Outcome::new(Status::Ok, f) })
        }
        Resolved::Acyclic(c) => {
            let a = torsion::torsion_of_acyclic(c)?;
            f.push("method", format!("{:?}", a.method).to_lowercase());
            f.push("pivots", a.pivots);
            let v = class_fields(&mut f, "tau", &a.class);
            Ok(Outcome { certificate: certificate_of(&v), ..Outcome::new(Status::Ok, f) })
        }
        Resolved::Invariants(x) => {
            let v = class_fields(&mut f, "class", x);
            Ok(Outcome { certificate: certificate_of(&v), ..Outcome::new(Status::Ok, f) })
        }
        Resolved::Theta(gens) => {
            let datum = FiberTransportDatum {
                generators: gens.iter().map(|g| g.0.clone()).collect(),
                classes: gens.iter().map(|g| g.1.clone()).collect(),
                orders: gens.iter().map(|g| g.2).collect(),
            };
            let rep = fibering::theta(&datum)?;
            for (name, x, v) in &rep.classes {
                f.push(format!("theta[{name}]"), describe(x));
                f.push(format!("theta[{name}].verdict"), v);
            }
            f.push("simple", rep.is_simple);
            Ok(Outcome::new(Status::Ok, f))
        }
        Resolved::Rho(p) => {
            let x = poincare::rho(p)?;
            f.push("pair", &p.name);
            f.push("dim", p.dim);
            let v = class_fields(&mut f, "rho", &x);
            let sign = poincare::rho_sign_independence(p)?;
            f.push("sign_independence", &sign);
            Ok(Outcome { certificate: certificate_of(&v), ..Outcome::new(Status::Ok, f) })
        }
        Resolved::Involution(p) => {
            let c = poincare::check_involution_identity(p)?;
            f.push("pair", &p.name);
            f.push("lhs", describe(&c.lhs));
            f.push("rhs", describe(&c.rhs));
            f.push("difference", &c.verdict);
            Ok(Outcome { certificate: certificate_of(&c.verdict), ..Outcome::new(check_status(&c.verdict), f) })
        }
        Resolved::RhoHat(p, w) => {
            let h = poincare::rho_hat(p, w.as_ref())?;
            class_fields(&mut f, "rho", &h.rho);
            let status = match &h.verdict {
                TateVerdict::Zero { witness, certificate } => {
                    f.push("tate", "zero");
                    f.push("witness", describe(witness));
                    f.push("witness.check", certificate);
                    let shift = h.shift.as_ref().expect("shift accompanies a witness");
                    let corrected = h.corrected_rho.as_ref().expect("corrected model accompanies a witness");
                    f.push("corrected.rho", corrected);
                    f.push("corrected.shift", shift);
                    let level = if poincare::is_representative_level(shift) { Status::Pass } else { Status::Stuck };
                    worst(worst(check_status(shift), check_status(corrected)), level)
                }
                TateVerdict::NonTrivial { reason } => {
                    f.push("tate", "nontrivial");
                    f.push("reason", reason);
                    Status::Ok
                }
                TateVerdict::Unknown { reason } => {
                    f.push("tate", "unknown");
                    f.push("reason", reason);
                    Status::Ok
                }
            };
            Ok(Outcome::new(status, f))
        }
        Resolved::PairGlue { x, y, twist } => {
            let (map, inv) = poincare::boundary_twist(x, twist)?;
            let g = poincare::check_gluing(x, y, &map, &inv)?;
            f.push("glued", &g.glued.name);
            class_fields(&mut f, "rho", &g.check.lhs);
            f.push("expected", describe(&g.check.rhs));
            f.push("difference", &g.check.verdict);
            Ok(Outcome::new(check_status(&g.check.verdict), f))
        }
        Resolved::PairProduct(x, y) => {
            let p = poincare::check_product(x, y)?;
            f.push("product", &p.product.name);
            class_fields(&mut f, "rho", &p.check.lhs);
            f.push("expected", describe(&p.check.rhs));
            f.push("difference", &p.check.verdict);
            Ok(Outcome::new(check_status(&p.check.verdict), f))
        }
        Resolved::LensEquivalence(s, t) => lens_equivalence(s, t, f),
        Resolved::Glue { tau_w, dim, phi } => glue(tau_w, *dim, phi, f),
        Resolved::S1(spec) => s1(spec, f),
        Resolved::Transfer { model, fiber, sigma } => transfer(model, fiber, sigma.as_deref(), f),
    }
}

fn lens_equivalence(s: &poincare::PoincarePair, t: &poincare::PoincarePair, mut f: Fields) -> Result<Outcome, RunError> {
    let (src, k, map) = poincare::lens_equivalence(s, t)?;
    f.push("source", &s.name);
    f.push("target", &t.name);
    f.push("induced_by", format!("t -> t^{k}"));
    class_fields(&mut f, "tau", &torsion::whitehead_torsion(&map)?);
    let rs = poincare::rho(&src)?.classify();
    let rt = poincare::rho(t)?.classify();
    f.push("rho.source", &rs);
    f.push("rho.target", &rt);
    let chk = poincare::check_homotopy_invariance(&src, t, &map, None)?;
    f.push("identity", &chk.verdict);
    let status = [&rs, &rt, &chk.verdict].into_iter().map(check_status).fold(Status::Pass, worst);
    Ok(Outcome::new(status, f))
}

fn glue(tau_w: &TorsionClass, dim: i64, phi: &[Vec<i64>], mut f: Fields) -> Result<Outcome, RunError> {
    let h = HCobordismAlgebraic::new(tau_w.group().clone(), phi.to_vec(), dim, tau_w.clone())?;
    let r = fibering::glue_hcobordism(&h)?;
    class_fields(&mut f, "x", &r.x);
    class_fields(&mut f, "theta", &r.theta);
    class_fields(&mut f, "tau_prime", &r.tau_prime);
    match &r.tau_fib {
        Some(t) => {
            class_fields(&mut f, "tau_fib", t);
        }
        None => f.push("tau_fib", "undefined (theta not trivial)"),
    }
    f.push("identity", &r.identity);
    f.push("identity.representative_level", r.identity_holds());
    f.push("sign.literal", &r.stated_sign);
    let equivalence = match r.vanishing_equivalence {
        Some(b) => b.to_string(),
        None => "undecided".into(),
    };
    f.push("vanishing_equivalence", &equivalence);
    let mut status = if r.identity_holds() { Status::Pass } else { Status::Fail };
    status = worst(
        status,
        match r.vanishing_equivalence {
            Some(true) => Status::Pass,
            Some(false) => Status::Fail,
            None => Status::Stuck,
        },
    );
    if r.verdicts.theta.is_trivial() {
        let b = fibering::tensor_bridge(&h)?;
        f.push("bridge.image", describe(&b.image));
        f.push("bridge.corrected", &b.corrected);
        f.push("bridge.literal", &b.stated);
        status = worst(status, check_status(&b.corrected));
    }
    Ok(Outcome::new(status, f))
}

pub(crate) fn build_model(spec: &FiberSpec) -> Result<S1FiberingModel, RunError> {
    let change = spec.change.as_ref().map(|c| fibering::diagonal_change(&spec.group, c)).transpose()?;
    Ok(fibering::diagonal_model(&spec.group, &spec.units, change.as_deref())?)
}

fn s1(spec: &FiberSpec, mut f: Fields) -> Result<Outcome, RunError> {
    let model = build_model(spec)?;
    let inv = model.invariants()?;
    f.push("group", group_label(&spec.group));
    class_fields(&mut f, "theta", &inv.theta);
    f.push("theta.cross_check", &inv.theta_cross_check);
    class_fields(&mut f, "tau_prime", &inv.tau_prime);
    match &inv.tau_fib {
        Some(t) => {
            class_fields(&mut f, "tau_fib", t);
        }
        None => f.push("tau_fib", "undefined (theta not trivial)"),
    }
    let o = fibering::orientation_check(&model)?;
    f.push("tau_prime.reversed", describe(&o.tau_prime_reversed));
    f.push("orientation.swapped", &o.swapped);
    f.push("orientation.literal", &o.stated);
    let status = worst(check_status(&inv.theta_cross_check), check_status(&o.swapped));
    Ok(Outcome::new(status, f))
}

fn transfer(spec: &FiberSpec, fiber: &str, sigma: Option<&[Vec<GroupRingElement>]>, mut f: Fields) -> Result<Outcome, RunError> {
    let model = build_model(spec)?;
    let fc = match fiber {
        "point" => fibering::point_fiber(),
        "circle" => fibering::circle_fiber(),
        _ => fibering::sphere_fiber(),
    };
    let ranks = fc.tensor(&model.total)?.complex.ranks().to_vec();
    let units: Vec<Vec<GroupRingElement>> = match sigma {
        Some(s) => {
            if s.len() != ranks.len() || s.iter().zip(&ranks).any(|(u, &r)| u.len() != r) {
                return Err(RunError::Invalid(format!("sigma needs one unit per cell, ranks {ranks:?}")));
            }
            s.to_vec()
        }
        None => ranks.iter().map(|&r| vec![GroupRingElement::one(&spec.group); r]).collect(),
    };
    let change = fibering::diagonal_change(&spec.group, &units)?;
    let chk = fibering::check_composite_product(&model, &fc, &change)?;
    f.push("fiber", fiber);
    f.push("fiber.euler_characteristic", fc.euler_characteristic());
    if let Some(t) = model.invariants()?.tau_fib {
        let moved = fibering::transfer_product(&t, fc.euler_characteristic(), &GroupMorphism::identity(&spec.group))?;
        f.push("transfer", describe(&moved));
    }
    class_fields(&mut f, "composite.tau_fib", &chk.lhs);
    f.push("expected", describe(&chk.rhs));
    f.push("difference", &chk.verdict);
    Ok(Outcome::new(check_status(&chk.verdict), f))
}

fn group_label(g: &wh_core::group::GroupSpec) -> String {
    let base: Vec<String> = g.orders().iter().map(|&n| if n == 0 { "Z".into() } else { format!("Z/{n}") }).collect();
    let base = if base.is_empty() { "1".into() } else { base.join(" x ") };
    match g.alpha_matrix() {
        Some(a) => format!("{base} x_alpha Z, alpha = {a:?}"),
        None => base,
    }
}
