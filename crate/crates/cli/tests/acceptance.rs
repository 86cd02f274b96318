//! Acceptance checks, one line per criterion.
//!
//! Every engine verdict is paired with a numerical oracle from `common`.
//! Tolerance: `common::TOL` (1e-7) on logarithms of determinant moduli;
//! everything else is exact. Two statements are reported as FAIL without
//! failing the run because their literal form is contradicted by the
//! computation; for those the consistent reading is asserted instead.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{agree, cyclic_product, laurent_value, log_moduli, numerically_trivial, reps, TOL};
use wh_core::chain::{BasedChainComplex, ChainMap};
use wh_core::fibering::{self, HCobordismAlgebraic, S1FiberingModel};
use wh_core::group::GroupSpec;
use wh_core::poincare::{self, PoincarePair};
use wh_core::random::{golden_unit, InstanceGen};
use wh_core::ring::GroupRingElement;
use wh_core::torsion::{self, PivotOrder};
use wh_core::whitehead::{Certificate, TorsionClass, TriState};

type Units = Vec<Vec<GroupRingElement>>;
type Check = fn() -> Outcome;

const SEED: u64 = 42;
const VERIFY_BUDGET: Duration = Duration::from_secs(60);

struct Outcome {
    passed: bool,
    /// Whether a FAIL should fail the run.
    asserted: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, asserted: true, detail: detail.into() }
}

fn z(n: u64) -> Arc<GroupSpec> {
    Arc::new(GroupSpec::cyclic(n))
}

fn twisted(mult: i64) -> Arc<GroupSpec> {
    Arc::new(GroupSpec::cyclic(5).semidirect(vec![vec![mult]], "s", 1).unwrap())
}

fn scalar(c: &BasedChainComplex, u: &GroupRingElement) -> ChainMap {
    ChainMap::identity(c).scale_left(u).unwrap()
}

fn class(u: &GroupRingElement) -> TorsionClass {
    TorsionClass::from_unit(u).unwrap()
}

fn sum_logs(a: &[f64], b: &[f64], sa: f64, sb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| sa * x + sb * y).collect()
}

fn logs_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < TOL)
}

fn unit_arithmetic() -> Outcome {
    let hand = cyclic_product(&[-1, 1, 0, 0, 1], &[-1, 0, 1, 1, 0], 5);
    let g = z(5);
    let (u, v) = golden_unit(&g);
    let exact = (&u * &v).is_one() && hand == vec![1, 0, 0, 0, 0];
    let x = class(&u);
    let verdict = x.classify();
    let excluded = match &verdict.certificate {
        Certificate::Character { excluded, .. } => excluded.len(),
        _ => 0,
    };
    // |u(zeta^k)| for k = 1..4 by hand, and the engine's invariants evaluated numerically.
    let mut oracle: Vec<f64> = (1..5)
        .map(|k| {
            let z = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 5.0);
            (-1.0 + z + z.powu(4)).norm()
        })
        .collect();
    let mut engine: Vec<f64> = x.invariants().iter().filter(|i| i.value.field().order() == 5).map(|i| laurent_value(&i.value).norm()).collect();
    oracle.sort_by(f64::total_cmp);
    engine.sort_by(f64::total_cmp);
    let moduli_match = logs_close(&oracle, &engine);
    let far_from_roots = oracle.iter().all(|m| (m - 1.0).abs() > 0.5);
    let passed = exact && verdict.is_nontrivial() && excluded == 10 && moduli_match && far_from_roots;
    outcome(
        passed,
        format!("product = 1 exactly; nontrivial with {excluded} excluded values; |u(zeta5^k)| = {:.6}, {:.6} (engine agrees: {moduli_match})", oracle[0], oracle[3]),
    )
}

fn acyclic_well_definedness() -> Outcome {
    let mut gen = InstanceGen::new(SEED);
    let mut ok = 0;
    let mut shapes_ok = true;
    let n = 100;
    for _ in 0..n {
        let g = gen.group();
        let c = gen.acyclic(&g);
        shapes_ok &= c.top() <= 3 && c.ranks().iter().all(|&r| r <= 4);
        let a = torsion::torsion_of_acyclic(&c).unwrap().class;
        let b = torsion::torsion_of_acyclic_with(&c, PivotOrder::Reverse).unwrap().class;
        let i = torsion::torsion_via_integer_contraction(&c).unwrap().class;
        let engine = a.classify().is_trivial() && a.sub(&b).unwrap().classify().is_trivial() && a.sub(&i).unwrap().classify().is_trivial();
        let oracle = [&a, &b, &i].iter().all(|x| numerically_trivial(x));
        ok += usize::from(engine && oracle);
    }
    outcome(ok == n && shapes_ok, format!("{ok}/{n} complexes trivial by three contractions and numerically"))
}

fn builtin_complexes() -> Vec<BasedChainComplex> {
    let g = z(5);
    vec![
        poincare::sphere_over(&g, 2).unwrap().complex,
        poincare::disc_over(&g, 3).unwrap().complex,
        poincare::lens_complex(5, &[1, 1]).unwrap(),
        poincare::lens_complex(5, &[1, 2]).unwrap(),
    ]
}

/// The glued map of the sum formula, assembled here from the pushout layout.
fn glued_map(f0: &ChainMap, f1: &ChainMap, f2: &ChainMap) -> ChainMap {
    let src = torsion::pushout(f0.source(), f1.source(), f2.source()).unwrap();
    let tgt = torsion::pushout(f0.target(), f1.target(), f2.target()).unwrap();
    let g = f0.source().group().clone();
    let top = src.complex.top().max(tgt.complex.top());
    let comps = (0..=top)
        .map(|k| {
            let mut m = wh_core::matrix::GRMatrix::gr_zeros(src.complex.rank(k), tgt.complex.rank(k), &g);
            for (f, s, t) in [(f1, &src.first, &tgt.first), (f2, &src.second, &tgt.second)] {
                let fk = f.f(k);
                for (i, &si) in s[k as usize].iter().enumerate() {
                    for (j, &tj) in t[k as usize].iter().enumerate() {
                        if !fk.get(i, j).is_zero() {
                            m.set(si, tj, fk.get(i, j).clone());
                        }
                    }
                }
            }
            m
        })
        .collect();
    ChainMap::new(&src.complex, &tgt.complex, comps).unwrap()
}

fn tau(f: &ChainMap) -> TorsionClass {
    torsion::whitehead_torsion(f).unwrap()
}

fn formula_suite() -> Outcome {
    let mut counts = [(0usize, 0usize); 3];
    let mut builtin_unknown = 0;
    let mut record = |slot: usize, engine: TriState, oracle: bool, builtin: bool| {
        counts[slot].0 += 1;
        counts[slot].1 += usize::from(engine == TriState::Trivial && oracle);
        if builtin && engine == TriState::Unknown {
            builtin_unknown += 1;
        }
    };

    let composition = |f: &ChainMap, h: &ChainMap| -> (TriState, bool) {
        let v = torsion::check_composition(f, h).unwrap().verdict.state;
        let lhs = log_moduli(&tau(&f.then(h).unwrap()));
        (v, logs_close(&lhs, &sum_logs(&log_moduli(&tau(f)), &log_moduli(&tau(h)), 1.0, 1.0)))
    };
    let sum = |f0: &ChainMap, f1: &ChainMap, f2: &ChainMap| -> (TriState, bool) {
        let v = torsion::check_sum(f0, f1, f2).unwrap().verdict.state;
        let lhs = log_moduli(&tau(&glued_map(f0, f1, f2)));
        let rhs = sum_logs(&sum_logs(&log_moduli(&tau(f1)), &log_moduli(&tau(f2)), 1.0, 1.0), &log_moduli(&tau(f0)), 1.0, -1.0);
        (v, logs_close(&lhs, &rhs))
    };
    let product = |f1: &ChainMap, f2: &ChainMap| -> (TriState, bool) {
        let v = torsion::check_product(f1, f2).unwrap().verdict.state;
        let tp = f1.target().tensor(f2.target()).unwrap();
        let lhs = log_moduli(&tau(&f1.tensor(f2).unwrap()));
        let a = log_moduli(&tau(f1).induced(&tp.left).unwrap());
        let b = log_moduli(&tau(f2).induced(&tp.right).unwrap());
        let rhs = sum_logs(&a, &b, f2.target().euler_characteristic() as f64, f1.target().euler_characteristic() as f64);
        (v, logs_close(&lhs, &rhs))
    };

    let g = z(5);
    let (u, v) = golden_unit(&g);
    let point = BasedChainComplex::concentrated(&g, 0, 1);
    let trivial = Arc::new(GroupSpec::trivial());
    let circle = poincare::sphere(1).unwrap().complex;
    let sphere = poincare::sphere(2).unwrap().complex;
    for c in builtin_complexes() {
        for (f, h) in [(scalar(&c, &u), scalar(&c, &u)), (scalar(&c, &u), scalar(&c, &v)), (ChainMap::identity(&c), scalar(&c, &u))] {
            let (e, o) = composition(&f, &h);
            record(0, e, o, true);
        }
        let f0 = scalar(&point, &u);
        let f1 = f0.direct_sum(&scalar(&c, &u)).unwrap();
        let f2 = f0.direct_sum(&scalar(&c, &v)).unwrap();
        let (e, o) = sum(&f0, &f1, &f2);
        record(1, e, o, true);
        for s in [BasedChainComplex::concentrated(&trivial, 0, 1), circle.clone(), sphere.clone()] {
            let (e, o) = product(&scalar(&c, &u), &ChainMap::identity(&s));
            record(2, e, o, true);
        }
    }
    let mut gen = InstanceGen::new(SEED + 1);
    for _ in 0..50 {
        let g = gen.group();
        let (f, h) = gen.composable(&g);
        let (e, o) = composition(&f, &h);
        record(0, e, o, false);
    }
    let mut gen = InstanceGen::new(SEED + 2);
    for _ in 0..50 {
        let g = gen.group();
        let (f0, f1, f2) = gen.sum_instance(&g);
        let (e, o) = sum(&f0, &f1, &f2);
        record(1, e, o, false);
    }
    let mut gen = InstanceGen::new(SEED + 3);
    for _ in 0..50 {
        let (f1, f2) = gen.product_instance();
        let (e, o) = product(&f1, &f2);
        record(2, e, o, false);
    }
    let passed = counts.iter().all(|(n, ok)| n == ok && *n >= 50) && builtin_unknown == 0;
    outcome(
        passed,
        format!(
            "composition {}/{}, sum {}/{}, product {}/{} decisive passes; {builtin_unknown} unknown on builtins",
            counts[0].1, counts[0].0, counts[1].1, counts[1].0, counts[2].1, counts[2].0
        ),
    )
}

fn s1_models() -> Vec<(i64, String, S1FiberingModel)> {
    let mut out = Vec::new();
    for mult in [1i64, 2] {
        let g = twisted(mult);
        let one = GroupRingElement::one(&g);
        let (u, _) = golden_unit(&g);
        let t = GroupRingElement::monomial(&g, g.generator(0), 1);
        let minus = GroupRingElement::from_int(&g, -1);
        let cases: Vec<(&str, Units, Option<Units>)> = vec![
            ("v = 1", vec![vec![one.clone()]], None),
            ("v = diag(u)", vec![vec![u.clone()]], None),
            ("v = diag(u) (+) 1", vec![vec![u.clone()], vec![one.clone()]], None),
            ("v = 1 (+) diag(u)", vec![vec![one.clone()], vec![u.clone()]], None),
            ("v = diag(u, -1)", vec![vec![u.clone(), minus]], None),
            ("v = t, rebased by u", vec![vec![t]], Some(vec![vec![u.clone()], vec![one.clone()]])),
            ("v = 1, rebased by u on top", vec![vec![one.clone()]], Some(vec![vec![one.clone()], vec![u.clone()]])),
        ];
        for (name, units, change) in cases {
            let change = change.map(|c| fibering::diagonal_change(&g, &c).unwrap());
            out.push((mult, format!("alpha = {mult}, {name}"), fibering::diagonal_model(&g, &units, change.as_deref()).unwrap()));
        }
    }
    out
}

fn orientation() -> Outcome {
    let models = s1_models();
    let (mut literal_ok, mut swapped_ok, mut oracle_literal_fail, mut oracle_ok) = (0, 0, 0, true);
    for (mult, _, m) in &models {
        let o = fibering::orientation_check(m).unwrap();
        literal_ok += usize::from(o.stated.is_trivial());
        swapped_ok += usize::from(o.swapped.is_trivial());
        let literal = o.tau_prime.sub(&o.tau_prime_reversed).unwrap();
        let swapped = o.tau_prime_reversed.sub(&o.tau_prime).unwrap();
        if *mult == 1 {
            // Z/5 x Z: the characters detect everything, so the oracle decides both readings.
            oracle_ok &= agree(&o.theta, &swapped);
            oracle_literal_fail += usize::from(!agree(&o.theta, &literal));
        } else {
            oracle_ok &= numerically_trivial(&o.theta.sub(&swapped).unwrap());
        }
    }
    let n = models.len();
    let literal_holds = literal_ok == n;
    Outcome {
        passed: literal_holds,
        asserted: false,
        detail: format!(
            "as ordered, theta = tau'(f) - tau'(con f) holds on {literal_ok}/{n} models (oracle refutes {oracle_literal_fail} over Z/5 x Z); \
             the reversed difference tau'(con f) - tau'(f) holds on {swapped_ok}/{n} (oracle agrees: {oracle_ok})"
        ),
    }
    .also_require(swapped_ok == n && oracle_ok && n >= 10)
}

impl Outcome {
    /// Keeps the reported result but fails the run when `ok` is false.
    fn also_require(self, ok: bool) -> Self {
        if ok {
            self
        } else {
            Outcome { passed: false, asserted: true, detail: format!("{} [consistent reading also fails]", self.detail) }
        }
    }
}

fn glue_corpus() -> Vec<(String, HCobordismAlgebraic)> {
    let g = z(5);
    let (u, _) = golden_unit(&g);
    let x = class(&u);
    let mut out = Vec::new();
    for (label, c) in [("0", TorsionClass::trivial(&g)), ("[u]", x.clone()), ("2[u]", x.scale(2)), ("-[u]", x.neg())] {
        for dim in 4..=7 {
            for mult in [1i64, 2] {
                out.push((format!("{label}, dim {dim}, phi {mult}"), HCobordismAlgebraic::new(g.clone(), vec![vec![mult]], dim, c.clone()).unwrap()));
            }
        }
    }
    out
}

fn hcobordism() -> Outcome {
    let corpus = glue_corpus();
    let (mut zero_ok, mut zero_n, mut identity_ok, mut parity_ok, mut parity_n) = (0, 0, 0, 0, 0);
    let g = z(5);
    let (u, _) = golden_unit(&g);
    let self_dual = u.involution() == u && class(&u).involution().compare(&class(&u)).map(|v| matches!(v.certificate, Certificate::Elimination { .. })) == Ok(true);
    for (_, h) in &corpus {
        let r = fibering::glue_hcobordism(h).unwrap();
        identity_ok += usize::from(r.identity_holds());
        if h.tau_w.classify().is_trivial() {
            zero_n += 1;
            let all = r.verdicts.x.is_trivial()
                && r.verdicts.theta.is_trivial()
                && r.verdicts.tau_prime.is_trivial()
                && r.verdicts.tau_fib.as_ref().is_some_and(|v| v.is_trivial())
                && [&r.x, &r.theta, &r.tau_prime].iter().all(|c| numerically_trivial(c));
            zero_ok += usize::from(all);
        } else if h.phi == vec![vec![1]] {
            parity_n += 1;
            // Theta is (1 + *)x in even and (1 - *)x in odd dimension; with *x = x that is 2x or 0.
            let expect = if h.dim % 2 == 0 { r.x.scale(2) } else { TorsionClass::trivial(&r.group) };
            let engine = r.theta.compare(&expect).unwrap().is_trivial();
            let oracle = agree(&r.theta, &expect) && (h.dim % 2 == 1 || !numerically_trivial(&r.theta));
            parity_ok += usize::from(engine && oracle);
        }
    }
    let n = corpus.len();
    outcome(
        zero_ok == zero_n && identity_ok == n && parity_ok == parity_n && self_dual,
        format!(
            "(a) {zero_ok}/{zero_n} zero inputs all trivial; (b) identity by elimination on {identity_ok}/{n}; (c) *u = u by elimination: {self_dual}, parity {parity_ok}/{parity_n}"
        ),
    )
}

fn bridge() -> Outcome {
    let (mut n, mut literal_ok, mut corrected_ok, mut oracle_literal_fail, mut oracle_ok) = (0, 0, 0, 0, true);
    for (_, h) in glue_corpus() {
        let r = fibering::glue_hcobordism(&h).unwrap();
        if !r.verdicts.theta.is_trivial() {
            continue;
        }
        n += 1;
        let b = fibering::tensor_bridge(&h).unwrap();
        literal_ok += usize::from(b.stated.is_trivial());
        corrected_ok += usize::from(b.corrected.is_trivial());
        let star = r.tau_prime.involution();
        let literal = star.signed(h.dim);
        let corrected = star.signed(h.dim - 1);
        if h.phi == vec![vec![1]] {
            oracle_ok &= agree(&b.image, &corrected);
            oracle_literal_fail += usize::from(!agree(&b.image, &literal));
        }
    }
    Outcome {
        passed: literal_ok == n,
        asserted: false,
        detail: format!(
            "j(tau(W) tensor) = (-1)^dim *tau' on {literal_ok}/{n} (oracle refutes {oracle_literal_fail}); with (-1)^(dim-1) on {corrected_ok}/{n} (oracle agrees: {oracle_ok})"
        ),
    }
    .also_require(corrected_ok == n && oracle_ok && n > 0)
}

fn composite() -> Outcome {
    let g = twisted(1);
    let one = GroupRingElement::one(&g);
    let (u, _) = golden_unit(&g);
    let base_change = fibering::diagonal_change(&g, &[vec![u.clone()], vec![one.clone()]]).unwrap();
    let models = [
        fibering::diagonal_model(&g, &[vec![one.clone()]], None).unwrap(),
        fibering::diagonal_model(&g, &[vec![one.clone()]], Some(&base_change)).unwrap(),
    ];
    let (mut n, mut ok, mut chis, mut zero_case) = (0, 0, Vec::new(), true);
    let trivial_logs = vec![0.0; reps(&g).len()];
    for m in &models {
        let tau_g = m.invariants().unwrap().tau_fib.unwrap();
        for fiber in [fibering::point_fiber(), fibering::circle_fiber(), fibering::sphere_fiber()] {
            let chi = fiber.euler_characteristic();
            chis.push(chi);
            let ranks = fiber.tensor(&m.total).unwrap().complex.ranks().to_vec();
            for twist in [false, true] {
                let mut units: Vec<Vec<GroupRingElement>> = ranks.iter().map(|&r| vec![one.clone(); r]).collect();
                let first = units.iter().position(|v| !v.is_empty()).unwrap();
                if twist {
                    units[first][0] = u.clone();
                }
                let sigma = fibering::diagonal_change(&g, &units).unwrap();
                let c = fibering::check_composite_product(m, &fiber, &sigma).unwrap();
                // tau(sigma) from the units directly: the map has components M^-1.
                let sign = if first % 2 == 0 { -1.0 } else { 1.0 };
                let sigma_logs: Vec<f64> = if twist { log_moduli(&class(&u)).iter().map(|v| sign * v).collect() } else { trivial_logs.clone() };
                let rhs = sum_logs(&sigma_logs, &log_moduli(&tau_g), 1.0, chi as f64);
                let oracle = logs_close(&log_moduli(&c.lhs), &rhs);
                if chi == 0 {
                    zero_case &= logs_close(&log_moduli(&c.lhs), &sigma_logs);
                }
                n += 1;
                ok += usize::from(c.verdict.is_trivial() && oracle);
            }
        }
    }
    chis.sort_unstable();
    chis.dedup();
    outcome(
        ok == n && n >= 5 && zero_case && chis == vec![0, 1, 2],
        format!("{ok}/{n} composites agree (engine and oracle), Euler characteristics {chis:?}; chi = 0 gives tau_fib(f): {zero_case}"),
    )
}

fn whtor() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_whtor"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn poincare_suite() -> Outcome {
    let mut manifolds: Vec<PoincarePair> = (1..=4).map(|n| poincare::sphere(n).unwrap()).collect();
    manifolds.extend((2..=4).map(|n| poincare::disc(n).unwrap()));
    manifolds.push(poincare::torus().unwrap());
    for (n, qs) in [(2u64, vec![1i64, 1]), (3, vec![1, 1]), (5, vec![1, 1]), (5, vec![1, 2]), (7, vec![1, 1]), (7, vec![1, 2]), (7, vec![1, 2, 3])] {
        manifolds.push(poincare::lens(n, &qs).unwrap());
    }
    let (mut inv_ok, mut rho_ok) = (0, 0);
    for p in &manifolds {
        inv_ok += usize::from(poincare::check_involution_identity(p).unwrap().passed());
        let r = poincare::rho(p).unwrap();
        rho_ok += usize::from(r.classify().is_trivial() && numerically_trivial(&r));
    }
    let g = z(5);
    let (u, _) = golden_unit(&g);
    let synthetic = [poincare::twisted_sphere(&g, 2, &u, &u.involution()).unwrap(),
        poincare::twisted_sphere(&g, 3, &u, &u.involution()).unwrap(),
        poincare::twisted_disc(&g, 2, &u).unwrap(),
        poincare::twisted_disc(&g, 4, &u).unwrap()];
    let syn_inv = synthetic.iter().filter(|p| poincare::check_involution_identity(p).unwrap().passed()).count();

    let s2 = &manifolds[1];
    let torus = manifolds.iter().find(|p| p.name == "T^2").unwrap();
    let lens = manifolds.iter().find(|p| p.name == "L(5; 1,1)").unwrap();
    let products = [(s2, &manifolds[2]), (torus, s2), (lens, &manifolds[0]), (&synthetic[0], s2), (&synthetic[3], torus)];
    let prod_ok = products
        .iter()
        .filter(|(a, b)| {
            let pc = poincare::check_product(a, b).unwrap();
            // The oracle compares on the product group, where rho(a) and rho(b) enter through the factor inclusions.
            let tp = a.complex.tensor(&b.complex).unwrap();
            let ra = poincare::rho(a).unwrap().induced(&tp.left).unwrap();
            let rb = poincare::rho(b).unwrap().induced(&tp.right).unwrap();
            let rhs = sum_logs(&log_moduli(&rb), &log_moduli(&ra), a.relative_euler_characteristic() as f64, b.relative_euler_characteristic() as f64);
            pc.check.passed() && logs_close(&log_moduli(&pc.check.lhs), &rhs)
        })
        .count();

    let mut glue_ok = 0;
    let mut glue_n = 0;
    let one = GroupRingElement::one(&g);
    for n in [3i64, 4] {
        let d = poincare::disc_over(&g, n).unwrap();
        for tw in [&one, &u] {
            glue_n += 1;
            let (f, fi) = poincare::boundary_twist(&d, tw).unwrap();
            let gc = poincare::check_gluing(&d, &d, &f, &fi).unwrap();
            let oracle = agree(&gc.check.lhs, &gc.check.rhs);
            glue_ok += usize::from(gc.check.passed() && oracle);
        }
    }
    let (f, fi) = poincare::boundary_twist(&synthetic[3], &one).unwrap();
    let y = poincare::disc_over(&g, 4).unwrap();
    glue_n += 1;
    let gc = poincare::check_gluing(&synthetic[3], &y, &f, &fi).unwrap();
    glue_ok += usize::from(gc.check.passed() && agree(&gc.check.lhs, &gc.check.rhs));

    let start = Instant::now();
    let status = Command::new(whtor()).args(["verify", "--seed", "42"]).arg(fixture("empty.toml")).output().unwrap();
    let elapsed = start.elapsed();
    let verify_ok = status.status.code() == Some(0) && elapsed <= VERIFY_BUDGET;

    let m = manifolds.len();
    outcome(
        inv_ok == m && rho_ok == m && syn_inv == synthetic.len() && prod_ok == products.len() && glue_ok == glue_n && verify_ok,
        format!(
            "involution {inv_ok}/{m} builtins and {syn_inv}/{} twisted pairs; rho trivial {rho_ok}/{m}; products {prod_ok}/{}; gluing {glue_ok}/{glue_n}; verify exit {:?} in {:.1} s",
            synthetic.len(),
            products.len(),
            status.status.code(),
            elapsed.as_secs_f64()
        ),
    )
}

fn witness_path() -> Outcome {
    let g = z(5);
    let (u, _) = golden_unit(&g);
    let y = class(&u);
    let s = poincare::twisted_sphere(&g, 2, &u, &u.involution()).unwrap();
    let rho = poincare::rho(&s).unwrap();
    let synthetic = agree(&rho, &y.add(&y.involution().signed(2)).unwrap()) && !numerically_trivial(&rho);
    let h = poincare::rho_hat(&s, Some(&y)).unwrap();
    let corrected = h.corrected.as_ref().map(|c| poincare::rho(c).unwrap());
    let oracle = corrected.as_ref().is_some_and(numerically_trivial);
    let engine = h.verdict.state() == TriState::Trivial && h.corrected_rho.as_ref().is_some_and(|v| v.is_trivial());
    outcome(synthetic && engine && oracle, format!("rho = y + *y: {synthetic}; Tate class zero and corrected rho trivial: {engine}; oracle on corrected model: {oracle}"))
}

const LENS_RECORD: &str = "tests/data/lens7_tau.txt";

fn lens_seven() -> Outcome {
    let a = poincare::lens(7, &[1, 1]).unwrap();
    let b = poincare::lens(7, &[1, 2]).unwrap();
    let (src, k, f) = poincare::lens_equivalence(&a, &b).unwrap();
    let chk = poincare::check_homotopy_invariance(&src, &b, &f, None).unwrap();
    let rs = poincare::rho(&src).unwrap();
    let rt = poincare::rho(&b).unwrap();
    let rhos = rs.classify().is_trivial() && rt.classify().is_trivial() && numerically_trivial(&rs) && numerically_trivial(&rt);
    let t = tau(&f);
    let mut lines = Vec::new();
    let mut engine_moduli = Vec::new();
    for inv in t.invariants() {
        lines.push(format!("{} = {}", inv.character, inv.value));
        if inv.value.field().order() == 7 {
            engine_moduli.push(laurent_value(&inv.value).norm());
        }
    }
    let mut oracle_moduli: Vec<f64> = log_moduli(&t).iter().skip(1).map(|v| v.exp()).collect();
    engine_moduli.sort_by(f64::total_cmp);
    oracle_moduli.sort_by(f64::total_cmp);
    let moduli = logs_close(&engine_moduli, &oracle_moduli);
    let record = lines.join("\n") + "\n";
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(LENS_RECORD);
    let regression = match std::fs::read_to_string(&path) {
        Ok(old) => old == record,
        Err(_) => {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &record).unwrap();
            true
        }
    };
    for l in &lines {
        println!("    tau(f): {l}");
    }
    outcome(
        chk.passed() && rhos && moduli && regression,
        format!("equivalence after t -> t^{k}; identity {}; both rho trivial: {rhos}; invariants match oracle moduli: {moduli}; matches record: {regression}", chk.verdict),
    )
}

fn cli_determinism() -> Outcome {
    let run = |args: &[&str], file: &Path| Command::new(whtor()).args(args).arg(file).output().unwrap();
    let a = run(&["verify", "--seed", "42", "--json"], &fixture("corpus.toml"));
    let b = run(&["verify", "--seed", "42", "--json"], &fixture("corpus.toml"));
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    let expected = [
        ("corpus.toml", 0),
        ("syntax_error.toml", 10),
        ("unresolved.toml", 11),
        ("dd_violation.toml", 12),
        ("stuck.toml", 13),
        ("failing_check.toml", 14),
        ("does_not_exist.toml", 15),
    ];
    let mut seen = vec![];
    let mut all = true;
    for (f, code) in expected {
        let got = run(&["verify"], &fixture(f)).status.code();
        all &= got == Some(code);
        seen.push(got.unwrap_or(-1));
    }
    let usage = Command::new(whtor()).arg("frobnicate").output().unwrap().status.code();
    all &= usage == Some(2);
    seen.push(usage.unwrap_or(-1));
    outcome(identical && all && a.status.code() == Some(0), format!("identical reports: {identical}; exit codes {seen:?}"))
}

fn main() {
    let criteria: [(u32, &str, Check); 11] = [
        (1, "unit arithmetic", unit_arithmetic),
        (2, "acyclic torsion well-defined", acyclic_well_definedness),
        (3, "composition, sum and product formulas", formula_suite),
        (4, "mapping torus obstruction vs orientation reversal", orientation),
        (5, "h-cobordism gluing calculator", hcobordism),
        (6, "tensor bridge sign", bridge),
        (7, "composite fibrations", composite),
        (8, "Poincare torsion identities", poincare_suite),
        (9, "witness path", witness_path),
        (10, "lens spaces of order seven", lens_seven),
        (11, "CLI determinism and exit codes", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (n, name, check) in criteria {
        let o = check();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag} {name}: {}", o.detail);
        if !o.passed && o.asserted {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        eprintln!("asserted criteria failed: {failed:?}");
        std::process::exit(1);
    }
}
