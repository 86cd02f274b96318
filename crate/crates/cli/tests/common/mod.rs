//! Numerical oracles, independent of the engine's exact arithmetic.
//!
//! Group-ring matrices are pushed through unitary representations of the
//! group and their determinants are taken in floating point. A trivial
//! Whitehead class (a product of elementary matrices and `+-g`) has
//! determinant of modulus one under every unitary representation. For finite
//! cyclic groups and their products with `Z`, the one-dimensional
//! representations detect the whole Whitehead group, so the converse holds
//! there as well.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use wh_core::cyclo::Laurent;
use wh_core::group::{GroupElement, GroupSpec};
use wh_core::matrix::GRMatrix;
use wh_core::ring::GroupRingElement;
use wh_core::whitehead::TorsionClass;

pub const TOL: f64 = 1e-7;

pub type CMat = Vec<Vec<Complex64>>;

fn identity(n: usize) -> CMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::zero() }).collect()).collect()
}

fn mul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let k = b.len();
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

fn adjoint(a: &CMat) -> CMat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

fn power(a: &CMat, e: i64) -> CMat {
    let base = if e < 0 { adjoint(a) } else { a.clone() };
    (0..e.unsigned_abs()).fold(identity(a.len()), |acc, _| mul(&acc, &base))
}

fn close(a: &CMat, b: &CMat) -> bool {
    a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(x, y)| (x - y).norm() < 1e-9))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: CMat) -> Complex64 {
    let n = a.len();
    let mut d = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).expect("nonempty");
        if a[p][c].norm() < 1e-300 {
            return Complex64::zero();
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
        }
    }
    d
}

/// A unitary representation given on generators.
#[derive(Clone, Debug)]
pub struct Rep {
    pub label: String,
    dim: usize,
    gens: Vec<CMat>,
    stable: Option<CMat>,
}

impl Rep {
    fn element(&self, g: &GroupElement) -> CMat {
        let mut m = identity(self.dim);
        for (x, &e) in self.gens.iter().zip(g.exponents()) {
            m = mul(&m, &power(x, e));
        }
        if let Some(s) = &self.stable {
            m = mul(&m, &power(s, g.stable_power()));
        }
        m
    }

    pub fn ring(&self, x: &GroupRingElement) -> CMat {
        let mut out = vec![vec![Complex64::zero(); self.dim]; self.dim];
        for (g, c) in x.terms() {
            let c = c.to_f64().expect("coefficient fits");
            let m = self.element(g);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out[i][j] += m[i][j] * c;
                }
            }
        }
        out
    }

    /// The block matrix of `a` under the representation.
    pub fn matrix(&self, a: &GRMatrix) -> CMat {
        let (r, c, d) = (a.rows(), a.cols(), self.dim);
        let mut out = vec![vec![Complex64::zero(); c * d]; r * d];
        for i in 0..r {
            for j in 0..c {
                let b = self.ring(a.get(i, j));
                for p in 0..d {
                    for q in 0..d {
                        out[i * d + p][j * d + q] = b[p][q];
                    }
                }
            }
        }
        out
    }
}

fn root(k: i64, n: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Generic points on the circle for the infinite cyclic coordinates.
fn generic(i: usize) -> Complex64 {
    Complex64::from_polar(1.0, 0.731 + 0.413 * i as f64)
}

/// Enough unitary representations to test triviality: all one-dimensional
/// characters of an abelian group (free coordinates at generic points), and
/// for `Z/n x_a Z` the representations induced from the characters of `Z/n`.
pub fn reps(g: &GroupSpec) -> Vec<Rep> {
    let one = |z: Complex64| vec![vec![z]];
    match g.alpha_matrix() {
        None => {
            let mut out = vec![Rep { label: String::new(), dim: 1, gens: vec![], stable: None }];
            for (i, &n) in g.orders().iter().enumerate() {
                let mut next = Vec::new();
                for r in out {
                    let images: Vec<(String, Complex64)> = if n == 0 {
                        vec![("T".into(), generic(i))]
                    } else {
                        (0..n as i64).map(|k| (format!("z{n}^{k}"), root(k, n))).collect()
                    };
                    for (l, z) in images {
                        let mut r2 = r.clone();
                        r2.gens.push(one(z));
                        r2.label = if r2.label.is_empty() { l } else { format!("{},{l}", r2.label) };
                        next.push(r2);
                    }
                }
                out = next;
            }
            out
        }
        Some(alpha) => {
            assert_eq!(g.orders().len(), 1, "oracle handles a cyclic base");
            let n = g.orders()[0];
            assert!(n > 0, "oracle handles a finite base");
            let a = alpha[0][0].rem_euclid(n as i64);
            let mut seen = vec![false; n as usize];
            let mut out = Vec::new();
            for k in 0..n as i64 {
                if seen[k as usize] {
                    continue;
                }
                let mut orbit = vec![k];
                loop {
                    let next = (orbit.last().expect("nonempty") * a).rem_euclid(n as i64);
                    if next == k {
                        break;
                    }
                    orbit.push(next);
                }
                for &o in &orbit {
                    seen[o as usize] = true;
                }
                let d = orbit.len();
                let t: CMat = (0..d).map(|i| (0..d).map(|j| if i == j { root(orbit[i], n) } else { Complex64::zero() }).collect()).collect();
                let z = generic(7);
                let mut chosen = None;
                for shift in [1, d.saturating_sub(1)] {
                    let s: CMat = (0..d).map(|i| (0..d).map(|j| if (i + shift) % d == j { z } else { Complex64::zero() }).collect()).collect();
                    let lhs = mul(&mul(&s, &t), &adjoint(&s));
                    if close(&lhs, &power(&t, a)) {
                        chosen = Some(s);
                        break;
                    }
                }
                let s = chosen.expect("an induced representation exists");
                out.push(Rep { label: format!("orbit {orbit:?}"), dim: d, gens: vec![t], stable: Some(s) });
            }
            out
        }
    }
}

/// `log |det|` of the representative under every representation.
pub fn log_moduli(x: &TorsionClass) -> Vec<f64> {
    reps(x.group()).iter().map(|r| det(r.matrix(x.representative())).norm().ln()).collect()
}

pub fn numerically_trivial(x: &TorsionClass) -> bool {
    log_moduli(x).iter().all(|v| v.abs() < TOL)
}

/// Whether `x` and `y` agree under every representation (up to modulus).
pub fn agree(x: &TorsionClass, y: &TorsionClass) -> bool {
    log_moduli(x).iter().zip(log_moduli(y)).all(|(a, b)| (a - b).abs() < TOL)
}

/// Numerical value of an engine invariant at the primitive root of its field.
pub fn laurent_value(v: &Laurent) -> Complex64 {
    let n = v.field().order();
    let z = root(1, n);
    let t = generic(0);
    v.terms()
        .map(|(e, c)| {
            let poly: Complex64 = c.poly().coeffs().iter().enumerate().map(|(k, q)| z.powu(k as u32) * q.to_f64().expect("fits")).sum();
            poly * t.powi(*e as i32)
        })
        .sum()
}

/// Coefficient vectors of `Z[Z/n]` multiplied by hand modulo `x^n - 1`.
pub fn cyclic_product(a: &[i64], b: &[i64], n: usize) -> Vec<i64> {
    let mut out = vec![0; n];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[(i + j) % n] += x * y;
        }
    }
    out
}
