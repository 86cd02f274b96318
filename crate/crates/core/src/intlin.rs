//! Integer matrices: Smith normal form with unimodular transforms and exact
//! integral solutions of `x * A = b`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn int_identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

pub fn int_from_i64(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn int_mul(a: &IntMatrix, b: &IntMatrix, inner: usize, cols: usize) -> IntMatrix {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| if row[k].is_zero() { acc } else { acc + &row[k] * &b[k][j] }))
                .collect()
        })
        .collect()
}

/// `S * A * T = D` with `S`, `T` unimodular and `D` diagonal, `d_1 | d_2 | ...`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub s: IntMatrix,
    pub t: IntMatrix,
    pub diag: Vec<BigInt>,
    pub rows: usize,
    pub cols: usize,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }
}

pub fn smith_normal_form(a: &IntMatrix, rows: usize, cols: usize) -> Smith {
    let mut m = a.clone();
    let mut s = int_identity(rows);
    let mut t = int_identity(cols);
    let n = rows.min(cols);
    for k in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(m, s, t, rows, cols);
            };
            m.swap(k, pi);
            s.swap(k, pi);
            for row in m.iter_mut() {
                row.swap(k, pj);
            }
            for row in t.iter_mut() {
                row.swap(k, pj);
            }
            let p = m[k][k].clone();
            let mut clean = true;
            for i in k + 1..rows {
                if m[i][k].is_zero() {
                    continue;
                }
                let q = m[i][k].div_floor(&p);
                row_axpy(&mut m, i, k, &-&q);
                row_axpy(&mut s, i, k, &-&q);
                if !m[i][k].is_zero() {
                    clean = false;
                }
            }
            for j in k + 1..cols {
                if m[k][j].is_zero() {
                    continue;
                }
                let q = m[k][j].div_floor(&p);
                col_axpy(&mut m, j, k, &-&q);
                col_axpy(&mut t, j, k, &-&q);
                if !m[k][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let bad = (k + 1..rows).find(|&i| (k + 1..cols).any(|j| !(&m[i][j] % &p).is_zero()));
            match bad {
                Some(i) => {
                    row_axpy(&mut m, k, i, &BigInt::one());
                    row_axpy(&mut s, k, i, &BigInt::one());
                }
                None => break,
            }
        }
        if m[k][k].is_negative() {
            for x in m[k].iter_mut() {
                *x = -&*x;
            }
            for x in s[k].iter_mut() {
                *x = -&*x;
            }
        }
    }
    finish(m, s, t, rows, cols)
}

fn finish(m: IntMatrix, s: IntMatrix, t: IntMatrix, rows: usize, cols: usize) -> Smith {
    let diag = (0..rows.min(cols)).map(|i| m[i][i].clone()).collect();
    Smith { s, t, diag, rows, cols }
}

/// row_i += q * row_k
fn row_axpy(m: &mut IntMatrix, i: usize, k: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src = m[k].clone();
    for (x, y) in m[i].iter_mut().zip(src) {
        *x += q * y;
    }
}

/// col_j += q * col_k
fn col_axpy(m: &mut IntMatrix, j: usize, k: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let v = q * &row[k];
        row[j] += v;
    }
}

/// A factored matrix ready for repeated solves of `x * A = b`.
pub struct IntSolver {
    snf: Smith,
}

impl IntSolver {
    pub fn new(a: &IntMatrix, rows: usize, cols: usize) -> Self {
        IntSolver { snf: smith_normal_form(a, rows, cols) }
    }

    /// An integral `x` (length `rows`) with `x * A = b`, if one exists.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let Smith { s, t, diag, rows, cols } = &self.snf;
        // y D = b T, x = y S
        let bt: Vec<BigInt> = (0..*cols).map(|j| b.iter().zip(t.iter()).map(|(bi, ti)| bi * &ti[j]).sum()).collect();
        let mut y = vec![BigInt::zero(); *rows];
        for (j, v) in bt.iter().enumerate() {
            let d = diag.get(j).cloned().unwrap_or_default();
            if d.is_zero() {
                if !v.is_zero() {
                    return None;
                }
            } else {
                let (q, r) = v.div_rem(&d);
                if !r.is_zero() {
                    return None;
                }
                y[j] = q;
            }
        }
        let x = (0..*rows).map(|i| y.iter().zip(s.iter()).map(|(yk, sk)| yk * &sk[i]).sum()).collect();
        Some(x)
    }
}

/// Determinant by fraction-free elimination.
pub fn int_det(a: &IntMatrix) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut prev = BigInt::one();
    let mut neg = false;
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else { return BigInt::zero() };
            m.swap(k, p);
            neg = !neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[k][k] * &m[i][j] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    if neg {
        -m[n - 1][n - 1].clone()
    } else {
        m[n - 1][n - 1].clone()
    }
}
