//! Gaussian elimination with unit pivots, recording every step as a
//! class-preserving elementary operation.

use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};
use crate::ring::Ring;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElimError {
    #[error("elimination needs a square matrix, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("operation cannot be applied: {0}")]
    BadOp(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// One step of a reduction. Swaps carry a sign so that determinants are unchanged.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementaryOp<R> {
    /// `row[target] += factor * row[source]`
    AddRow { target: usize, source: usize, factor: R },
    /// `col[target] += col[source] * factor`
    AddCol { target: usize, source: usize, factor: R },
    /// `row[i] <- -row[j]`, `row[j] <- row[i]`
    SwapRows { i: usize, j: usize },
    /// `col[i] <- -col[j]`, `col[j] <- col[i]`
    SwapCols { i: usize, j: usize },
    /// `row[row] <- unit * row[row]` for a trivial unit
    ScaleRowByTrivialUnit { row: usize, unit: R },
    /// Drops the last row and column, which must be a standard basis vector pair.
    Destabilize,
    /// Appends a row and column with a 1 on the diagonal.
    Stabilize,
}

impl<R: Ring> ElementaryOp<R> {
    pub fn apply(&self, m: &Matrix<R>) -> Result<Matrix<R>, ElimError> {
        let mut out = m.clone();
        let (rows, cols) = (m.rows(), m.cols());
        let check = |i: usize, n: usize| {
            if i >= n {
                Err(ElimError::BadOp(format!("index {i} out of range {n}")))
            } else {
                Ok(())
            }
        };
        match self {
            ElementaryOp::AddRow { target, source, factor } => {
                check(*target, rows)?;
                check(*source, rows)?;
                if target == source {
                    return Err(ElimError::BadOp("row added to itself".into()));
                }
                for c in 0..cols {
                    let v = m.get(*target, c).add_r(&factor.mul_r(m.get(*source, c)));
                    out.set(*target, c, v);
                }
            }
            ElementaryOp::AddCol { target, source, factor } => {
                check(*target, cols)?;
                check(*source, cols)?;
                if target == source {
                    return Err(ElimError::BadOp("column added to itself".into()));
                }
                for r in 0..rows {
                    let v = m.get(r, *target).add_r(&m.get(r, *source).mul_r(factor));
                    out.set(r, *target, v);
                }
            }
            ElementaryOp::SwapRows { i, j } => {
                check(*i, rows)?;
                check(*j, rows)?;
                for c in 0..cols {
                    out.set(*i, c, m.get(*j, c).neg_r());
                    out.set(*j, c, m.get(*i, c).clone());
                }
            }
            ElementaryOp::SwapCols { i, j } => {
                check(*i, cols)?;
                check(*j, cols)?;
                for r in 0..rows {
                    out.set(r, *i, m.get(r, *j).neg_r());
                    out.set(r, *j, m.get(r, *i).clone());
                }
            }
            ElementaryOp::ScaleRowByTrivialUnit { row, unit } => {
                check(*row, rows)?;
                if !unit.is_trivial_unit() {
                    return Err(ElimError::BadOp("scaling factor is not a trivial unit".into()));
                }
                for c in 0..cols {
                    out.set(*row, c, unit.mul_r(m.get(*row, c)));
                }
            }
            ElementaryOp::Destabilize => {
                if rows == 0 || cols == 0 {
                    return Err(ElimError::BadOp("nothing to destabilize".into()));
                }
                let (r, c) = (rows - 1, cols - 1);
                let one = m.zero_elem().one_like();
                let ok = *m.get(r, c) == one
                    && (0..c).all(|j| m.get(r, j).is_zero())
                    && (0..r).all(|i| m.get(i, c).is_zero());
                if !ok {
                    return Err(ElimError::BadOp("last row/column is not a trivial stabilization".into()));
                }
                let keep_r: Vec<usize> = (0..r).collect();
                let keep_c: Vec<usize> = (0..c).collect();
                out = m.submatrix(&keep_r, &keep_c);
            }
            ElementaryOp::Stabilize => {
                out = Matrix::block_diag(m, &Matrix::identity(1, m.zero_elem()));
            }
        }
        Ok(out)
    }
}

/// Replays a log on a matrix.
pub fn replay<R: Ring>(m: &Matrix<R>, log: &[ElementaryOp<R>]) -> Result<Matrix<R>, ElimError> {
    log.iter().try_fold(m.clone(), |acc, op| op.apply(&acc))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElimStatus<R> {
    /// Reduced to a matrix of size at most 1 (empty when the class is trivial).
    Complete,
    /// No further unit pivot; the remaining active block is returned.
    Stuck { residual: Matrix<R> },
}

/// A pivot `p` at `(row, col)` with its certified inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Pivot<R> {
    pub row: usize,
    pub col: usize,
    pub value: R,
    pub inverse: R,
}

#[derive(Clone, Debug)]
pub struct Elimination<R> {
    pub reduced: Matrix<R>,
    pub log: Vec<ElementaryOp<R>>,
    pub status: ElimStatus<R>,
    /// Pivots in the order they were used (positions refer to the original indexing).
    pub pivots: Vec<Pivot<R>>,
    /// Row and column transforms with `P * A * Q` equal to the pivot pattern
    /// (plus the residual block when stuck).
    pub p: Matrix<R>,
    pub q: Matrix<R>,
}

impl<R: Ring> Elimination<R> {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, ElimStatus::Complete)
    }

    /// Two-sided inverse `Q * M^-1 * P` of the original matrix (complete runs only).
    pub fn inverse(&self) -> Option<Matrix<R>> {
        if !self.is_complete() {
            return None;
        }
        let n = self.p.rows();
        let mut minv = Matrix::zeros(n, n, self.p.zero_elem());
        for pv in &self.pivots {
            minv.set(pv.col, pv.row, pv.inverse.clone());
        }
        self.q.mul(&minv).ok()?.mul(&self.p).ok()
    }
}

/// Scans active positions row-major; trivial units first, then certified units.
pub fn find_pivot<R: Ring>(
    m: &Matrix<R>,
    rows: &[usize],
    cols: &[usize],
    certify: bool,
) -> Option<(usize, usize, R)> {
    for &i in rows {
        for &j in cols {
            let x = m.get(i, j);
            if x.is_trivial_unit() {
                if let Some(inv) = x.unit_inverse() {
                    return Some((i, j, inv));
                }
            }
        }
    }
    if !certify {
        return None;
    }
    for &i in rows {
        for &j in cols {
            let x = m.get(i, j);
            if !x.is_zero() {
                if let Some(inv) = x.unit_inverse() {
                    return Some((i, j, inv));
                }
            }
        }
    }
    None
}

/// Reduces a square matrix by unit pivots, then collapses the resulting
/// monomial matrix to `diag(prod, 1, ..., 1)` and destabilizes.
pub fn unit_pivot_eliminate<R: Ring>(a: &Matrix<R>) -> Result<Elimination<R>, ElimError> {
    if !a.is_square() {
        return Err(ElimError::NotSquare(a.rows(), a.cols()));
    }
    let n = a.rows();
    let zero = a.zero_elem().clone();
    let mut m = a.clone();
    let mut p = Matrix::identity(n, &zero);
    let mut q = Matrix::identity(n, &zero);
    let mut log = Vec::new();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    while let Some((i, j, inv)) = find_pivot(&m, &rows, &cols, true) {
        for &r in &rows {
            if r == i || m.get(r, j).is_zero() {
                continue;
            }
            let lambda = m.get(r, j).mul_r(&inv).neg_r();
            let op = ElementaryOp::AddRow { target: r, source: i, factor: lambda };
            m = op.apply(&m)?;
            p = op.apply(&p)?;
            log.push(op);
        }
        for &c in &cols {
            if c == j || m.get(i, c).is_zero() {
                continue;
            }
            let mu = inv.mul_r(m.get(i, c)).neg_r();
            let op = ElementaryOp::AddCol { target: c, source: j, factor: mu };
            m = op.apply(&m)?;
            q = op.apply(&q)?;
            log.push(op);
        }
        pivots.push(Pivot { row: i, col: j, value: m.get(i, j).clone(), inverse: inv });
        rows.retain(|&r| r != i);
        cols.retain(|&c| c != j);
    }
    if !rows.is_empty() {
        let residual = m.submatrix(&rows, &cols);
        return Ok(Elimination { reduced: m, log, status: ElimStatus::Stuck { residual }, pivots, p, q });
    }
    let (reduced, tail) = collapse_monomial(&m)?;
    log.extend(tail);
    Ok(Elimination { reduced, log, status: ElimStatus::Complete, pivots, p, q })
}

/// Brings a monomial matrix (one unit per row and column) to the
/// diagonal, multiplies the diagonal into the top-left entry and
/// destabilizes as far as possible.
pub fn collapse_monomial<R: Ring>(m: &Matrix<R>) -> Result<(Matrix<R>, Vec<ElementaryOp<R>>), ElimError> {
    let n = m.rows();
    let mut m = m.clone();
    let mut log = Vec::new();
    let mut push = |op: ElementaryOp<R>, m: &mut Matrix<R>| -> Result<(), ElimError> {
        *m = op.apply(m)?;
        log.push(op);
        Ok(())
    };
    for i in 0..n {
        let j = (0..n).find(|&j| !m.get(i, j).is_zero()).ok_or_else(|| ElimError::BadOp("not monomial".into()))?;
        if j != i {
            push(ElementaryOp::SwapCols { i, j }, &mut m)?;
        }
    }
    for k in 1..n {
        // diag(a, b) at positions (0, k) -> diag(ab, 1)
        let b = m.get(k, k).clone();
        let b_inv = b.unit_inverse().ok_or_else(|| ElimError::BadOp("pivot lost".into()))?;
        push(ElementaryOp::AddCol { target: 0, source: k, factor: b_inv.clone() }, &mut m)?;
        push(ElementaryOp::AddCol { target: k, source: 0, factor: b.neg_r() }, &mut m)?;
        push(ElementaryOp::AddCol { target: 0, source: k, factor: b_inv }, &mut m)?;
        push(ElementaryOp::SwapCols { i: 0, j: k }, &mut m)?;
    }
    for _ in 1..n {
        push(ElementaryOp::Destabilize, &mut m)?;
    }
    if n >= 1 && m.get(0, 0).is_trivial_unit() {
        let inv = m.get(0, 0).unit_inverse().expect("trivial units invert");
        push(ElementaryOp::ScaleRowByTrivialUnit { row: 0, unit: inv }, &mut m)?;
        push(ElementaryOp::Destabilize, &mut m)?;
    }
    Ok((m, log))
}
