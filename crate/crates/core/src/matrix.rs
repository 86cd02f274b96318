//! Dense matrices over any [`Ring`], with the group-ring specific operations
//! (bar-transpose, induced maps, determinants under characters).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::cyclo::Laurent;
use crate::group::{GroupMorphism, GroupSpec};
use crate::ring::{GroupRingElement, Ring, RingError};
use crate::target::RingMorphism;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Row-major dense matrix. Row vectors act on the left: `x -> x * A`.
#[derive(Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
    zero: R,
}

pub type GRMatrix = Matrix<GroupRingElement>;

impl<R: Ring> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize, zero: &R) -> Self {
        let z = zero.zero_like();
        Matrix { rows, cols, data: vec![z.clone(); rows * cols], zero: z }
    }

    pub fn identity(n: usize, zero: &R) -> Self {
        let mut m = Self::zeros(n, n, zero);
        for i in 0..n {
            m.data[i * n + i] = zero.one_like();
        }
        m
    }

    pub fn diag(entries: &[R], zero: &R) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n, zero);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>, zero: &R) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::Dimension("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect(), zero: zero.zero_like() })
    }

    /// Like `from_rows` but with an explicit column count, so `n x 0` is expressible.
    pub fn from_rows_sized(rows: Vec<Vec<R>>, cols: usize, zero: &R) -> Result<Self, MatrixError> {
        if rows.iter().any(|row| row.len() != cols) {
            return Err(MatrixError::Dimension(format!("rows must have {cols} entries")));
        }
        let r = rows.len();
        Ok(Matrix { rows: r, cols, data: rows.into_iter().flatten().collect(), zero: zero.zero_like() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn zero_elem(&self) -> &R {
        &self.zero
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<R>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &R> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        *x == self.zero.one_like()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn mul(&self, o: &Self) -> Result<Self, MatrixError> {
        if self.cols != o.rows {
            return Err(MatrixError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.rows, o.cols, &self.zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = out.data[idx].add_r(&a.mul_r(b));
                }
            }
        }
        Ok(out)
    }

    fn same_shape(&self, o: &Self) -> Result<(), MatrixError> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(MatrixError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, MatrixError> {
        self.same_shape(o)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add_r(b)).collect(),
            zero: self.zero.clone(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, MatrixError> {
        self.same_shape(o)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub_r(b)).collect(),
            zero: self.zero.clone(),
        })
    }

    pub fn neg(&self) -> Self {
        self.map_entries(|x| x.neg_r())
    }

    pub fn map_entries(&self, f: impl Fn(&R) -> R) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), zero: self.zero.clone() }
    }

    /// Entrywise image under a map into another ring.
    pub fn map_into<S: Ring>(&self, zero: &S, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), zero: zero.zero_like() }
    }

    /// Left scalar multiple `c * A`.
    pub fn scale_left(&self, c: &R) -> Self {
        self.map_entries(|x| c.mul_r(x))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, &self.zero);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len(), &self.zero);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// `[[a, b], [c, d]]` from four blocks with compatible shapes.
    pub fn block(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self, MatrixError> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(MatrixError::Dimension("incompatible blocks".into()));
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let mut out = Self::zeros(rows, cols, &a.zero);
        for (blk, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..blk.rows {
                for j in 0..blk.cols {
                    out.set(r0 + i, c0 + j, blk.get(i, j).clone());
                }
            }
        }
        Ok(out)
    }

    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let z = &a.zero;
        Self::block(a, &Self::zeros(a.rows, b.cols, z), &Self::zeros(b.rows, a.cols, z), b).expect("shapes agree")
    }

    pub fn hstack(a: &Self, b: &Self) -> Result<Self, MatrixError> {
        Self::block(a, b, &Self::zeros(0, a.cols, &a.zero), &Self::zeros(0, b.cols, &a.zero))
    }

    pub fn vstack(a: &Self, b: &Self) -> Result<Self, MatrixError> {
        Self::block(a, &Self::zeros(a.rows, 0, &a.zero), b, &Self::zeros(b.rows, 0, &a.zero))
    }
}

impl<R: Ring + fmt::Display> fmt::Display for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<R: fmt::Debug> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.data[i * self.cols..(i + 1) * self.cols].iter().map(|x| format!("{x:?}")).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl GRMatrix {
    pub fn gr_zeros(rows: usize, cols: usize, g: &Arc<GroupSpec>) -> Self {
        Self::zeros(rows, cols, &GroupRingElement::zero(g))
    }

    pub fn gr_identity(n: usize, g: &Arc<GroupSpec>) -> Self {
        Self::identity(n, &GroupRingElement::zero(g))
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        self.zero.group()
    }

    /// `(bar_transpose A)[i][j] = bar(A[j][i])`.
    pub fn bar_transpose(&self) -> Self {
        self.transpose().map_entries(|x| x.involution())
    }

    /// Entrywise image along a group homomorphism.
    pub fn map_group(&self, m: &GroupMorphism) -> Result<Self, MatrixError> {
        let zero = GroupRingElement::zero(m.target());
        let mut out = Matrix::zeros(self.rows, self.cols, &zero);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).map_group(m)?);
            }
        }
        Ok(out)
    }

    /// Entrywise conjugation by `s^k` in a twisted group.
    pub fn conjugate_by_stable(&self, k: i64) -> Self {
        self.map_entries(|x| x.conjugate_by_stable(k))
    }

    /// Entrywise image under a character.
    pub fn apply_morphism(&self, m: &RingMorphism) -> Matrix<Laurent> {
        let zero = Laurent::zero(m.field());
        self.map_into(&zero, |x| m.apply(x))
    }

    /// Determinant of the entrywise image under a commutative target.
    pub fn det_over_target(&self, m: &RingMorphism) -> Result<Laurent, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        Ok(det_laurent(&self.apply_morphism(m)))
    }
}

/// Fraction-free (Bareiss) determinant over `Q(zeta)[T, T^-1]`.
pub fn det_laurent(a: &Matrix<Laurent>) -> Laurent {
    let n = a.rows();
    let one = a.zero_elem().one_like();
    if n == 0 {
        return one;
    }
    let mut m = a.row_vecs();
    let mut prev = one;
    let mut sign = false;
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return a.zero_elem().clone();
            };
            m.swap(k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).add(&m[i][k].mul(&m[k][j]).neg());
                m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = a.zero_elem().clone();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::UnitImage;

    fn z5() -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(5))
    }

    fn p(g: &Arc<GroupSpec>, c: &[i64]) -> GroupRingElement {
        GroupRingElement::from_powers(g, &g.generator(0), c)
    }

    #[test]
    fn identity_and_group_law() {
        let g = z5();
        let z = GroupRingElement::zero(&g);
        let a = Matrix::diag(&[p(&g, &[0, 1])], &z);
        let b = Matrix::diag(&[p(&g, &[0, 0, 0, 0, 1])], &z);
        assert!(a.mul(&b).unwrap().is_identity());
        let i = GRMatrix::gr_identity(1, &g);
        assert_eq!(i.mul(&a).unwrap(), a);
    }

    #[test]
    fn empty_products() {
        let g = z5();
        let a = GRMatrix::gr_zeros(1, 0, &g);
        let b = GRMatrix::gr_zeros(0, 1, &g);
        let c = a.mul(&b).unwrap();
        assert_eq!((c.rows(), c.cols()), (1, 1));
        assert!(c.is_zero());
        assert!(a.mul(&a).is_err());
    }

    #[test]
    fn bar_transpose_is_anti_multiplicative() {
        let g = z5();
        let z = GroupRingElement::zero(&g);
        let a = Matrix::from_rows(vec![vec![p(&g, &[1, 2]), p(&g, &[0, 0, 3])], vec![p(&g, &[-1]), p(&g, &[0, 1, 1])]], &z).unwrap();
        let b = Matrix::from_rows(vec![vec![p(&g, &[0, 0, 0, 1]), p(&g, &[2])], vec![p(&g, &[1, 0, 0, 0, -1]), p(&g, &[])]], &z).unwrap();
        let lhs = a.mul(&b).unwrap().bar_transpose();
        let rhs = b.bar_transpose().mul(&a.bar_transpose()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(a.bar_transpose().bar_transpose(), a);
    }

    #[test]
    fn determinants_under_characters() {
        let g = z5();
        let z = GroupRingElement::zero(&g);
        let u = p(&g, &[-1, 1, 0, 0, 1]);
        let du = Matrix::diag(std::slice::from_ref(&u), &z);
        let aug = RingMorphism::augmentation(&g);
        assert!(du.det_over_target(&aug).unwrap().at_one().is_one());
        let chi = RingMorphism::new(&g, 5, vec![UnitImage { sign: 1, root: 1, power: 0 }], None).unwrap();
        assert_eq!(du.det_over_target(&chi).unwrap(), chi.apply(&u));
        assert!(GRMatrix::gr_identity(3, &g).det_over_target(&chi).unwrap().at_one().is_one());
        let m = Matrix::from_rows(vec![vec![p(&g, &[0, 1]), p(&g, &[2])], vec![p(&g, &[1]), p(&g, &[0, 0, 1])]], &z).unwrap();
        // det = t^3 - 2, computed directly
        assert_eq!(m.det_over_target(&chi).unwrap(), chi.apply(&p(&g, &[-2, 0, 0, 1])));
    }
}
