//! Finite based free chain complexes over `Z[G]` in non-negative degrees, with
//! chain maps, homotopies and the standard constructions.
//!
//! Elements are row vectors: a chain `x` in degree `k` has boundary `x * d(k)`,
//! and a map `f` sends `x` to `x * f(k)`.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::group::{GroupError, GroupMorphism, GroupSpec};
use crate::matrix::{GRMatrix, Matrix, MatrixError};
use crate::ring::{same_group, GroupRingElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("degree {degree}: expected a {rows}x{cols} matrix, got {got_rows}x{got_cols}")]
    Shape { degree: i64, rows: usize, cols: usize, got_rows: usize, got_cols: usize },
    #[error("d({0}) * d({0} - 1) is not zero")]
    NotChain(i64),
    #[error("chain map condition fails in degree {0}")]
    NotChainMap(i64),
    #[error("homotopy identity fails in degree {0}")]
    NotHomotopy(i64),
    #[error("twisted self-map condition fails in degree {0}")]
    NotTwistedMap(i64),
    #[error("complexes live over different groups")]
    GroupMismatch,
    #[error("{0}")]
    Subcomplex(String),
    #[error("group is not twisted; a mapping torus needs a semidirect product")]
    Untwisted,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A based chain complex `C_top -> ... -> C_0`.
#[derive(Clone, PartialEq)]
pub struct BasedChainComplex {
    group: Arc<GroupSpec>,
    ranks: Vec<usize>,
    /// `diffs[k - 1]` is `d(k)`, of shape `rank(k) x rank(k - 1)`.
    diffs: Vec<GRMatrix>,
}

impl BasedChainComplex {
    /// Checks shapes and `d(k) * d(k - 1) = 0`.
    pub fn new(group: &Arc<GroupSpec>, ranks: Vec<usize>, diffs: Vec<GRMatrix>) -> Result<Self, ChainError> {
        let c = Self::unchecked(group, ranks, diffs)?;
        c.validate()?;
        Ok(c)
    }

    fn unchecked(group: &Arc<GroupSpec>, ranks: Vec<usize>, diffs: Vec<GRMatrix>) -> Result<Self, ChainError> {
        if diffs.len() + 1 != ranks.len().max(1) {
            return Err(ChainError::Shape {
                degree: diffs.len() as i64,
                rows: ranks.len(),
                cols: 0,
                got_rows: diffs.len(),
                got_cols: 0,
            });
        }
        for (i, d) in diffs.iter().enumerate() {
            let k = i + 1;
            if d.rows() != ranks[k] || d.cols() != ranks[k - 1] {
                return Err(ChainError::Shape {
                    degree: k as i64,
                    rows: ranks[k],
                    cols: ranks[k - 1],
                    got_rows: d.rows(),
                    got_cols: d.cols(),
                });
            }
            if !same_group(d.group(), group) {
                return Err(ChainError::GroupMismatch);
            }
        }
        let mut ranks = ranks;
        if ranks.is_empty() {
            ranks.push(0);
        }
        Ok(BasedChainComplex { group: group.clone(), ranks, diffs })
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        for k in 2..=self.top() {
            if !self.d(k).mul(&self.d(k - 1))?.is_zero() {
                return Err(ChainError::NotChain(k));
            }
        }
        Ok(())
    }

    /// The complex with a single module `Z[G]^r` in degree `k`.
    pub fn concentrated(group: &Arc<GroupSpec>, degree: usize, rank: usize) -> Self {
        let mut ranks = vec![0; degree + 1];
        ranks[degree] = rank;
        let diffs = (1..=degree).map(|k| GRMatrix::gr_zeros(ranks[k], ranks[k - 1], group)).collect();
        BasedChainComplex { group: group.clone(), ranks, diffs }
    }

    pub fn zero(group: &Arc<GroupSpec>) -> Self {
        Self::concentrated(group, 0, 0)
    }

    pub fn group(&self) -> &Arc<GroupSpec> {
        &self.group
    }

    /// Highest degree carrying a module (possibly of rank 0).
    pub fn top(&self) -> i64 {
        self.ranks.len() as i64 - 1
    }

    pub fn rank(&self, k: i64) -> usize {
        if k < 0 {
            0
        } else {
            self.ranks.get(k as usize).copied().unwrap_or(0)
        }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.ranks.iter().enumerate().map(|(k, &r)| if k % 2 == 0 { r as i64 } else { -(r as i64) }).sum()
    }

    /// `d(k)`; a zero matrix of the right shape outside `1..=top`.
    pub fn d(&self, k: i64) -> Cow<'_, GRMatrix> {
        if k >= 1 && k <= self.top() {
            Cow::Borrowed(&self.diffs[k as usize - 1])
        } else {
            Cow::Owned(GRMatrix::gr_zeros(self.rank(k), self.rank(k - 1), &self.group))
        }
    }

    /// Pads with zero modules up to degree `top`.
    pub fn extended_to(&self, top: i64) -> Self {
        let mut c = self.clone();
        while c.top() < top {
            let k = c.top() + 1;
            c.ranks.push(0);
            c.diffs.push(GRMatrix::gr_zeros(0, c.rank(k - 1), &c.group));
        }
        c
    }

    /// Shape-compatible complex built from per-degree matrices `d(1..=top)`.
    pub fn from_diffs(group: &Arc<GroupSpec>, ranks: Vec<usize>, diffs: Vec<GRMatrix>) -> Result<Self, ChainError> {
        Self::new(group, ranks, diffs)
    }

    pub fn diffs(&self) -> &[GRMatrix] {
        &self.diffs
    }

    /// Replaces the basis in each degree by `basis[k] * (old basis)`:
    /// `d'(k) = M_k d(k) M_{k-1}^{-1}`. Supply each `M_k` with its inverse.
    pub fn rebased(&self, change: &[(GRMatrix, GRMatrix)]) -> Result<Self, ChainError> {
        let n = self.top();
        let mut diffs = Vec::new();
        for k in 1..=n {
            let (m, _) = &change[k as usize];
            let (_, minv) = &change[k as usize - 1];
            diffs.push(m.mul(&self.d(k))?.mul(minv)?);
        }
        Self::new(&self.group, self.ranks.clone(), diffs)
    }

    pub fn direct_sum(&self, o: &Self) -> Result<Self, ChainError> {
        if !same_group(&self.group, &o.group) {
            return Err(ChainError::GroupMismatch);
        }
        let top = self.top().max(o.top());
        let a = self.extended_to(top);
        let b = o.extended_to(top);
        let ranks = (0..=top).map(|k| a.rank(k) + b.rank(k)).collect();
        let diffs = (1..=top).map(|k| Matrix::block_diag(&a.d(k), &b.d(k))).collect();
        Self::new(&self.group, ranks, diffs)
    }

    /// `C^{n-*}`: degree `k` is the dual of `C_{n-k}`, with differential
    /// `(-1)^k bar_transpose(d(n-k+1))`.
    pub fn dual(&self, n: i64) -> Self {
        let ranks: Vec<usize> = (0..=n).map(|k| self.rank(n - k)).collect();
        let diffs = (1..=n)
            .map(|k| {
                let d = self.d(n - k + 1).bar_transpose();
                if k % 2 == 0 {
                    d
                } else {
                    d.neg()
                }
            })
            .collect();
        BasedChainComplex::unchecked(&self.group, ranks, diffs).expect("dual shapes are consistent")
    }

    /// Suspension: `(SC)_k = C_{k-1}` with differential `-d`.
    pub fn suspension(&self) -> Self {
        let mut ranks = vec![0];
        ranks.extend(&self.ranks);
        let mut diffs = vec![GRMatrix::gr_zeros(self.rank(0), 0, &self.group)];
        diffs.extend(self.diffs.iter().map(|d| d.neg()));
        BasedChainComplex { group: self.group.clone(), ranks, diffs }
    }

    /// Change of rings along a group homomorphism.
    pub fn induce(&self, m: &GroupMorphism) -> Result<Self, ChainError> {
        if !same_group(&self.group, m.source()) {
            return Err(ChainError::GroupMismatch);
        }
        let diffs = self.diffs.iter().map(|d| d.map_group(m)).collect::<Result<Vec<_>, _>>()?;
        Ok(BasedChainComplex { group: m.target().clone(), ranks: self.ranks.clone(), diffs })
    }

    /// Tensor product over `Z` of complexes over `Z[G]` and `Z[H]`, a complex
    /// over `Z[G x H]`. Basis of degree `k`: blocks `C_i (x) D_{k-i}` for
    /// increasing `i`, each in Kronecker order.
    pub fn tensor(&self, o: &Self) -> Result<TensorProduct, ChainError> {
        let (g, ia, ib) = GroupSpec::product(&self.group, &o.group)?;
        let a = self.induce(&ia)?;
        let b = o.induce(&ib)?;
        let top = self.top() + o.top();
        let layout = TensorLayout::new(self, o);
        let ranks: Vec<usize> = (0..=top).map(|k| layout.rank(k)).collect();
        let mut diffs = Vec::new();
        for k in 1..=top {
            let mut m = GRMatrix::gr_zeros(ranks[k as usize], ranks[k as usize - 1], &g);
            for i in 0..=k {
                let j = k - i;
                if a.rank(i) == 0 || b.rank(j) == 0 {
                    continue;
                }
                let r0 = layout.offset(k, i);
                if i >= 1 {
                    let blk = kron(&a.d(i), &GRMatrix::gr_identity(b.rank(j), &g));
                    paste(&mut m, &blk, r0, layout.offset(k - 1, i - 1));
                }
                if j >= 1 {
                    let mut blk = kron(&GRMatrix::gr_identity(a.rank(i), &g), &b.d(j));
                    if i % 2 == 1 {
                        blk = blk.neg();
                    }
                    paste(&mut m, &blk, r0, layout.offset(k - 1, i));
                }
            }
            diffs.push(m);
        }
        let complex = Self::new(&g, ranks, diffs)?;
        Ok(TensorProduct { complex, left: ia, right: ib, layout })
    }

    /// Subcomplex spanned by the chosen basis elements in each degree.
    pub fn subcomplex(&self, keep: &[Vec<usize>]) -> Result<(Self, ChainMap), ChainError> {
        let top = self.top();
        let keep_k = |k: i64| -> Vec<usize> {
            if k < 0 {
                vec![]
            } else {
                keep.get(k as usize).cloned().unwrap_or_default()
            }
        };
        for k in 1..=top {
            let rows = keep_k(k);
            let cols: Vec<usize> = (0..self.rank(k - 1)).filter(|c| !keep_k(k - 1).contains(c)).collect();
            if !self.d(k).submatrix(&rows, &cols).is_zero() {
                return Err(ChainError::Subcomplex(format!("boundary of the chosen degree {k} cells leaves the subcomplex")));
            }
        }
        let ranks: Vec<usize> = (0..=top).map(|k| keep_k(k).len()).collect();
        let diffs = (1..=top).map(|k| self.d(k).submatrix(&keep_k(k), &keep_k(k - 1))).collect();
        let sub = Self::new(&self.group, ranks, diffs)?;
        let comps = (0..=top)
            .map(|k| {
                let mut m = GRMatrix::gr_zeros(sub.rank(k), self.rank(k), &self.group);
                for (r, &c) in keep_k(k).iter().enumerate() {
                    m.set(r, c, GroupRingElement::one(&self.group));
                }
                m
            })
            .collect();
        let inc = ChainMap::new(&sub, self, comps)?;
        Ok((sub, inc))
    }

    /// Quotient by the subcomplex spanned by `drop`, with the projection.
    pub fn quotient(&self, drop: &[Vec<usize>]) -> Result<(Self, ChainMap), ChainError> {
        self.subcomplex(drop)?;
        let top = self.top();
        let rest = |k: i64| -> Vec<usize> {
            let d = if k < 0 { vec![] } else { drop.get(k as usize).cloned().unwrap_or_default() };
            (0..self.rank(k)).filter(|i| !d.contains(i)).collect()
        };
        let ranks: Vec<usize> = (0..=top).map(|k| rest(k).len()).collect();
        let diffs = (1..=top).map(|k| self.d(k).submatrix(&rest(k), &rest(k - 1))).collect();
        let q = Self::new(&self.group, ranks, diffs)?;
        let comps = (0..=top)
            .map(|k| {
                let mut m = GRMatrix::gr_zeros(self.rank(k), q.rank(k), &self.group);
                for (c, &r) in rest(k).iter().enumerate() {
                    m.set(r, c, GroupRingElement::one(&self.group));
                }
                m
            })
            .collect();
        let proj = ChainMap::new(self, &q, comps)?;
        Ok((q, proj))
    }
}

impl fmt::Display for BasedChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "complex over Z[{}] with ranks {:?}", self.group, self.ranks)
    }
}

impl fmt::Debug for BasedChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{self}")?;
        for (i, d) in self.diffs.iter().enumerate() {
            writeln!(f, "  d{} = {}", i + 1, d)?;
        }
        Ok(())
    }
}

/// Kronecker product; entries of the two factors must commute.
pub fn kron(a: &GRMatrix, b: &GRMatrix) -> GRMatrix {
    let (p, q, r, s) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = Matrix::zeros(p * r, q * s, a.zero_elem());
    for i in 0..p {
        for j in 0..q {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            for k in 0..r {
                for l in 0..s {
                    let y = b.get(k, l);
                    if !y.is_zero() {
                        out.set(i * r + k, j * s + l, x * y);
                    }
                }
            }
        }
    }
    out
}

fn paste(m: &mut GRMatrix, blk: &GRMatrix, r0: usize, c0: usize) {
    for i in 0..blk.rows() {
        for j in 0..blk.cols() {
            m.set(r0 + i, c0 + j, blk.get(i, j).clone());
        }
    }
}

/// Offsets of the blocks `C_i (x) D_{k-i}` inside `(C (x) D)_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorLayout {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl TensorLayout {
    pub fn new(a: &BasedChainComplex, b: &BasedChainComplex) -> Self {
        TensorLayout { left: a.ranks.clone(), right: b.ranks.clone() }
    }

    fn r(v: &[usize], k: i64) -> usize {
        if k < 0 {
            0
        } else {
            v.get(k as usize).copied().unwrap_or(0)
        }
    }

    pub fn rank(&self, k: i64) -> usize {
        (0..=k).map(|i| Self::r(&self.left, i) * Self::r(&self.right, k - i)).sum()
    }

    /// Position of the first basis element of `C_i (x) D_{k-i}` in degree `k`.
    pub fn offset(&self, k: i64, i: i64) -> usize {
        (0..i).map(|a| Self::r(&self.left, a) * Self::r(&self.right, k - a)).sum()
    }

    /// Position of `e_p (x) f_q` with `e_p` in `C_i`, `f_q` in `D_{k-i}`.
    pub fn index(&self, k: i64, i: i64, p: usize, q: usize) -> usize {
        self.offset(k, i) + p * Self::r(&self.right, k - i) + q
    }
}

#[derive(Clone, Debug)]
pub struct TensorProduct {
    pub complex: BasedChainComplex,
    pub left: GroupMorphism,
    pub right: GroupMorphism,
    pub layout: TensorLayout,
}

/// A chain map `C -> D`; component `k` is `rank C_k x rank D_k`.
#[derive(Clone, PartialEq)]
pub struct ChainMap {
    source: BasedChainComplex,
    target: BasedChainComplex,
    comps: Vec<GRMatrix>,
}

impl ChainMap {
    pub fn new(source: &BasedChainComplex, target: &BasedChainComplex, comps: Vec<GRMatrix>) -> Result<Self, ChainError> {
        let m = Self::unchecked(source, target, comps)?;
        m.validate()?;
        Ok(m)
    }

    fn unchecked(source: &BasedChainComplex, target: &BasedChainComplex, comps: Vec<GRMatrix>) -> Result<Self, ChainError> {
        if !same_group(source.group(), target.group()) {
            return Err(ChainError::GroupMismatch);
        }
        let top = source.top().max(target.top());
        let mut full = Vec::new();
        for k in 0..=top {
            let (r, c) = (source.rank(k), target.rank(k));
            let m = comps.get(k as usize).cloned().unwrap_or_else(|| GRMatrix::gr_zeros(r, c, source.group()));
            if m.rows() != r || m.cols() != c {
                return Err(ChainError::Shape { degree: k, rows: r, cols: c, got_rows: m.rows(), got_cols: m.cols() });
            }
            full.push(m);
        }
        Ok(ChainMap { source: source.clone(), target: target.clone(), comps: full })
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        for k in 1..=self.top() {
            let lhs = self.f(k).mul(&self.target.d(k))?;
            let rhs = self.source.d(k).mul(&self.f(k - 1))?;
            if lhs != rhs {
                return Err(ChainError::NotChainMap(k));
            }
        }
        Ok(())
    }

    pub fn identity(c: &BasedChainComplex) -> Self {
        let comps = (0..=c.top()).map(|k| GRMatrix::gr_identity(c.rank(k), c.group())).collect();
        ChainMap { source: c.clone(), target: c.clone(), comps }
    }

    pub fn zero(source: &BasedChainComplex, target: &BasedChainComplex) -> Result<Self, ChainError> {
        Self::unchecked(source, target, vec![])
    }

    pub fn source(&self) -> &BasedChainComplex {
        &self.source
    }

    pub fn target(&self) -> &BasedChainComplex {
        &self.target
    }

    pub fn top(&self) -> i64 {
        self.comps.len() as i64 - 1
    }

    pub fn f(&self, k: i64) -> Cow<'_, GRMatrix> {
        if k >= 0 && k <= self.top() {
            Cow::Borrowed(&self.comps[k as usize])
        } else {
            Cow::Owned(GRMatrix::gr_zeros(self.source.rank(k), self.target.rank(k), self.source.group()))
        }
    }

    pub fn components(&self) -> &[GRMatrix] {
        &self.comps
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ChainMap) -> Result<ChainMap, ChainError> {
        let top = self.top().max(next.top());
        let comps = (0..=top).map(|k| self.f(k).mul(&next.f(k))).collect::<Result<Vec<_>, _>>()?;
        Self::unchecked(&self.source, &next.target, comps)
    }

    pub fn add(&self, o: &ChainMap) -> Result<ChainMap, ChainError> {
        let comps = (0..=self.top()).map(|k| self.f(k).add(&o.f(k))).collect::<Result<Vec<_>, _>>()?;
        Self::unchecked(&self.source, &self.target, comps)
    }

    pub fn sub(&self, o: &ChainMap) -> Result<ChainMap, ChainError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> ChainMap {
        ChainMap { source: self.source.clone(), target: self.target.clone(), comps: self.comps.iter().map(|m| m.neg()).collect() }
    }

    /// Left multiplication of every component by a central-enough scalar.
    pub fn scale_left(&self, c: &GroupRingElement) -> Result<ChainMap, ChainError> {
        let comps = self.comps.iter().map(|m| m.scale_left(c)).collect();
        Self::new(&self.source, &self.target, comps)
    }

    /// Mapping cone: `cone_k = D_k (+) C_{k-1}` with matrix
    /// `[[d_D(k), 0], [f(k-1), -d_C(k-1)]]`.
    pub fn cone(&self) -> BasedChainComplex {
        let c = &self.source;
        let d = &self.target;
        let g = c.group();
        let top = d.top().max(c.top() + 1);
        let ranks: Vec<usize> = (0..=top).map(|k| d.rank(k) + c.rank(k - 1)).collect();
        let diffs = (1..=top)
            .map(|k| {
                let z = GRMatrix::gr_zeros(d.rank(k), c.rank(k - 2), g);
                Matrix::block(&d.d(k), &z, &self.f(k - 1), &c.d(k - 1).neg()).expect("cone block shapes")
            })
            .collect();
        BasedChainComplex::unchecked(g, ranks, diffs).expect("cone shapes are consistent")
    }

    /// Dual map `D^{n-*} -> C^{n-*}`, degree `k` being `bar_transpose(f(n-k))`.
    pub fn dual(&self, n: i64) -> Result<ChainMap, ChainError> {
        let comps = (0..=n).map(|k| self.f(n - k).bar_transpose()).collect();
        Self::new(&self.target.dual(n), &self.source.dual(n), comps)
    }

    pub fn induce(&self, m: &GroupMorphism) -> Result<ChainMap, ChainError> {
        let comps = self.comps.iter().map(|x| x.map_group(m)).collect::<Result<Vec<_>, _>>()?;
        Self::unchecked(&self.source.induce(m)?, &self.target.induce(m)?, comps)
    }

    pub fn direct_sum(&self, o: &ChainMap) -> Result<ChainMap, ChainError> {
        let s = self.source.direct_sum(&o.source)?;
        let t = self.target.direct_sum(&o.target)?;
        let top = s.top().max(t.top());
        let comps = (0..=top).map(|k| Matrix::block_diag(&self.f(k), &o.f(k))).collect();
        Self::new(&s, &t, comps)
    }

    /// `f (x) g` between tensor products, in the layout of [`BasedChainComplex::tensor`].
    pub fn tensor(&self, o: &ChainMap) -> Result<ChainMap, ChainError> {
        let src = self.source.tensor(&o.source)?;
        let tgt = self.target.tensor(&o.target)?;
        let a = self.induce(&src.left)?;
        let b = o.induce(&src.right)?;
        let g = src.complex.group().clone();
        let top = src.complex.top();
        let mut comps = Vec::new();
        for k in 0..=top {
            let mut m = GRMatrix::gr_zeros(src.complex.rank(k), tgt.complex.rank(k), &g);
            for i in 0..=k {
                let blk = kron(&a.f(i), &b.f(k - i));
                if blk.rows() == 0 || blk.cols() == 0 {
                    continue;
                }
                paste(&mut m, &blk, src.layout.offset(k, i), tgt.layout.offset(k, i));
            }
            comps.push(m);
        }
        Self::new(&src.complex, &tgt.complex, comps)
    }

    /// Whether every component is square and the map is a based isomorphism
    /// with the given inverse components.
    pub fn is_inverse_of(&self, o: &ChainMap) -> Result<bool, ChainError> {
        let a = self.then(o)?;
        let b = o.then(self)?;
        Ok(a.comps.iter().chain(&b.comps).all(|m| m.is_identity()))
    }
}

impl fmt::Debug for ChainMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chain map {:?} -> {:?}", self.source.ranks, self.target.ranks)?;
        for (k, m) in self.comps.iter().enumerate() {
            writeln!(f, "  f{k} = {m}")?;
        }
        Ok(())
    }
}

/// `h_k : C_k -> D_{k+1}` with `f_k - g_k = h_k d_D(k+1) + d_C(k) h_{k-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainHomotopy {
    pub comps: Vec<GRMatrix>,
}

impl ChainHomotopy {
    pub fn h<'a>(&'a self, k: i64, f: &ChainMap) -> Cow<'a, GRMatrix> {
        if k >= 0 && (k as usize) < self.comps.len() {
            Cow::Borrowed(&self.comps[k as usize])
        } else {
            Cow::Owned(GRMatrix::gr_zeros(f.source.rank(k), f.target.rank(k + 1), f.source.group()))
        }
    }

    /// Verifies the homotopy identity between `f` and `g`.
    pub fn verify(&self, f: &ChainMap, g: &ChainMap) -> Result<(), ChainError> {
        let top = f.top().max(g.top());
        for k in 0..=top {
            let lhs = f.f(k).sub(&g.f(k))?;
            let rhs = self.h(k, f).mul(&f.target.d(k + 1))?.add(&f.source.d(k).mul(&self.h(k - 1, f))?)?;
            if lhs != rhs {
                return Err(ChainError::NotHomotopy(k));
            }
        }
        Ok(())
    }
}

/// A self-map `f` of a complex over `Z[G x_alpha Z]` with entries in `Z[G]`
/// satisfying `f_k d(k) = alpha^-1(d(k)) f_{k-1}`, so that `t f` is a chain map.
#[derive(Clone, Debug)]
pub struct SelfEquivalenceWithTwist {
    pub complex: BasedChainComplex,
    pub comps: Vec<GRMatrix>,
}

impl SelfEquivalenceWithTwist {
    pub fn new(complex: BasedChainComplex, comps: Vec<GRMatrix>) -> Result<Self, ChainError> {
        if !complex.group().is_twisted() {
            return Err(ChainError::Untwisted);
        }
        let me = SelfEquivalenceWithTwist { complex, comps };
        for k in 0..=me.complex.top() {
            let f = me.f(k);
            if f.rows() != me.complex.rank(k) || f.cols() != me.complex.rank(k) {
                return Err(ChainError::Shape {
                    degree: k,
                    rows: me.complex.rank(k),
                    cols: me.complex.rank(k),
                    got_rows: f.rows(),
                    got_cols: f.cols(),
                });
            }
            if k >= 1 {
                let lhs = f.mul(&me.complex.d(k))?;
                let rhs = me.complex.d(k).conjugate_by_stable(-1).mul(&me.f(k - 1))?;
                if lhs != rhs {
                    return Err(ChainError::NotTwistedMap(k));
                }
            }
        }
        Ok(me)
    }

    pub fn f(&self, k: i64) -> Cow<'_, GRMatrix> {
        if k >= 0 && (k as usize) < self.comps.len() {
            Cow::Borrowed(&self.comps[k as usize])
        } else {
            let r = self.complex.rank(k);
            Cow::Owned(GRMatrix::gr_zeros(r, r, self.complex.group()))
        }
    }

    /// The chain map `1 - t f`.
    pub fn one_minus_tf(&self) -> Result<ChainMap, ChainError> {
        let g = self.complex.group();
        let t = GroupRingElement::monomial(g, g.stable().ok_or(ChainError::Untwisted)?, 1);
        let comps = (0..=self.complex.top())
            .map(|k| GRMatrix::gr_identity(self.complex.rank(k), g).sub(&self.f(k).scale_left(&t)))
            .collect::<Result<Vec<_>, _>>()?;
        ChainMap::new(&self.complex, &self.complex, comps)
    }

    /// Algebraic mapping torus `cone(1 - t f)`.
    pub fn mapping_torus(&self) -> Result<BasedChainComplex, ChainError> {
        Ok(self.one_minus_tf()?.cone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u64) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(n))
    }

    fn el(g: &Arc<GroupSpec>, c: &[i64]) -> GroupRingElement {
        GroupRingElement::from_powers(g, &g.generator(0), c)
    }

    fn m(g: &Arc<GroupSpec>, rows: Vec<Vec<GroupRingElement>>, cols: usize) -> GRMatrix {
        Matrix::from_rows_sized(rows, cols, &GroupRingElement::zero(g)).unwrap()
    }

    /// Cellular chains of the circle with fundamental group Z/n lifted: t - 1.
    fn circle(g: &Arc<GroupSpec>) -> BasedChainComplex {
        BasedChainComplex::new(g, vec![1, 1], vec![m(g, vec![vec![el(g, &[-1, 1])]], 1)]).unwrap()
    }

    #[test]
    fn rejects_non_chain() {
        let g = z(5);
        let one = GroupRingElement::one(&g);
        let d = m(&g, vec![vec![one.clone()]], 1);
        assert!(matches!(
            BasedChainComplex::new(&g, vec![1, 1, 1], vec![d.clone(), d]),
            Err(ChainError::NotChain(2))
        ));
    }

    #[test]
    fn dual_is_chain_and_involutive_up_to_sign() {
        let g = z(5);
        let n = el(&g, &[1, 1, 1, 1, 1]);
        let c = BasedChainComplex::new(
            &g,
            vec![1, 1, 1],
            vec![m(&g, vec![vec![el(&g, &[-1, 1])]], 1), m(&g, vec![vec![n]], 1)],
        )
        .unwrap();
        let dd = c.dual(2);
        dd.validate().unwrap();
        let back = dd.dual(2);
        back.validate().unwrap();
        for k in 1..=2 {
            assert_eq!(*back.d(k), c.d(k).neg());
        }
    }

    #[test]
    fn cone_of_identity_is_chain() {
        let g = z(5);
        let c = circle(&g);
        let cone = ChainMap::identity(&c).cone();
        cone.validate().unwrap();
        assert_eq!(cone.ranks(), &[1, 2, 1]);
    }

    #[test]
    fn tensor_square_of_circle() {
        let g = z(3);
        let c = circle(&g);
        let tp = c.tensor(&c).unwrap();
        assert_eq!(tp.complex.ranks(), &[1, 2, 1]);
        tp.complex.validate().unwrap();
        let id = ChainMap::identity(&c).tensor(&ChainMap::identity(&c)).unwrap();
        assert!(id.components().iter().all(|x| x.is_identity()));
    }

    #[test]
    fn homotopy_identity() {
        let g = z(5);
        let c = circle(&g);
        // multiplication by t is homotopic to the identity via h_0 = 1
        let t = el(&g, &[0, 1]);
        let tf = ChainMap::new(&c, &c, vec![m(&g, vec![vec![t.clone()]], 1), m(&g, vec![vec![t]], 1)]).unwrap();
        let id = ChainMap::identity(&c);
        let h = ChainHomotopy { comps: vec![m(&g, vec![vec![GroupRingElement::one(&g)]], 1)] };
        h.verify(&tf, &id).unwrap();
        let bad = ChainHomotopy { comps: vec![m(&g, vec![vec![GroupRingElement::from_int(&g, -1)]], 1)] };
        assert!(bad.verify(&tf, &id).is_err());
    }

    #[test]
    fn sub_and_quotient() {
        let g = z(5);
        let c = circle(&g);
        let (sub, inc) = c.subcomplex(&[vec![0], vec![]]).unwrap();
        assert_eq!(sub.ranks(), &[1, 0]);
        inc.validate().unwrap();
        let (q, proj) = c.quotient(&[vec![0], vec![]]).unwrap();
        assert_eq!(q.ranks(), &[0, 1]);
        proj.validate().unwrap();
        assert!(c.subcomplex(&[vec![], vec![0]]).is_err());
    }

    #[test]
    fn mapping_torus_of_unit() {
        let tw = Arc::new(GroupSpec::cyclic(5).semidirect(vec![vec![2]], "s", 1).unwrap());
        let c = BasedChainComplex::concentrated(&tw, 0, 1);
        let u = GroupRingElement::from_powers(&tw, &tw.generator(0), &[-1, 1, 0, 0, 1]);
        let se = SelfEquivalenceWithTwist::new(c, vec![m(&tw, vec![vec![u]], 1)]).unwrap();
        let t = se.mapping_torus().unwrap();
        assert_eq!(t.ranks(), &[1, 1]);
    }
}
