//! Torsion of acyclic based complexes, Whitehead torsion of chain
//! equivalences and executable checks of the standard torsion formulas.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::chain::{BasedChainComplex, ChainError, ChainHomotopy, ChainMap};
use crate::cyclo::RatFunc;
use crate::elim::find_pivot;
use crate::group::{GroupElement, GroupSpec};
use crate::intlin::IntSolver;
use crate::matrix::{GRMatrix, Matrix, MatrixError};
use crate::ring::{GroupRingElement, Ring};
use crate::target::RingMorphism;
use crate::units::MAX_REGULAR_REP;
use crate::whitehead::{TorsionClass, Verdict, WhError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TorsionError {
    #[error("no unit pivot left; residual ranks {residual:?} over an infinite group")]
    Stuck { residual: Vec<usize> },
    #[error("complex is not acyclic (fails in degree {0})")]
    NotAcyclic(i64),
    #[error("not a contraction in degree {0}")]
    BadContraction(i64),
    #[error("regular representation too large ({0} elements)")]
    TooLarge(u64),
    #[error("{0}")]
    Incompatible(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Wh(#[from] WhError),
}

impl TorsionError {
    /// Whether elimination ran out of unit pivots over an infinite group.
    pub fn is_stuck(&self) -> bool {
        matches!(self, TorsionError::Stuck { .. })
    }
}

/// Order in which pivots are searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotOrder {
    #[default]
    Forward,
    Reverse,
}

/// How a torsion value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    UnitPivots,
    UnitPivotsThenIntegerContraction,
    IntegerContraction,
}

#[derive(Clone, Debug)]
struct ChainPivot<R> {
    degree: i64,
    row: usize,
    col: usize,
    value: R,
    inverse: R,
}

/// State of the chain-level reduction: `d'(k) = P_k d(k) P_{k-1}^-1`.
struct Reduction<R: Ring> {
    diffs: Vec<Matrix<R>>,
    p: Vec<Matrix<R>>,
    pinv: Vec<Matrix<R>>,
    alive: Vec<Vec<bool>>,
    pivots: Vec<ChainPivot<R>>,
    track: bool,
}

impl<R: Ring> Reduction<R> {
    fn new(ranks: &[usize], diffs: Vec<Matrix<R>>, zero: &R, track: bool) -> Self {
        let (p, pinv) = if track {
            let ids: Vec<Matrix<R>> = ranks.iter().map(|&r| Matrix::identity(r, zero)).collect();
            (ids.clone(), ids)
        } else {
            (vec![], vec![])
        };
        Reduction { diffs, p, pinv, alive: ranks.iter().map(|&r| vec![true; r]).collect(), pivots: vec![], track }
    }

    fn alive_idx(&self, k: usize) -> Vec<usize> {
        (0..self.alive[k].len()).filter(|&i| self.alive[k][i]).collect()
    }

    fn run(&mut self, order: PivotOrder, certify: bool) {
        loop {
            let mut degrees: Vec<usize> = (1..=self.diffs.len()).collect();
            if order == PivotOrder::Reverse {
                degrees.reverse();
            }
            let mut found = None;
            'outer: for cert in [false, true] {
                if cert && !certify {
                    break;
                }
                for &k in &degrees {
                    let mut rows = self.alive_idx(k);
                    let mut cols = self.alive_idx(k - 1);
                    if order == PivotOrder::Reverse {
                        rows.reverse();
                        cols.reverse();
                    }
                    if let Some((r, c, inv)) = find_pivot(&self.diffs[k - 1], &rows, &cols, cert) {
                        found = Some((k, r, c, inv));
                        break 'outer;
                    }
                }
            }
            let Some((k, r, c, inv)) = found else { return };
            self.clear(k, r, c, inv);
        }
    }

    fn clear(&mut self, k: usize, r: usize, c: usize, pinv_el: R) {
        let rows = self.alive_idx(k);
        let cols = self.alive_idx(k - 1);
        let p = self.diffs[k - 1].get(r, c).clone();
        for &i in rows.iter().filter(|&&i| i != r) {
            let x = self.diffs[k - 1].get(i, c).clone();
            if x.is_zero() {
                continue;
            }
            let lambda = x.mul_r(&pinv_el).neg_r();
            add_row(&mut self.diffs[k - 1], i, r, &lambda);
            if k < self.diffs.len() {
                add_col(&mut self.diffs[k], r, i, &lambda.neg_r());
            }
            if self.track {
                add_row(&mut self.p[k], i, r, &lambda);
                add_col(&mut self.pinv[k], r, i, &lambda.neg_r());
            }
        }
        for &j in cols.iter().filter(|&&j| j != c) {
            let x = self.diffs[k - 1].get(r, j).clone();
            if x.is_zero() {
                continue;
            }
            let mu = pinv_el.mul_r(&x).neg_r();
            add_col(&mut self.diffs[k - 1], j, c, &mu);
            if k >= 2 {
                add_row(&mut self.diffs[k - 2], c, j, &mu.neg_r());
            }
            if self.track {
                add_row(&mut self.p[k - 1], c, j, &mu.neg_r());
                add_col(&mut self.pinv[k - 1], j, c, &mu);
            }
        }
        self.alive[k][r] = false;
        self.alive[k - 1][c] = false;
        self.pivots.push(ChainPivot { degree: k as i64, row: r, col: c, value: p, inverse: pinv_el });
    }

    fn residual_ranks(&self) -> Vec<usize> {
        self.alive.iter().map(|a| a.iter().filter(|&&b| b).count()).collect()
    }

    fn is_complete(&self) -> bool {
        self.alive.iter().all(|a| a.iter().all(|&b| !b))
    }
}

/// `row[i] += lambda * row[r]`
fn add_row<R: Ring>(m: &mut Matrix<R>, i: usize, r: usize, lambda: &R) {
    for j in 0..m.cols() {
        let s = m.get(r, j);
        if s.is_zero() {
            continue;
        }
        let v = m.get(i, j).add_r(&lambda.mul_r(s));
        m.set(i, j, v);
    }
}

/// `col[j] += col[c] * mu`
fn add_col<R: Ring>(m: &mut Matrix<R>, j: usize, c: usize, mu: &R) {
    for i in 0..m.rows() {
        let s = m.get(i, c);
        if s.is_zero() {
            continue;
        }
        let v = m.get(i, j).add_r(&s.mul_r(mu));
        m.set(i, j, v);
    }
}

/// Degree +1 maps `gamma_k : C_k -> C_{k+1}` with `d gamma + gamma d = 1`.
#[derive(Clone, Debug)]
pub struct ContractionWitness {
    complex: BasedChainComplex,
    gamma: Vec<GRMatrix>,
}

impl ContractionWitness {
    pub fn new(complex: &BasedChainComplex, gamma: Vec<GRMatrix>) -> Result<Self, TorsionError> {
        let w = ContractionWitness { complex: complex.clone(), gamma };
        w.verify()?;
        Ok(w)
    }

    pub fn gamma(&self, k: i64) -> GRMatrix {
        if k >= 0 && (k as usize) < self.gamma.len() {
            self.gamma[k as usize].clone()
        } else {
            GRMatrix::gr_zeros(self.complex.rank(k), self.complex.rank(k + 1), self.complex.group())
        }
    }

    pub fn verify(&self) -> Result<(), TorsionError> {
        let c = &self.complex;
        for k in 0..=c.top() {
            let s = c.d(k).mul(&self.gamma(k - 1))?.add(&self.gamma(k).mul(&c.d(k + 1))?)?;
            if !s.is_identity() {
                return Err(TorsionError::BadContraction(k));
            }
        }
        Ok(())
    }

    /// `gamma d gamma`, again a contraction and now of square zero.
    pub fn square_zero(&self) -> Result<Self, TorsionError> {
        let c = &self.complex;
        let gamma = (0..=c.top())
            .map(|k| self.gamma(k).mul(&c.d(k + 1))?.mul(&self.gamma(k)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ContractionWitness { complex: c.clone(), gamma })
    }

    /// The class of `(d + gamma)_odd : C_odd -> C_even` (after squaring to zero).
    pub fn torsion(&self) -> Result<TorsionClass, TorsionError> {
        let w = self.square_zero()?;
        let c = &self.complex;
        let g = c.group();
        let odd: Vec<i64> = (0..=c.top()).filter(|k| k % 2 == 1).collect();
        let even: Vec<i64> = (0..=c.top()).filter(|k| k % 2 == 0).collect();
        let offsets = |ds: &[i64]| -> HashMap<i64, usize> {
            let mut acc = 0;
            ds.iter()
                .map(|&k| {
                    let o = acc;
                    acc += c.rank(k);
                    (k, o)
                })
                .collect()
        };
        let (oo, eo) = (offsets(&odd), offsets(&even));
        let no: usize = odd.iter().map(|&k| c.rank(k)).sum();
        let ne: usize = even.iter().map(|&k| c.rank(k)).sum();
        if no != ne {
            return Err(TorsionError::NotAcyclic(-1));
        }
        let mut fwd = GRMatrix::gr_zeros(no, ne, g);
        let mut back = GRMatrix::gr_zeros(ne, no, g);
        let place = |m: &mut GRMatrix, blk: &GRMatrix, r0: usize, c0: usize| {
            for i in 0..blk.rows() {
                for j in 0..blk.cols() {
                    m.set(r0 + i, c0 + j, blk.get(i, j).clone());
                }
            }
        };
        for &k in &odd {
            if let Some(&e) = eo.get(&(k - 1)) {
                place(&mut fwd, &c.d(k), oo[&k], e);
            }
            if let Some(&e) = eo.get(&(k + 1)) {
                place(&mut fwd, &w.gamma(k), oo[&k], e);
            }
        }
        for &k in &even {
            if let Some(&o) = oo.get(&(k - 1)) {
                place(&mut back, &c.d(k), eo[&k], o);
            }
            if let Some(&o) = oo.get(&(k + 1)) {
                place(&mut back, &w.gamma(k), eo[&k], o);
            }
        }
        Ok(TorsionClass::from_matrix_with_inverse(fwd, back)?)
    }
}

/// Exact contraction through the integral regular representation (finite groups only).
pub fn integer_contraction(c: &BasedChainComplex) -> Result<ContractionWitness, TorsionError> {
    let g = c.group().clone();
    if !g.is_finite() {
        return Err(TorsionError::Stuck { residual: c.ranks().to_vec() });
    }
    let size = g.finite_part_size();
    if size > MAX_REGULAR_REP {
        return Err(TorsionError::TooLarge(size));
    }
    let elems = g.finite_part_elements();
    let index: HashMap<GroupElement, usize> = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let n = elems.len();
    let mut gamma: Vec<GRMatrix> = Vec::new();
    for k in 0..=c.top() {
        // gamma_k d(k+1) = 1 - d(k) gamma_{k-1}
        let prev = if k == 0 { GRMatrix::gr_zeros(0, c.rank(0), &g) } else { gamma[k as usize - 1].clone() };
        let rhs = GRMatrix::gr_identity(c.rank(k), &g).sub(&c.d(k).mul(&prev)?)?;
        let d = c.d(k + 1);
        let (a, b) = (d.rows(), d.cols());
        if a == 0 {
            if !rhs.is_zero() {
                return Err(TorsionError::NotAcyclic(k));
            }
            gamma.push(GRMatrix::gr_zeros(c.rank(k), 0, &g));
            continue;
        }
        let mut reg = vec![vec![BigInt::zero(); b * n]; a * n];
        for i in 0..a {
            for j in 0..b {
                for (h_idx, h) in elems.iter().enumerate() {
                    for (x, coef) in d.get(i, j).terms() {
                        reg[i * n + h_idx][j * n + index[&g.mul(h, x)]] += coef;
                    }
                }
            }
        }
        let solver = IntSolver::new(&reg, a * n, b * n);
        let mut gk = GRMatrix::gr_zeros(c.rank(k), a, &g);
        for r in 0..rhs.rows() {
            let mut target = vec![BigInt::zero(); b * n];
            for j in 0..b {
                for (x, coef) in rhs.get(r, j).terms() {
                    target[j * n + index[x]] += coef;
                }
            }
            let sol = solver.solve(&target).ok_or(TorsionError::NotAcyclic(k))?;
            for i in 0..a {
                let el = GroupRingElement::from_terms(&g, (0..n).map(|h| (sol[i * n + h].clone(), elems[h].clone())));
                gk.set(r, i, el);
            }
        }
        gamma.push(gk);
    }
    ContractionWitness::new(c, gamma)
}

/// Torsion of an acyclic based complex, with the contraction that certifies it.
#[derive(Clone, Debug)]
pub struct AcyclicTorsion {
    pub class: TorsionClass,
    pub witness: ContractionWitness,
    pub method: Method,
    pub pivots: usize,
}

pub fn torsion_of_acyclic(c: &BasedChainComplex) -> Result<AcyclicTorsion, TorsionError> {
    torsion_of_acyclic_with(c, PivotOrder::Forward)
}

pub fn torsion_of_acyclic_with(c: &BasedChainComplex, order: PivotOrder) -> Result<AcyclicTorsion, TorsionError> {
    let g = c.group().clone();
    let zero = GroupRingElement::zero(&g);
    let top = c.top();
    let diffs: Vec<GRMatrix> = (1..=top).map(|k| c.d(k).into_owned()).collect();
    let mut red = Reduction::new(c.ranks(), diffs, &zero, true);
    red.run(order, true);
    let mut class = TorsionClass::trivial(&g);
    for pv in &red.pivots {
        if pv.value.is_trivial_unit() {
            continue;
        }
        let u = TorsionClass::from_unit(&pv.value)?;
        class = class.add(&u.signed(pv.degree + 1))?;
    }
    // contraction of the reduced complex: pivot part plus residual part
    let mut g_red: Vec<GRMatrix> = (0..=top).map(|k| GRMatrix::gr_zeros(c.rank(k), c.rank(k + 1), &g)).collect();
    for pv in &red.pivots {
        g_red[pv.degree as usize - 1].set(pv.col, pv.row, pv.inverse.clone());
    }
    let mut method = Method::UnitPivots;
    if !red.is_complete() {
        let keep: Vec<Vec<usize>> = (0..=top as usize).map(|k| red.alive_idx(k)).collect();
        let ranks: Vec<usize> = keep.iter().map(|v| v.len()).collect();
        let rd: Vec<GRMatrix> = (1..=top as usize).map(|k| red.diffs[k - 1].submatrix(&keep[k], &keep[k - 1])).collect();
        let residual = BasedChainComplex::new(&g, ranks, rd)?;
        if !g.is_finite() {
            return Err(TorsionError::Stuck { residual: red.residual_ranks() });
        }
        let w = integer_contraction(&residual)?;
        class = class.add(&w.torsion()?)?;
        for k in 0..top as usize {
            let gk = w.gamma(k as i64);
            for (a, &i) in keep[k].iter().enumerate() {
                for (b, &j) in keep[k + 1].iter().enumerate() {
                    g_red[k].set(i, j, gk.get(a, b).clone());
                }
            }
        }
        method = if red.pivots.is_empty() { Method::IntegerContraction } else { Method::UnitPivotsThenIntegerContraction };
    }
    let gamma = (0..=top as usize)
        .map(|k| {
            if k as i64 == top {
                return Ok(GRMatrix::gr_zeros(c.rank(top), 0, &g));
            }
            red.pinv[k].mul(&g_red[k])?.mul(&red.p[k + 1])
        })
        .collect::<Result<Vec<_>, MatrixError>>()?;
    let witness = ContractionWitness::new(c, gamma)?;
    Ok(AcyclicTorsion { class, witness, method, pivots: red.pivots.len() })
}

/// Torsion through a contraction found directly by the integer solver,
/// independent of the pivot search.
pub fn torsion_via_integer_contraction(c: &BasedChainComplex) -> Result<AcyclicTorsion, TorsionError> {
    let w = integer_contraction(c)?;
    Ok(AcyclicTorsion { class: w.torsion()?, witness: w, method: Method::IntegerContraction, pivots: 0 })
}

/// Units-valued torsion after applying a character: the alternating product
/// of pivots over the field of fractions (a weaker, Reidemeister-style invariant).
pub fn reidemeister_torsion(c: &BasedChainComplex, chi: &RingMorphism) -> Result<RatFunc, TorsionError> {
    let zero = RatFunc::from_laurent(crate::cyclo::Laurent::zero(chi.field()));
    let diffs: Vec<Matrix<RatFunc>> =
        (1..=c.top()).map(|k| c.d(k).map_into(&zero, |x| RatFunc::from_laurent(chi.apply(x)))).collect();
    let mut red = Reduction::new(c.ranks(), diffs, &zero, false);
    red.run(PivotOrder::Forward, true);
    if !red.is_complete() {
        let k = red.alive.iter().position(|a| a.iter().any(|&b| b)).unwrap_or(0);
        return Err(TorsionError::NotAcyclic(k as i64));
    }
    let mut acc = zero.one_like();
    for pv in &red.pivots {
        acc = if pv.degree % 2 == 1 { acc.mul_r(&pv.value) } else { acc.mul_r(&pv.inverse) };
    }
    Ok(acc)
}

pub fn whitehead_torsion(f: &ChainMap) -> Result<TorsionClass, TorsionError> {
    Ok(torsion_of_acyclic(&f.cone())?.class)
}

/// A homotopy inverse read off a contraction of the cone.
#[derive(Clone, Debug)]
pub struct HomotopyInverse {
    pub inverse: ChainMap,
    /// `f then g` is homotopic to the identity of the source.
    pub source_homotopy: ChainHomotopy,
    /// `g then f` is homotopic to the identity of the target.
    pub target_homotopy: ChainHomotopy,
}

pub fn homotopy_inverse(f: &ChainMap) -> Result<HomotopyInverse, TorsionError> {
    let cone = f.cone();
    let w = torsion_of_acyclic(&cone)?.witness;
    let (c, d) = (f.source(), f.target());
    let top = c.top().max(d.top());
    let block = |m: &GRMatrix, r0: usize, nr: usize, c0: usize, nc: usize| -> GRMatrix {
        let rows: Vec<usize> = (r0..r0 + nr).collect();
        let cols: Vec<usize> = (c0..c0 + nc).collect();
        m.submatrix(&rows, &cols)
    };
    let mut g_comps = Vec::new();
    let mut a_comps = Vec::new();
    let mut c_comps = Vec::new();
    for k in 0..=top {
        // gamma_k : D_k + C_{k-1} -> D_{k+1} + C_k
        let gk = w.gamma(k);
        g_comps.push(block(&gk, 0, d.rank(k), d.rank(k + 1), c.rank(k)));
        a_comps.push(block(&gk, 0, d.rank(k), 0, d.rank(k + 1)).neg());
        let gk1 = w.gamma(k + 1);
        c_comps.push(block(&gk1, d.rank(k + 1), c.rank(k), d.rank(k + 2), c.rank(k + 1)));
    }
    let inverse = ChainMap::new(d, c, g_comps)?;
    let source_homotopy = ChainHomotopy { comps: c_comps };
    let target_homotopy = ChainHomotopy { comps: a_comps };
    source_homotopy.verify(&f.then(&inverse)?, &ChainMap::identity(c))?;
    target_homotopy.verify(&inverse.then(f)?, &ChainMap::identity(d))?;
    Ok(HomotopyInverse { inverse, source_homotopy, target_homotopy })
}

/// Outcome of one formula check.
#[derive(Clone, Debug)]
pub struct FormulaCheck {
    pub name: &'static str,
    pub verdict: Verdict,
}

impl FormulaCheck {
    pub fn passed(&self) -> bool {
        self.verdict.is_trivial()
    }
}

/// `tau(f then g) - tau(f) - tau(g)`.
pub fn check_composition(f: &ChainMap, g: &ChainMap) -> Result<FormulaCheck, TorsionError> {
    let gf = f.then(g)?;
    let lhs = whitehead_torsion(&gf)?;
    let rhs = whitehead_torsion(f)?.add(&whitehead_torsion(g)?)?;
    Ok(FormulaCheck { name: "composition", verdict: lhs.sub(&rhs)?.classify() })
}

/// `tau(f) - tau(g)` given a verified homotopy `f ~ g`.
pub fn check_homotopy_invariance(f: &ChainMap, g: &ChainMap, h: &ChainHomotopy) -> Result<FormulaCheck, TorsionError> {
    h.verify(f, g)?;
    let d = whitehead_torsion(f)?.sub(&whitehead_torsion(g)?)?;
    Ok(FormulaCheck { name: "homotopy invariance", verdict: d.classify() })
}

/// Glues two maps along a common based subcomplex (a basis prefix in every
/// degree of both sources and both targets, on which both maps restrict to
/// `f0`), and checks `tau(f) = tau(f1) + tau(f2) - tau(f0)`.
pub fn check_sum(f0: &ChainMap, f1: &ChainMap, f2: &ChainMap) -> Result<FormulaCheck, TorsionError> {
    let src = pushout(f0.source(), f1.source(), f2.source())?;
    let tgt = pushout(f0.target(), f1.target(), f2.target())?;
    let top = src.complex.top().max(tgt.complex.top());
    let g = f0.source().group().clone();
    for (fi, name) in [(f1, "first"), (f2, "second")] {
        for k in 0..=top {
            let r0 = f0.source().rank(k);
            let c0 = f0.target().rank(k);
            let rows: Vec<usize> = (0..r0).collect();
            let all: Vec<usize> = (0..fi.target().rank(k)).collect();
            let restricted = fi.f(k).submatrix(&rows, &all);
            let expect = Matrix::hstack(&f0.f(k), &GRMatrix::gr_zeros(r0, fi.target().rank(k) - c0, &g))?;
            if restricted != expect {
                return Err(TorsionError::Incompatible(format!("{name} map does not restrict to f0 in degree {k}")));
            }
        }
    }
    let comps = (0..=top)
        .map(|k| {
            let mut m = GRMatrix::gr_zeros(src.complex.rank(k), tgt.complex.rank(k), &g);
            for (fi, sside, tside) in [(f1, &src.first, &tgt.first), (f2, &src.second, &tgt.second)] {
                for (i, &si) in sside[k as usize].iter().enumerate() {
                    for (j, &tj) in tside[k as usize].iter().enumerate() {
                        let x = fi.f(k).get(i, j).clone();
                        if !x.is_zero() {
                            m.set(si, tj, x);
                        }
                    }
                }
            }
            m
        })
        .collect();
    let f = ChainMap::new(&src.complex, &tgt.complex, comps)?;
    let lhs = whitehead_torsion(&f)?;
    let rhs = whitehead_torsion(f1)?.add(&whitehead_torsion(f2)?)?.sub(&whitehead_torsion(f0)?)?;
    Ok(FormulaCheck { name: "sum", verdict: lhs.sub(&rhs)?.classify() })
}

/// Pushout of two complexes along a common basis-prefix subcomplex.
pub struct Pushout {
    pub complex: BasedChainComplex,
    /// Position in the pushout of each basis element of the first piece, per degree.
    pub first: Vec<Vec<usize>>,
    pub second: Vec<Vec<usize>>,
}

pub fn pushout(c0: &BasedChainComplex, c1: &BasedChainComplex, c2: &BasedChainComplex) -> Result<Pushout, TorsionError> {
    let top = c0.top().max(c1.top()).max(c2.top());
    let g = c0.group().clone();
    for (ci, name) in [(c1, "first"), (c2, "second")] {
        for k in 0..=top {
            let n0 = c0.rank(k);
            if ci.rank(k) < n0 {
                return Err(TorsionError::Incompatible(format!("{name} piece is smaller than the common part")));
            }
            let rows: Vec<usize> = (0..n0).collect();
            let all: Vec<usize> = (0..ci.rank(k - 1)).collect();
            let restricted = ci.d(k).submatrix(&rows, &all);
            let expect = Matrix::hstack(&c0.d(k), &GRMatrix::gr_zeros(n0, ci.rank(k - 1) - c0.rank(k - 1), &g))?;
            if restricted != expect {
                return Err(TorsionError::Incompatible(format!("common part is not a based subcomplex of the {name} piece")));
            }
        }
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mut ranks = Vec::new();
    for k in 0..=top {
        let (n0, n1, n2) = (c0.rank(k), c1.rank(k), c2.rank(k));
        first.push((0..n1).collect::<Vec<_>>());
        second.push((0..n0).chain(n1..n1 + n2 - n0).collect::<Vec<_>>());
        ranks.push(n1 + n2 - n0);
    }
    let mut diffs = Vec::new();
    for k in 1..=top {
        let ku = k as usize;
        let mut m = GRMatrix::gr_zeros(ranks[ku], ranks[ku - 1], &g);
        for (ci, map) in [(c1, &first), (c2, &second)] {
            let d = ci.d(k);
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    let x = d.get(i, j);
                    if !x.is_zero() {
                        m.set(map[ku][i], map[ku - 1][j], x.clone());
                    }
                }
            }
        }
        diffs.push(m);
    }
    Ok(Pushout { complex: BasedChainComplex::new(&g, ranks, diffs)?, first, second })
}

/// `tau(f1 (x) f2) = chi(D1) i2_* tau(f2) + chi(D2) i1_* tau(f1)`.
pub fn check_product(f1: &ChainMap, f2: &ChainMap) -> Result<FormulaCheck, TorsionError> {
    let t = f1.tensor(f2)?;
    let lhs = whitehead_torsion(&t)?;
    let tp = f1.target().tensor(f2.target())?;
    let a = whitehead_torsion(f1)?.induced(&tp.left)?.scale(f2.target().euler_characteristic());
    let b = whitehead_torsion(f2)?.induced(&tp.right)?.scale(f1.target().euler_characteristic());
    let lhs = crate::whitehead::rebase(&lhs, a.group())?;
    Ok(FormulaCheck { name: "product", verdict: lhs.sub(&a.add(&b)?)?.classify() })
}

/// Group of a complex, for callers that only hold the complex.
pub fn group_of(c: &BasedChainComplex) -> &Arc<GroupSpec> {
    c.group()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitehead::TriState;

    fn z(n: u64) -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(n))
    }

    fn el(g: &Arc<GroupSpec>, c: &[i64]) -> GroupRingElement {
        GroupRingElement::from_powers(g, &g.generator(0), c)
    }

    fn one_by_one(g: &Arc<GroupSpec>, x: GroupRingElement) -> GRMatrix {
        Matrix::diag(&[x], &GroupRingElement::zero(g))
    }

    fn iso_complex(g: &Arc<GroupSpec>, x: GroupRingElement) -> BasedChainComplex {
        BasedChainComplex::new(g, vec![1, 1], vec![one_by_one(g, x)]).unwrap()
    }

    #[test]
    fn golden_unit_complex() {
        let g = z(5);
        let u = el(&g, &[-1, 1, 0, 0, 1]);
        let t = torsion_of_acyclic(&iso_complex(&g, u.clone())).unwrap();
        assert_eq!(t.method, Method::UnitPivots);
        let expect = TorsionClass::from_unit(&u).unwrap();
        assert!(t.class.sub(&expect).unwrap().classify().is_trivial());
        assert!(t.witness.torsion().unwrap().sub(&expect).unwrap().classify().is_trivial());
        // shifted up one degree the sign flips
        let shifted = iso_complex(&g, u).suspension();
        let t2 = torsion_of_acyclic(&shifted).unwrap();
        assert!(t2.class.add(&expect).unwrap().classify().is_trivial());
    }

    #[test]
    fn integer_contraction_on_lens_like_complex() {
        // 1 + t + t^2 + t^3 + t^4 is not a unit, but C: Z[Z/5] -(t-1)-> Z[Z/5] is not
        // acyclic; use instead the cone of an iso u written with non-unit entries.
        let g = z(5);
        let u = el(&g, &[-1, 1, 0, 0, 1]);
        let a = Matrix::from_rows(
            vec![vec![u.clone(), el(&g, &[1, 1])], vec![GroupRingElement::zero(&g), GroupRingElement::one(&g)]],
            &GroupRingElement::zero(&g),
        )
        .unwrap();
        let c = BasedChainComplex::new(&g, vec![2, 2], vec![a]).unwrap();
        let direct = torsion_via_integer_contraction(&c).map_err(|e| e.to_string()).unwrap();
        let pivot = torsion_of_acyclic(&c).unwrap();
        assert!(direct.class.sub(&pivot.class).unwrap().classify().is_trivial());
        assert!(direct.class.classify().is_nontrivial());
    }

    #[test]
    fn non_acyclic_detected() {
        let g = z(5);
        let c = iso_complex(&g, el(&g, &[-1, 1]));
        let r = torsion_of_acyclic(&c);
        assert!(matches!(r, Err(TorsionError::NotAcyclic(_))), "{:?}", r.map(|x| x.class));
        let zz = Arc::new(GroupSpec::infinite_cyclic());
        let c = iso_complex(&zz, el(&zz, &[-1, 1]));
        assert!(matches!(torsion_of_acyclic(&c), Err(TorsionError::Stuck { .. })));
    }

    #[test]
    fn reidemeister_of_circle_over_z() {
        let zz = Arc::new(GroupSpec::infinite_cyclic());
        let c = iso_complex(&zz, el(&zz, &[-1, 1]));
        let chi = crate::target::detecting_characters(&zz, true).remove(0);
        let r = reidemeister_torsion(&c, &chi).unwrap();
        assert_eq!(r.as_laurent().unwrap(), chi.apply(&el(&zz, &[-1, 1])));
    }

    #[test]
    fn whitehead_torsion_and_inverse() {
        let g = z(5);
        let u = el(&g, &[-1, 1, 0, 0, 1]);
        let c = BasedChainComplex::concentrated(&g, 0, 1);
        let f = ChainMap::new(&c, &c, vec![one_by_one(&g, u.clone())]).unwrap();
        let tf = whitehead_torsion(&f).unwrap();
        assert!(tf.sub(&TorsionClass::from_unit(&u).unwrap()).unwrap().classify().is_trivial());
        let hi = homotopy_inverse(&f).unwrap();
        let tg = whitehead_torsion(&hi.inverse).unwrap();
        assert!(tf.add(&tg).unwrap().classify().is_trivial());
        assert_eq!(whitehead_torsion(&ChainMap::identity(&c)).unwrap().classify().state, TriState::Trivial);
    }

    #[test]
    fn formulas_on_small_examples() {
        let g = z(5);
        let u = el(&g, &[-1, 1, 0, 0, 1]);
        let c = BasedChainComplex::concentrated(&g, 0, 1);
        let f = ChainMap::new(&c, &c, vec![one_by_one(&g, u.clone())]).unwrap();
        assert!(check_composition(&f, &f).unwrap().passed());
        let id0 = ChainMap::identity(&BasedChainComplex::zero(&g));
        assert!(check_sum(&id0, &f, &ChainMap::identity(&c)).unwrap().passed());
        let one = Arc::new(GroupSpec::trivial());
        let two_cells = BasedChainComplex::concentrated(&one, 0, 2);
        assert!(check_product(&f, &ChainMap::identity(&two_cells)).unwrap().passed());
    }
}
