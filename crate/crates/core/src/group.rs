//! Finitely generated abelian groups, optionally twisted by an infinite cyclic
//! factor acting through an automorphism.
//!
//! Elements are kept in the normal form `b * s^n` where `b` is an exponent
//! vector over the abelian base and `s` is the stable letter of the twist.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("automorphism matrix must be {0}x{0}")]
    AlphaShape(usize),
    #[error("automorphism does not respect the order of generator {0}")]
    AlphaOrder(usize),
    #[error("automorphism is not invertible on this group")]
    AlphaNotInvertible,
    #[error("orientation character is not invariant under the automorphism at generator {0}")]
    WNotInvariant(usize),
    #[error("orientation character on generator {0} is incompatible with its order")]
    WOrder(usize),
    #[error("orientation character values must be +1 or -1")]
    WValue,
    #[error("expected {expected} generator names, got {got}")]
    Names { expected: usize, got: usize },
    #[error("element has {got} coordinates, group has {expected}")]
    Foreign { expected: usize, got: usize },
    #[error("name {0} is already used by a generator")]
    DuplicateName(String),
    #[error("unsupported group construction: {0}")]
    Unsupported(String),
    #[error("morphism violates a relation: {0}")]
    Relation(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Twist {
    alpha: Vec<Vec<i64>>,
    alpha_inv: Vec<Vec<i64>>,
    name: String,
    w_t: i8,
}

/// An abelian group `Z/n_1 x ... x Z/n_k` (order 0 meaning `Z`), possibly
/// extended to a semidirect product with `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    orders: Vec<u64>,
    names: Vec<String>,
    w: Vec<i8>,
    twist: Option<Twist>,
}

/// Normal form `b * s^t` of a group element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    exps: Vec<i64>,
    t: i64,
}

impl GroupElement {
    pub fn exponents(&self) -> &[i64] {
        &self.exps
    }

    pub fn stable_power(&self) -> i64 {
        self.t
    }
}

fn default_names(k: usize) -> Vec<String> {
    match k {
        0 => vec![],
        1 => vec!["t".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=k).map(|i| format!("x{i}")).collect(),
    }
}

impl GroupSpec {
    /// General abelian group with the given coordinate orders (0 = infinite).
    pub fn abelian(orders: Vec<u64>) -> Self {
        let k = orders.len();
        GroupSpec { orders, names: default_names(k), w: vec![1; k], twist: None }
    }

    pub fn trivial() -> Self {
        Self::abelian(vec![])
    }

    pub fn cyclic(n: u64) -> Self {
        Self::abelian(vec![n])
    }

    pub fn infinite_cyclic() -> Self {
        Self::abelian(vec![0])
    }

    pub fn free_abelian(k: usize) -> Self {
        Self::abelian(vec![0; k])
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, GroupError> {
        if names.len() != self.orders.len() {
            return Err(GroupError::Names { expected: self.orders.len(), got: names.len() });
        }
        self.names = names;
        Ok(self)
    }

    /// Sets the orientation character on the base generators.
    pub fn with_w(mut self, w: Vec<i8>) -> Result<Self, GroupError> {
        if w.len() != self.orders.len() {
            return Err(GroupError::Names { expected: self.orders.len(), got: w.len() });
        }
        if w.iter().any(|&s| s != 1 && s != -1) {
            return Err(GroupError::WValue);
        }
        self.w = w;
        self.validate()?;
        Ok(self)
    }

    /// Semidirect product `self x_alpha Z`, where `alpha[i]` is the exponent
    /// vector of the image of generator `i`. The stable letter `s` satisfies
    /// `s g s^-1 = alpha(g)`.
    pub fn semidirect(
        self,
        alpha: Vec<Vec<i64>>,
        stable_name: &str,
        w_t: i8,
    ) -> Result<Self, GroupError> {
        if self.twist.is_some() {
            return Err(GroupError::Unsupported("iterated semidirect products".into()));
        }
        let k = self.orders.len();
        if alpha.len() != k || alpha.iter().any(|r| r.len() != k) {
            return Err(GroupError::AlphaShape(k));
        }
        if w_t != 1 && w_t != -1 {
            return Err(GroupError::WValue);
        }
        if self.names.iter().any(|n| n == stable_name) {
            return Err(GroupError::DuplicateName(stable_name.to_string()));
        }
        let alpha_inv = invert_alpha(&self.orders, &alpha)?;
        let mut g = self;
        g.twist = Some(Twist { alpha, alpha_inv, name: stable_name.to_string(), w_t });
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), GroupError> {
        for (i, (&n, &s)) in self.orders.iter().zip(&self.w).enumerate() {
            if n > 0 && n % 2 == 1 && s == -1 {
                return Err(GroupError::WOrder(i));
            }
        }
        if let Some(tw) = &self.twist {
            for i in 0..self.orders.len() {
                let img = self.reduce(tw.alpha[i].clone());
                if self.w_base(&img) != self.w[i] {
                    return Err(GroupError::WNotInvariant(i));
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_twisted(&self) -> bool {
        self.twist.is_some()
    }

    pub fn stable_name(&self) -> Option<&str> {
        self.twist.as_ref().map(|t| t.name.as_str())
    }

    pub fn alpha_matrix(&self) -> Option<&Vec<Vec<i64>>> {
        self.twist.as_ref().map(|t| &t.alpha)
    }

    pub fn w_values(&self) -> &[i8] {
        &self.w
    }

    pub fn w_stable(&self) -> i8 {
        self.twist.as_ref().map_or(1, |t| t.w_t)
    }

    /// True when the orientation character is identically 1.
    pub fn w_is_trivial(&self) -> bool {
        self.w.iter().all(|&s| s == 1) && self.w_stable() == 1
    }

    /// Finite group with no twist.
    pub fn is_finite(&self) -> bool {
        self.twist.is_none() && self.orders.iter().all(|&n| n > 0)
    }

    /// Finite abelian and cyclic (pairwise coprime coordinate orders).
    pub fn is_finite_cyclic(&self) -> bool {
        if !self.is_finite() {
            return false;
        }
        let o: Vec<u64> = self.orders.iter().copied().filter(|&n| n > 1).collect();
        for i in 0..o.len() {
            for j in i + 1..o.len() {
                if o[i].gcd(&o[j]) != 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn order(&self) -> Option<u64> {
        if self.is_finite() {
            Some(self.orders.iter().product())
        } else {
            None
        }
    }

    /// Exponent (lcm of finite coordinate orders), 1 if there are none.
    pub fn torsion_exponent(&self) -> u64 {
        self.orders.iter().filter(|&&n| n > 0).fold(1u64, |a, &n| a.lcm(&n))
    }

    fn reduce(&self, mut exps: Vec<i64>) -> Vec<i64> {
        for (e, &n) in exps.iter_mut().zip(&self.orders) {
            if n > 0 {
                *e = e.mod_floor(&(n as i64));
            }
        }
        exps
    }

    /// Builds an element from raw exponents, reducing finite coordinates.
    pub fn element(&self, exps: Vec<i64>, t: i64) -> Result<GroupElement, GroupError> {
        if exps.len() != self.orders.len() {
            return Err(GroupError::Foreign { expected: self.orders.len(), got: exps.len() });
        }
        if t != 0 && self.twist.is_none() {
            return Err(GroupError::Unsupported("stable letter in an untwisted group".into()));
        }
        Ok(GroupElement { exps: self.reduce(exps), t })
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { exps: vec![0; self.orders.len()], t: 0 }
    }

    pub fn generator(&self, i: usize) -> GroupElement {
        let mut exps = vec![0; self.orders.len()];
        exps[i] = 1;
        GroupElement { exps: self.reduce(exps), t: 0 }
    }

    /// The stable letter, if the group is twisted.
    pub fn stable(&self) -> Option<GroupElement> {
        self.twist.as_ref().map(|_| GroupElement { exps: vec![0; self.orders.len()], t: 1 })
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.exps.len() == self.orders.len()
            && (g.t == 0 || self.twist.is_some())
            && self.reduce(g.exps.clone()) == g.exps
    }

    fn apply_matrix(&self, m: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
        let k = self.orders.len();
        let mut out = vec![0i64; k];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for j in 0..k {
                out[j] += xi * m[i][j];
            }
        }
        self.reduce(out)
    }

    /// `alpha^m` applied to a base exponent vector.
    pub fn alpha_pow(&self, x: &[i64], m: i64) -> Vec<i64> {
        let Some(tw) = &self.twist else { return self.reduce(x.to_vec()) };
        let mat = if m >= 0 { &tw.alpha } else { &tw.alpha_inv };
        let mut v = self.reduce(x.to_vec());
        for _ in 0..m.unsigned_abs() {
            v = self.apply_matrix(mat, &v);
        }
        v
    }

    /// Applies `alpha^m` to a base element (t-component must be zero).
    pub fn alpha_element(&self, g: &GroupElement, m: i64) -> GroupElement {
        GroupElement { exps: self.alpha_pow(&g.exps, m), t: g.t }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let moved = self.alpha_pow(&b.exps, a.t);
        let exps = a.exps.iter().zip(&moved).map(|(x, y)| x + y).collect();
        GroupElement { exps: self.reduce(exps), t: a.t + b.t }
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        let neg: Vec<i64> = a.exps.iter().map(|x| -x).collect();
        GroupElement { exps: self.alpha_pow(&neg, -a.t), t: -a.t }
    }

    pub fn pow(&self, a: &GroupElement, n: i64) -> GroupElement {
        let base = if n < 0 { self.inv(a) } else { a.clone() };
        let mut result = self.identity();
        let mut sq = base;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &sq);
            }
            sq = self.mul(&sq, &sq);
            e >>= 1;
        }
        result
    }

    fn w_base(&self, exps: &[i64]) -> i8 {
        exps.iter()
            .zip(&self.w)
            .fold(1i8, |acc, (&e, &s)| if s == -1 && e.rem_euclid(2) == 1 { -acc } else { acc })
    }

    /// Orientation character.
    pub fn w_of(&self, g: &GroupElement) -> i8 {
        let mut s = self.w_base(&g.exps);
        if self.w_stable() == -1 && g.t.rem_euclid(2) == 1 {
            s = -s;
        }
        s
    }

    /// True if `g` lies in the finite torsion part of the base.
    pub fn in_finite_part(&self, g: &GroupElement) -> bool {
        g.t == 0 && g.exps.iter().zip(&self.orders).all(|(&e, &n)| n > 0 || e == 0)
    }

    /// All elements of the finite torsion part of the base, in lexicographic order.
    pub fn finite_part_elements(&self) -> Vec<GroupElement> {
        let mut out = vec![self.identity()];
        for (i, &n) in self.orders.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * n as usize);
            for g in &out {
                for e in 0..n as i64 {
                    let mut h = g.clone();
                    h.exps[i] = e;
                    next.push(h);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    pub fn finite_part_size(&self) -> u64 {
        self.orders.iter().filter(|&&n| n > 0).product()
    }

    /// Formats an element with the declared generator names.
    pub fn format_element(&self, g: &GroupElement) -> String {
        let mut parts = Vec::new();
        for (e, name) in g.exps.iter().zip(&self.names) {
            match *e {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        if let Some(tw) = &self.twist {
            match g.t {
                0 => {}
                1 => parts.push(tw.name.clone()),
                e => parts.push(format!("{}^{e}", tw.name)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Direct product together with the two coordinate embeddings.
    pub fn product(
        a: &Arc<GroupSpec>,
        b: &Arc<GroupSpec>,
    ) -> Result<(Arc<GroupSpec>, GroupMorphism, GroupMorphism), GroupError> {
        if a.twist.is_some() && b.twist.is_some() {
            return Err(GroupError::Unsupported("product of two twisted groups".into()));
        }
        let ka = a.rank();
        let kb = b.rank();
        let mut orders = a.orders.clone();
        orders.extend(&b.orders);
        let mut names: Vec<String> = a.names.clone();
        for n in &b.names {
            if names.contains(n) {
                names.push(format!("{n}'"));
            } else {
                names.push(n.clone());
            }
        }
        let mut w = a.w.clone();
        w.extend(&b.w);
        let mut p = GroupSpec { orders, names, w, twist: None };
        if let Some(tw) = a.twist.as_ref().or(b.twist.as_ref()) {
            let a_twisted = a.twist.is_some();
            let k = ka + kb;
            let block = |src: &Vec<Vec<i64>>| {
                let mut m = vec![vec![0i64; k]; k];
                for i in 0..k {
                    m[i][i] = 1;
                }
                let off = if a_twisted { 0 } else { ka };
                let kk = if a_twisted { ka } else { kb };
                for i in 0..kk {
                    for j in 0..kk {
                        m[off + i][off + j] = src[i][j];
                    }
                    m[off + i][off + i] = src[i][i];
                }
                m
            };
            let mut name = tw.name.clone();
            while p.names.contains(&name) {
                name.push('\'');
            }
            p.twist = Some(Twist {
                alpha: block(&tw.alpha),
                alpha_inv: block(&tw.alpha_inv),
                name,
                w_t: tw.w_t,
            });
        }
        let p = Arc::new(p);
        let embed = |src: &Arc<GroupSpec>, off: usize| -> Result<GroupMorphism, GroupError> {
            let imgs = (0..src.rank())
                .map(|i| {
                    let mut e = vec![0; ka + kb];
                    e[off + i] = 1;
                    p.element(e, 0)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let st = src.twist.as_ref().map(|_| p.stable().expect("twisted product"));
            GroupMorphism::new(src.clone(), p.clone(), imgs, st)
        };
        let ia = embed(a, 0)?;
        let ib = embed(b, ka)?;
        Ok((p.clone(), ia, ib))
    }

    /// The untwisted base of a semidirect product (or a copy of the group itself).
    pub fn base(&self) -> GroupSpec {
        GroupSpec { orders: self.orders.clone(), names: self.names.clone(), w: self.w.clone(), twist: None }
    }

    /// Same base with the inverse automorphism, stable letter renamed.
    pub fn reversed_twist(&self, stable_name: &str) -> Result<GroupSpec, GroupError> {
        let tw = self.twist.as_ref().ok_or_else(|| GroupError::Unsupported("group has no twist".into()))?;
        let mut g = self.clone();
        g.twist = Some(Twist {
            alpha: tw.alpha_inv.clone(),
            alpha_inv: tw.alpha.clone(),
            name: stable_name.to_string(),
            w_t: tw.w_t,
        });
        Ok(g)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let factors: Vec<String> = self
            .orders
            .iter()
            .map(|&n| if n == 0 { "Z".to_string() } else { format!("Z/{n}") })
            .collect();
        let base = if factors.is_empty() { "1".to_string() } else { factors.join(" x ") };
        match &self.twist {
            None => write!(f, "{base}"),
            Some(tw) => write!(f, "({base}) x| Z[{}] alpha={:?}", tw.name, tw.alpha),
        }
    }
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let k = a.len();
    (0..k)
        .map(|i| (0..k).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

fn invert_alpha(orders: &[u64], alpha: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, GroupError> {
    let k = orders.len();
    let g = GroupSpec::abelian(orders.to_vec());
    // well-definedness: n_i * alpha(e_i) must vanish, and torsion cannot map to free coordinates
    for i in 0..k {
        if orders[i] > 0 {
            let scaled: Vec<i64> = alpha[i].iter().map(|&x| x * orders[i] as i64).collect();
            if g.reduce(scaled).iter().any(|&x| x != 0) {
                return Err(GroupError::AlphaOrder(i));
            }
        }
    }
    let finite: Vec<usize> = (0..k).filter(|&i| orders[i] > 0).collect();
    let free: Vec<usize> = (0..k).filter(|&i| orders[i] == 0).collect();
    // cross terms free -> finite are allowed only if they vanish
    for &i in &free {
        for &j in &finite {
            if alpha[i][j].rem_euclid(orders[j] as i64) != 0 {
                return Err(GroupError::Unsupported("automorphism mixing free and finite coordinates".into()));
            }
        }
    }
    let mut inv = vec![vec![0i64; k]; k];
    if !finite.is_empty() {
        let sub: Vec<Vec<i64>> = finite.iter().map(|&i| finite.iter().map(|&j| alpha[i][j]).collect()).collect();
        let sub_orders: Vec<u64> = finite.iter().map(|&i| orders[i]).collect();
        let fg = GroupSpec::abelian(sub_orders);
        let size: u64 = fg.orders.iter().product();
        let ident: Vec<Vec<i64>> = (0..finite.len())
            .map(|i| (0..finite.len()).map(|j| i64::from(i == j)).collect())
            .collect();
        let norm = |m: &Vec<Vec<i64>>| -> Vec<Vec<i64>> { m.iter().map(|r| fg.reduce(r.clone())).collect() };
        let mut power = norm(&sub);
        let mut prev = norm(&ident);
        let mut found = None;
        // the order of an automorphism of a finite group is bounded by |Aut| <= size^rank
        let bound = size.saturating_pow(finite.len() as u32).min(1 << 20);
        for _ in 0..bound {
            if power == norm(&ident) {
                found = Some(prev.clone());
                break;
            }
            prev = power.clone();
            power = norm(&mat_mul(&power, &sub));
        }
        let sub_inv = found.ok_or(GroupError::AlphaNotInvertible)?;
        for (a, &i) in finite.iter().enumerate() {
            for (b, &j) in finite.iter().enumerate() {
                inv[i][j] = sub_inv[a][b];
            }
        }
    }
    if !free.is_empty() {
        let sub: Vec<Vec<i64>> = free.iter().map(|&i| free.iter().map(|&j| alpha[i][j]).collect()).collect();
        let sub_inv = integer_inverse(&sub).ok_or(GroupError::AlphaNotInvertible)?;
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                inv[i][j] = sub_inv[a][b];
            }
        }
        // free -> finite block of the inverse: -A_ff^{-1} A_ft A_tt^{-1}
        if !finite.is_empty() {
            for (a, &i) in free.iter().enumerate() {
                for &j in &finite {
                    let mut acc = 0i64;
                    for (b, &l) in free.iter().enumerate() {
                        for &m in &finite {
                            acc += sub_inv[a][b] * alpha[l][m] * inv[m][j];
                        }
                    }
                    inv[i][j] = -acc;
                }
            }
        }
    }
    let check = mat_mul(alpha, &inv);
    let reduced: Vec<Vec<i64>> = check.iter().map(|r| g.reduce(r.clone())).collect();
    let ident: Vec<Vec<i64>> = (0..k).map(|i| g.reduce((0..k).map(|j| i64::from(i == j)).collect())).collect();
    if reduced != ident {
        return Err(GroupError::AlphaNotInvertible);
    }
    Ok(inv)
}

/// Inverse of a small integer matrix with determinant +-1.
fn integer_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let k = m.len();
    let det = int_det(m);
    if det != 1 && det != -1 {
        return None;
    }
    let mut inv = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let minor: Vec<Vec<i64>> = (0..k)
                .filter(|&r| r != j)
                .map(|r| (0..k).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let cof = if (i + j) % 2 == 0 { int_det(&minor) } else { -int_det(&minor) };
            inv[i][j] = cof * det;
        }
    }
    Some(inv)
}

fn int_det(m: &[Vec<i64>]) -> i64 {
    let k = m.len();
    if k == 0 {
        return 1;
    }
    (0..k)
        .map(|c| {
            let minor: Vec<Vec<i64>> = (1..k).map(|r| (0..k).filter(|&j| j != c).map(|j| m[r][j]).collect()).collect();
            let s = if c % 2 == 0 { 1 } else { -1 };
            s * m[0][c] * int_det(&minor)
        })
        .sum()
}

/// A homomorphism between two group specs, given on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMorphism {
    source: Arc<GroupSpec>,
    target: Arc<GroupSpec>,
    base_images: Vec<GroupElement>,
    stable_image: Option<GroupElement>,
}

impl GroupMorphism {
    pub fn new(
        source: Arc<GroupSpec>,
        target: Arc<GroupSpec>,
        base_images: Vec<GroupElement>,
        stable_image: Option<GroupElement>,
    ) -> Result<Self, GroupError> {
        if base_images.len() != source.rank() {
            return Err(GroupError::Relation(format!(
                "{} generator images for {} generators",
                base_images.len(),
                source.rank()
            )));
        }
        if source.is_twisted() != stable_image.is_some() {
            return Err(GroupError::Relation("stable letter image missing or superfluous".into()));
        }
        for g in base_images.iter().chain(stable_image.iter()) {
            if !target.contains(g) {
                return Err(GroupError::Relation("image is not a normal-form element of the target".into()));
            }
        }
        let t = &target;
        for (i, &n) in source.orders.iter().enumerate() {
            if n > 0 && t.pow(&base_images[i], n as i64) != t.identity() {
                return Err(GroupError::Relation(format!("order of generator {i}")));
            }
            for j in i + 1..base_images.len() {
                let ab = t.mul(&base_images[i], &base_images[j]);
                let ba = t.mul(&base_images[j], &base_images[i]);
                if ab != ba {
                    return Err(GroupError::Relation(format!("generators {i} and {j} must commute")));
                }
            }
        }
        let m = GroupMorphism { source: source.clone(), target: target.clone(), base_images, stable_image };
        if let Some(s) = &m.stable_image {
            for i in 0..source.rank() {
                let lhs = t.mul(&t.mul(s, &m.base_images[i]), &t.inv(s));
                let rhs = m.apply(&source.alpha_element(&source.generator(i), 1));
                if lhs != rhs {
                    return Err(GroupError::Relation(format!("twist relation at generator {i}")));
                }
            }
        }
        for i in 0..source.rank() {
            if t.w_of(&m.base_images[i]) != source.w[i] {
                return Err(GroupError::Relation(format!("orientation character at generator {i}")));
            }
        }
        if let Some(s) = &m.stable_image {
            if t.w_of(s) != source.w_stable() {
                return Err(GroupError::Relation("orientation character at the stable letter".into()));
            }
        }
        Ok(m)
    }

    pub fn identity(g: &Arc<GroupSpec>) -> Self {
        let imgs = (0..g.rank()).map(|i| g.generator(i)).collect();
        GroupMorphism { source: g.clone(), target: g.clone(), base_images: imgs, stable_image: g.stable() }
    }

    /// The inclusion of the base into a twisted group.
    pub fn base_inclusion(twisted: &Arc<GroupSpec>) -> Result<Self, GroupError> {
        let base = Arc::new(twisted.base());
        let imgs = (0..base.rank()).map(|i| twisted.generator(i)).collect();
        GroupMorphism::new(base, twisted.clone(), imgs, None)
    }

    /// Automorphism of an untwisted abelian group given by an exponent matrix.
    pub fn from_matrix(g: &Arc<GroupSpec>, alpha: &[Vec<i64>]) -> Result<Self, GroupError> {
        let imgs = alpha.iter().map(|row| g.element(row.clone(), 0)).collect::<Result<Vec<_>, _>>()?;
        GroupMorphism::new(g.clone(), g.clone(), imgs, None)
    }

    pub fn source(&self) -> &Arc<GroupSpec> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GroupSpec> {
        &self.target
    }

    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        let t = &self.target;
        let mut acc = t.identity();
        for (e, img) in g.exps.iter().zip(&self.base_images) {
            if *e != 0 {
                acc = t.mul(&acc, &t.pow(img, *e));
            }
        }
        if g.t != 0 {
            let s = self.stable_image.as_ref().expect("validated twisted source");
            acc = t.mul(&acc, &t.pow(s, g.t));
        }
        acc
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GroupMorphism) -> Result<GroupMorphism, GroupError> {
        if *self.target != *next.source {
            return Err(GroupError::Relation("composition of morphisms with mismatched groups".into()));
        }
        Ok(GroupMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            base_images: self.base_images.iter().map(|g| next.apply(g)).collect(),
            stable_image: self.stable_image.as_ref().map(|g| next.apply(g)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_arithmetic() {
        let g = GroupSpec::cyclic(5);
        let t = g.generator(0);
        assert_eq!(g.pow(&t, 5), g.identity());
        assert_eq!(g.pow(&t, -1), g.pow(&t, 4));
        assert_eq!(g.mul(&t, &g.inv(&t)), g.identity());
    }

    #[test]
    fn semidirect_relation_holds() {
        let g = GroupSpec::cyclic(5).semidirect(vec![vec![2]], "s", 1).unwrap();
        let a = g.generator(0);
        let s = g.stable().unwrap();
        let conj = g.mul(&g.mul(&s, &a), &g.inv(&s));
        assert_eq!(conj, g.pow(&a, 2));
        let back = g.mul(&g.mul(&g.inv(&s), &a), &s);
        assert_eq!(back, g.pow(&a, 3));
        for x in [&a, &s, &g.mul(&a, &s)] {
            assert_eq!(g.mul(x, &g.inv(x)), g.identity());
        }
    }

    #[test]
    fn free_twist_inverse() {
        let g = GroupSpec::free_abelian(2).semidirect(vec![vec![2, 1], vec![1, 1]], "s", 1).unwrap();
        let x = g.element(vec![3, -2], 0).unwrap();
        assert_eq!(g.alpha_pow(&g.alpha_pow(x.exponents(), 1), -1), x.exponents());
    }

    #[test]
    fn bad_alpha_rejected() {
        assert!(GroupSpec::cyclic(5).semidirect(vec![vec![0]], "s", 1).is_err());
        assert!(GroupSpec::cyclic(4).semidirect(vec![vec![2]], "s", 1).is_err());
    }

    #[test]
    fn inverses_stay_reduced_in_twisted_groups() {
        let g = GroupSpec::cyclic(5).semidirect(vec![vec![1]], "s", 1).unwrap();
        let x = g.generator(0);
        let xi = g.inv(&x);
        assert!(g.contains(&xi));
        assert_eq!(xi.exponents(), &[4]);
    }

    #[test]
    fn stable_name_must_be_fresh() {
        assert!(matches!(
            GroupSpec::cyclic(5).semidirect(vec![vec![1]], "t", 1),
            Err(GroupError::DuplicateName(_))
        ));
    }

    #[test]
    fn w_must_match_order() {
        assert!(GroupSpec::cyclic(5).with_w(vec![-1]).is_err());
        assert!(GroupSpec::cyclic(2).with_w(vec![-1]).is_ok());
    }

    #[test]
    fn product_embeddings_commute() {
        let a = Arc::new(GroupSpec::cyclic(5).semidirect(vec![vec![2]], "s", 1).unwrap());
        let b = Arc::new(GroupSpec::cyclic(3));
        let (p, ia, ib) = GroupSpec::product(&a, &b).unwrap();
        let x = ia.apply(&a.stable().unwrap());
        let y = ib.apply(&b.generator(0));
        assert_eq!(p.mul(&x, &y), p.mul(&y, &x));
        assert!(p.is_twisted());
    }

    #[test]
    fn morphism_relations_checked() {
        let g = Arc::new(GroupSpec::cyclic(5));
        let bad = GroupMorphism::new(g.clone(), g.clone(), vec![g.identity()], None);
        assert!(bad.is_ok());
        let z = Arc::new(GroupSpec::infinite_cyclic());
        let into_z = GroupMorphism::new(g.clone(), z.clone(), vec![z.generator(0)], None);
        assert!(into_z.is_err());
        let sq = GroupMorphism::from_matrix(&g, &[vec![2]]).unwrap();
        let comp = sq.then(&sq).unwrap();
        assert_eq!(comp.apply(&g.generator(0)), g.pow(&g.generator(0), 4));
    }
}
