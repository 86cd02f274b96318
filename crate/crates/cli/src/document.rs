//! Model documents: TOML files declaring a group, complexes, chain maps,
//! Poincaré pairs and a list of tasks. Everything is resolved and validated
//! when the document is loaded, so running a task never meets a dangling name.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use wh_core::chain::{BasedChainComplex, ChainMap};
use wh_core::group::GroupSpec;
use wh_core::matrix::GRMatrix;
use wh_core::poincare::{self, PoincarePair};
use wh_core::ring::GroupRingElement;
use wh_core::whitehead::TorsionClass;

use crate::error::CliError;
use crate::literal::{parse_element, LiteralError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    group: Option<RawGroup>,
    #[serde(default)]
    complexes: BTreeMap<String, RawComplex>,
    #[serde(default)]
    maps: BTreeMap<String, RawMap>,
    #[serde(default)]
    pairs: BTreeMap<String, RawPair>,
    #[serde(default)]
    tasks: Vec<RawTask>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    #[serde(default)]
    orders: Vec<u64>,
    names: Option<Vec<String>>,
    w: Option<Vec<i8>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComplex {
    builtin: Option<String>,
    ranks: Option<Vec<usize>>,
    #[serde(default)]
    d: Vec<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    source: String,
    target: String,
    components: Vec<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    builtin: Option<String>,
    complex: Option<String>,
    dim: Option<i64>,
    #[serde(default)]
    boundary: Vec<Vec<usize>>,
    boundary_pair: Option<String>,
    cap: Option<Vec<RawMatrix>>,
}

/// A matrix entry: an integer or an element literal.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

type RawMatrix = Vec<Vec<Entry>>;

/// A torsion class given by a single unit literal or by a square matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ClassSpec {
    Unit(String),
    Matrix(RawMatrix),
}

#[derive(Debug, Deserialize)]
struct RawTask {
    name: Option<String>,
    #[serde(flatten)]
    spec: TaskSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TaskSpec {
    Torsion { map: String },
    Acyclic { complex: String },
    Invariants { class: ClassSpec },
    Theta { generators: Vec<ThetaGenerator> },
    Rho { pair: String },
    Involution { pair: String },
    RhoHat { pair: String, witness: Option<ClassSpec> },
    PairGlue { x: String, y: String, twist: Option<String> },
    PairProduct { x: String, y: String },
    LensEquivalence { source: String, target: String },
    Glue { tau_w: ClassSpec, dim: i64, phi: Option<Vec<Vec<i64>>> },
    S1 { alpha: Vec<Vec<i64>>, units: Vec<Vec<Entry>>, change: Option<Vec<Vec<Entry>>> },
    Transfer { alpha: Vec<Vec<i64>>, units: Vec<Vec<Entry>>, change: Option<Vec<Vec<Entry>>>, fiber: String, sigma: Option<Vec<Vec<Entry>>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGenerator {
    pub name: String,
    pub class: ClassSpec,
    pub order: Option<u64>,
}

impl TaskSpec {
    pub fn op(&self) -> &'static str {
        match self {
            TaskSpec::Torsion { .. } => "torsion",
            TaskSpec::Acyclic { .. } => "acyclic",
            TaskSpec::Invariants { .. } => "invariants",
            TaskSpec::Theta { .. } => "theta",
            TaskSpec::Rho { .. } => "rho",
            TaskSpec::Involution { .. } => "involution",
            TaskSpec::RhoHat { .. } => "rho_hat",
            TaskSpec::PairGlue { .. } => "pair_glue",
            TaskSpec::PairProduct { .. } => "pair_product",
            TaskSpec::LensEquivalence { .. } => "lens_equivalence",
            TaskSpec::Glue { .. } => "glue",
            TaskSpec::S1 { .. } => "s1",
            TaskSpec::Transfer { .. } => "transfer",
        }
    }

    /// The subcommand under which this task runs.
    pub fn command(&self) -> &'static str {
        match self {
            TaskSpec::Torsion { .. } | TaskSpec::Acyclic { .. } => "torsion",
            TaskSpec::Invariants { .. } => "invariants",
            TaskSpec::Rho { .. }
            | TaskSpec::Involution { .. }
            | TaskSpec::RhoHat { .. }
            | TaskSpec::PairGlue { .. }
            | TaskSpec::PairProduct { .. }
            | TaskSpec::LensEquivalence { .. } => "rho",
            TaskSpec::Glue { .. } => "glue",
            TaskSpec::S1 { .. } | TaskSpec::Theta { .. } => "s1",
            TaskSpec::Transfer { .. } => "transfer",
        }
    }
}

/// A task with every reference resolved.
#[derive(Clone, Debug)]
pub enum Resolved {
    Torsion(ChainMap),
    Acyclic(BasedChainComplex),
    Invariants(TorsionClass),
    Theta(Vec<(String, TorsionClass, Option<u64>)>),
    Rho(PoincarePair),
    Involution(PoincarePair),
    RhoHat(PoincarePair, Option<TorsionClass>),
    PairGlue { x: PoincarePair, y: PoincarePair, twist: GroupRingElement },
    PairProduct(PoincarePair, PoincarePair),
    LensEquivalence(PoincarePair, PoincarePair),
    Glue { tau_w: TorsionClass, dim: i64, phi: Vec<Vec<i64>> },
    S1(FiberSpec),
    Transfer { model: FiberSpec, fiber: String, sigma: Option<Vec<Vec<GroupRingElement>>> },
}

/// Diagonal mapping torus data over `G x_alpha Z`.
#[derive(Clone, Debug)]
pub struct FiberSpec {
    pub group: Arc<GroupSpec>,
    pub units: Vec<Vec<GroupRingElement>>,
    pub change: Option<Vec<Vec<GroupRingElement>>>,
}

#[derive(Clone, Debug)]
pub struct Task {
    pub name: String,
    pub spec: TaskSpec,
    pub resolved: Resolved,
    pub digest: String,
}

#[derive(Clone, Debug)]
pub struct Document {
    pub group: Arc<GroupSpec>,
    pub complexes: BTreeMap<String, BasedChainComplex>,
    pub maps: BTreeMap<String, ChainMap>,
    pub pairs: BTreeMap<String, PoincarePair>,
    pub tasks: Vec<Task>,
    pub digest: String,
}

pub fn digest(text: &str) -> String {
    let h = Sha256::digest(text.as_bytes());
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map(|s| s.chars().count()).unwrap_or(0) + 1;
    (line, col)
}

fn literal_error(at: &str, e: LiteralError) -> CliError {
    match e {
        LiteralError::Syntax { .. } => CliError::Syntax(format!("{at}: {e}")),
        LiteralError::UnknownGenerator { .. } => CliError::Unresolved(format!("{at}: {e}")),
    }
}

fn entry(g: &Arc<GroupSpec>, e: &Entry, at: &str) -> Result<GroupRingElement, CliError> {
    match e {
        Entry::Int(n) => Ok(GroupRingElement::from_int(g, *n)),
        Entry::Text(s) => parse_element(g, s).map_err(|err| literal_error(at, err)),
    }
}

fn matrix(g: &Arc<GroupSpec>, m: &RawMatrix, rows: usize, cols: usize, at: &str) -> Result<GRMatrix, CliError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        let got_cols = m.first().map(|r| r.len()).unwrap_or(0);
        return Err(CliError::Invariant(format!("{at}: expected a {rows}x{cols} matrix, got {}x{got_cols}", m.len())));
    }
    let mut out = GRMatrix::gr_zeros(rows, cols, g);
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out.set(i, j, entry(g, e, &format!("{at}[{i}][{j}]"))?);
        }
    }
    Ok(out)
}

/// Square matrix of unknown size.
fn square(g: &Arc<GroupSpec>, m: &RawMatrix, at: &str) -> Result<GRMatrix, CliError> {
    matrix(g, m, m.len(), m.len(), at)
}

pub fn class(g: &Arc<GroupSpec>, c: &ClassSpec, at: &str) -> Result<TorsionClass, CliError> {
    match c {
        ClassSpec::Unit(s) => {
            let u = parse_element(g, s).map_err(|e| literal_error(at, e))?;
            TorsionClass::from_unit(&u).map_err(|e| CliError::Invariant(format!("{at}: {u}: {e}")))
        }
        ClassSpec::Matrix(m) => {
            let a = square(g, m, at)?;
            TorsionClass::from_matrix(a).map_err(|e| CliError::Invariant(format!("{at}: {e}")))
        }
    }
}

fn units(g: &Arc<GroupSpec>, rows: &[Vec<Entry>], at: &str) -> Result<Vec<Vec<GroupRingElement>>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            r.iter()
                .enumerate()
                .map(|(i, e)| {
                    let at = format!("{at}[{k}][{i}]");
                    let u = entry(g, e, &at)?;
                    if u.inverse().is_none() {
                        return Err(CliError::Invariant(format!("{at}: {u} is not a certified unit")));
                    }
                    Ok(u)
                })
                .collect()
        })
        .collect()
}

/// Parsed builtin expression `name(arg; arg, arg; ...)`.
struct Builtin<'a> {
    name: &'a str,
    args: Vec<&'a str>,
}

fn split_builtin(text: &str) -> Result<Builtin<'_>, CliError> {
    let text = text.trim();
    let Some(open) = text.find('(') else {
        return Ok(Builtin { name: text, args: vec![] });
    };
    if !text.ends_with(')') {
        return Err(CliError::Syntax(format!("builtin `{text}`: missing `)`")));
    }
    let args = text[open + 1..text.len() - 1].split(';').map(str::trim).filter(|a| !a.is_empty()).collect();
    Ok(Builtin { name: text[..open].trim(), args })
}

fn int_arg<T: std::str::FromStr>(b: &Builtin, i: usize, what: &str) -> Result<T, CliError> {
    b.args
        .get(i)
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| CliError::Syntax(format!("builtin `{}`: expected {what} as argument {}", b.name, i + 1)))
}

fn core_error(at: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Invariant(format!("{at}: {e}"))
}

/// Resolves a builtin pair expression over the document group where it
/// applies (spheres, discs and their twisted versions).
pub fn builtin_pair(group: &Arc<GroupSpec>, text: &str) -> Result<PoincarePair, CliError> {
    let b = split_builtin(text)?;
    let at = format!("builtin `{text}`");
    let arity = |n: usize| -> Result<(), CliError> {
        if b.args.len() == n {
            Ok(())
        } else {
            Err(CliError::Syntax(format!("{at}: expected {n} arguments, got {}", b.args.len())))
        }
    };
    let p = match b.name {
        "sphere" => {
            arity(1)?;
            poincare::sphere_over(group, int_arg(&b, 0, "a dimension")?)
        }
        "disc" => {
            arity(1)?;
            poincare::disc_over(group, int_arg(&b, 0, "a dimension")?)
        }
        "torus" => {
            arity(0)?;
            poincare::torus()
        }
        "lens" => {
            arity(2)?;
            let n: u64 = int_arg(&b, 0, "an order")?;
            let qs = b.args[1]
                .split(',')
                .map(|q| q.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Syntax(format!("{at}: rotation numbers must be integers")))?;
            poincare::lens(n, &qs)
        }
        "twisted_sphere" => {
            arity(3)?;
            let a = parse_element(group, b.args[1]).map_err(|e| literal_error(&at, e))?;
            let c = parse_element(group, b.args[2]).map_err(|e| literal_error(&at, e))?;
            poincare::twisted_sphere(group, int_arg(&b, 0, "a dimension")?, &a, &c)
        }
        "twisted_disc" => {
            arity(2)?;
            let u = parse_element(group, b.args[1]).map_err(|e| literal_error(&at, e))?;
            poincare::twisted_disc(group, int_arg(&b, 0, "a dimension")?, &u)
        }
        other => return Err(CliError::Unresolved(format!("{at}: unknown builtin `{other}`"))),
    };
    p.map_err(|e| core_error(&at, e))
}

fn looks_like_builtin(s: &str) -> bool {
    s.contains('(') || s == "torus"
}

struct Resolver<'a> {
    group: Arc<GroupSpec>,
    raw: &'a RawDocument,
    complexes: BTreeMap<String, BasedChainComplex>,
    maps: BTreeMap<String, ChainMap>,
    pairs: BTreeMap<String, PoincarePair>,
}

impl Resolver<'_> {
    fn complex(&self, name: &str, at: &str) -> Result<BasedChainComplex, CliError> {
        if let Some(c) = self.complexes.get(name) {
            return Ok(c.clone());
        }
        if looks_like_builtin(name) {
            return Ok(builtin_pair(&self.group, name)?.complex);
        }
        Err(CliError::Unresolved(format!("{at}: no complex named `{name}`")))
    }

    fn pair(&self, name: &str, at: &str) -> Result<PoincarePair, CliError> {
        if let Some(p) = self.pairs.get(name) {
            return Ok(p.clone());
        }
        if looks_like_builtin(name) {
            return builtin_pair(&self.group, name);
        }
        Err(CliError::Unresolved(format!("{at}: no pair named `{name}`")))
    }

    fn map(&self, name: &str, at: &str) -> Result<ChainMap, CliError> {
        self.maps.get(name).cloned().ok_or_else(|| CliError::Unresolved(format!("{at}: no map named `{name}`")))
    }

    fn twisted_group(&self, alpha: &[Vec<i64>], at: &str) -> Result<Arc<GroupSpec>, CliError> {
        let mut stable = String::from("s");
        while self.group.names().contains(&stable) {
            stable.push('\'');
        }
        (*self.group)
            .clone()
            .semidirect(alpha.to_vec(), &stable, 1)
            .map(Arc::new)
            .map_err(|e| CliError::Invariant(format!("{at}: {e}")))
    }

    fn fiber_spec(&self, alpha: &[Vec<i64>], us: &[Vec<Entry>], change: &Option<Vec<Vec<Entry>>>, at: &str) -> Result<FiberSpec, CliError> {
        let group = self.twisted_group(alpha, at)?;
        let units = units(&group, us, &format!("{at}.units"))?;
        let change = change.as_ref().map(|c| self::units(&group, c, &format!("{at}.change"))).transpose()?;
        if let Some(c) = &change {
            let expected = units.len() + 1;
            if c.len() != expected || c.iter().enumerate().any(|(k, r)| r.len() != units.get(k).map_or(0, Vec::len) + if k > 0 { units[k - 1].len() } else { 0 }) {
                return Err(CliError::Invariant(format!("{at}.change: one unit per cell of the mapping torus is required")));
            }
        }
        Ok(FiberSpec { group, units, change })
    }

    fn task(&self, spec: &TaskSpec, at: &str) -> Result<Resolved, CliError> {
        let g = &self.group;
        Ok(match spec {
            TaskSpec::Torsion { map } => Resolved::Torsion(self.map(map, at)?),
            TaskSpec::Acyclic { complex } => Resolved::Acyclic(self.complex(complex, at)?),
            TaskSpec::Invariants { class: c } => Resolved::Invariants(class(g, c, &format!("{at}.class"))?),
            TaskSpec::Theta { generators } => Resolved::Theta(
                generators
                    .iter()
                    .enumerate()
                    .map(|(i, gen)| Ok((gen.name.clone(), class(g, &gen.class, &format!("{at}.generators[{i}]"))?, gen.order)))
                    .collect::<Result<_, CliError>>()?,
            ),
            TaskSpec::Rho { pair } => Resolved::Rho(self.pair(pair, at)?),
            TaskSpec::Involution { pair } => Resolved::Involution(self.pair(pair, at)?),
            TaskSpec::RhoHat { pair, witness } => {
                let p = self.pair(pair, at)?;
                let w = witness.as_ref().map(|w| class(p.group(), w, &format!("{at}.witness"))).transpose()?;
                Resolved::RhoHat(p, w)
            }
            TaskSpec::PairGlue { x, y, twist } => {
                let x = self.pair(x, at)?;
                let y = self.pair(y, at)?;
                let twist = match twist {
                    Some(t) => parse_element(x.group(), t).map_err(|e| literal_error(&format!("{at}.twist"), e))?,
                    None => GroupRingElement::one(x.group()),
                };
                Resolved::PairGlue { x, y, twist }
            }
            TaskSpec::PairProduct { x, y } => Resolved::PairProduct(self.pair(x, at)?, self.pair(y, at)?),
            TaskSpec::LensEquivalence { source, target } => Resolved::LensEquivalence(self.pair(source, at)?, self.pair(target, at)?),
            TaskSpec::Glue { tau_w, dim, phi } => {
                let phi = phi.clone().unwrap_or_else(|| (0..g.rank()).map(|i| (0..g.rank()).map(|j| i64::from(i == j)).collect()).collect());
                Resolved::Glue { tau_w: class(g, tau_w, &format!("{at}.tau_w"))?, dim: *dim, phi }
            }
            TaskSpec::S1 { alpha, units, change } => Resolved::S1(self.fiber_spec(alpha, units, change, at)?),
            TaskSpec::Transfer { alpha, units, change, fiber, sigma } => {
                let model = self.fiber_spec(alpha, units, change, at)?;
                if !["point", "circle", "sphere"].contains(&fiber.as_str()) {
                    return Err(CliError::Unresolved(format!("{at}.fiber: unknown fiber `{fiber}` (point, circle, sphere)")));
                }
                let sigma = sigma.as_ref().map(|s| self::units(&model.group, s, &format!("{at}.sigma"))).transpose()?;
                Resolved::Transfer { model, fiber: fiber.clone(), sigma }
            }
        })
    }
}

fn resolve_group(raw: &Option<RawGroup>) -> Result<Arc<GroupSpec>, CliError> {
    let Some(raw) = raw else {
        return Ok(Arc::new(GroupSpec::trivial()));
    };
    let mut g = GroupSpec::abelian(raw.orders.clone());
    if let Some(names) = &raw.names {
        g = g.with_names(names.clone()).map_err(|e| CliError::Invariant(format!("group: {e}")))?;
    }
    if let Some(w) = &raw.w {
        g = g.with_w(w.clone()).map_err(|e| CliError::Invariant(format!("group: {e}")))?;
    }
    Ok(Arc::new(g))
}

pub fn parse(text: &str) -> Result<Document, CliError> {
    let raw: RawDocument = toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| line_col(text, s.start));
        match at {
            Some((l, c)) => CliError::Syntax(format!("line {l}, column {c}: {}", e.message())),
            None => CliError::Syntax(e.message().to_string()),
        }
    })?;
    let group = resolve_group(&raw.group)?;
    let mut r = Resolver { group: group.clone(), raw: &raw, complexes: BTreeMap::new(), maps: BTreeMap::new(), pairs: BTreeMap::new() };

    for (name, c) in &r.raw.complexes {
        let at = format!("complexes.{name}");
        let complex = match (&c.builtin, &c.ranks) {
            (Some(b), None) if c.d.is_empty() => r.complex(b, &at)?,
            (None, Some(ranks)) => {
                if c.d.len() + 1 != ranks.len().max(1) {
                    return Err(CliError::Invariant(format!("{at}: {} ranks need {} differentials, got {}", ranks.len(), ranks.len().saturating_sub(1), c.d.len())));
                }
                let diffs = c
                    .d
                    .iter()
                    .enumerate()
                    .map(|(k, m)| matrix(&group, m, ranks[k + 1], ranks[k], &format!("{at}.d[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                BasedChainComplex::new(&group, ranks.clone(), diffs).map_err(|e| core_error(&at, e))?
            }
            _ => return Err(CliError::Syntax(format!("{at}: give either `builtin` or `ranks` with `d`"))),
        };
        r.complexes.insert(name.clone(), complex);
    }

    for (name, m) in &r.raw.maps {
        let at = format!("maps.{name}");
        let s = r.complex(&m.source, &at)?;
        let t = r.complex(&m.target, &at)?;
        let top = s.top().max(t.top());
        if m.components.len() as i64 != top + 1 {
            return Err(CliError::Invariant(format!("{at}: expected {} components, got {}", top + 1, m.components.len())));
        }
        let sg = s.group().clone();
        let comps = m
            .components
            .iter()
            .enumerate()
            .map(|(k, c)| matrix(&sg, c, s.rank(k as i64), t.rank(k as i64), &format!("{at}.components[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let f = ChainMap::new(&s, &t, comps).map_err(|e| core_error(&at, e))?;
        r.maps.insert(name.clone(), f);
    }

    // Pairs may refer to other pairs as boundaries; resolve in dependency order.
    let mut pending: Vec<&String> = r.raw.pairs.keys().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut next = Vec::new();
        for name in pending {
            let p = &r.raw.pairs[name];
            if let Some(b) = &p.boundary_pair {
                if !r.pairs.contains_key(b) && r.raw.pairs.contains_key(b) {
                    next.push(name);
                    continue;
                }
            }
            let pair = resolve_pair(&r, name, p)?;
            r.pairs.insert(name.clone(), pair);
        }
        if next.len() == before {
            return Err(CliError::Unresolved(format!("pairs.{}: boundary pairs form a cycle", next[0])));
        }
        pending = next;
    }

    let mut tasks = Vec::new();
    for (i, t) in r.raw.tasks.iter().enumerate() {
        let at = format!("tasks[{i}]");
        let resolved = r.task(&t.spec, &at)?;
        let name = t.name.clone().unwrap_or_else(|| format!("{}#{i}", t.spec.op()));
        let digest = digest(&format!("{:?}", t.spec));
        tasks.push(Task { name, spec: t.spec.clone(), resolved, digest });
    }
    let Resolver { complexes, maps, pairs, .. } = r;
    Ok(Document { group, complexes, maps, pairs, tasks, digest: digest(text) })
}

fn resolve_pair(r: &Resolver, name: &str, p: &RawPair) -> Result<PoincarePair, CliError> {
    let at = format!("pairs.{name}");
    if let Some(b) = &p.builtin {
        if p.complex.is_some() || p.cap.is_some() {
            return Err(CliError::Syntax(format!("{at}: a builtin pair takes no other fields")));
        }
        return builtin_pair(&r.group, b);
    }
    let (Some(cname), Some(dim), Some(cap)) = (&p.complex, p.dim, &p.cap) else {
        return Err(CliError::Syntax(format!("{at}: give `builtin`, or `complex`, `dim` and `cap`")));
    };
    let c = r.complex(cname, &at)?.extended_to(dim);
    let (rel, _) = c.quotient(&p.boundary).map_err(|e| core_error(&at, e))?;
    let dual = c.dual(dim);
    let g = c.group().clone();
    if cap.len() as i64 != dim + 1 {
        return Err(CliError::Invariant(format!("{at}.cap: expected {} components, got {}", dim + 1, cap.len())));
    }
    let comps = cap
        .iter()
        .enumerate()
        .map(|(k, m)| matrix(&g, m, dual.rank(k as i64), rel.rank(k as i64), &format!("{at}.cap[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let cap = ChainMap::new(&dual, &rel, comps).map_err(|e| core_error(&at, e))?;
    let bp = p.boundary_pair.as_ref().map(|b| r.pair(b, &at)).transpose()?;
    PoincarePair::new(name, dim, c, p.boundary.clone(), bp, cap).map_err(|e| core_error(&at, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_valid() {
        let d = parse("").unwrap();
        assert!(d.tasks.is_empty());
        assert_eq!(d.group.rank(), 0);
    }

    #[test]
    fn lens_builtin_matches_hand_written_complex() {
        let text = r#"
[group]
orders = [5]

[complexes.hand]
ranks = [1, 1, 1, 1]
d = [[["t - 1"]], [["1 + t + t^2 + t^3 + t^4"]], [["t - 1"]]]
"#;
        let d = parse(text).unwrap();
        let lens = builtin_pair(&d.group, "lens(5; 1,1)").unwrap();
        assert!(poincare::same_complex(&lens.complex, &d.complexes["hand"]));
    }

    #[test]
    fn dd_violation_names_the_degree() {
        let text = r#"
[group]
orders = [5]

[complexes.bad]
ranks = [1, 1, 1]
d = [[["t - 1"]], [["1"]]]
"#;
        match parse(text) {
            Err(CliError::Invariant(msg)) => assert!(msg.contains("d(2)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(parse("[group\n"), Err(CliError::Syntax(_))));
        assert!(matches!(parse("[[tasks]]\nop = \"torsion\"\nmap = \"f\"\n"), Err(CliError::Unresolved(_))));
        assert!(matches!(parse("[[tasks]]\nop = \"invariants\"\nclass = \"q\"\n"), Err(CliError::Unresolved(_))));
        assert!(matches!(parse("[[tasks]]\nop = \"invariants\"\nclass = \"1 +\"\n"), Err(CliError::Syntax(_))));
        assert!(matches!(parse("[[tasks]]\nop = \"frobnicate\"\n"), Err(CliError::Syntax(_))));
    }
}
