//! Manifest files: a chart, its metric, named fields, sample points and the
//! checks to run, in TOML.
//!
//! ```toml
//! schema = 1
//! name = "s2_round"
//! description = "unit 2-sphere"
//!
//! [chart]
//! coords = ["th", "ph"]
//!
//! [metric]            # "i,j" keys, either triangle, omitted entries are 0
//! "th,th" = "1"
//! "ph,ph" = "sin(th)^2"
//!
//! [fields.b]          # kind: sym2 | tensor2 | covector
//! kind = "sym2"
//! components = { "th,th" = "2", "ph,ph" = "2*sin(th)^2" }
//!
//! [[points]]
//! name = "p1"
//! at = [0.7, 0.3]
//!
//! [[grids]]           # cartesian product of per-axis ranges
//! axes = [{ min = 0.5, max = 2.5, count = 3 }, { min = 0.0, max = 6.0, count = 2 }]
//!
//! [[checks]]
//! kind = "codazzi"
//! b = "b"             # field bindings by role
//! tol = 1e-8          # optional
//! expect = "pass"     # or "fail" for negative fixtures
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::geometry::{ChartManifold, FieldKind, RICCI, SCHOUTEN};

pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on the number of points a single grid may expand to.
pub const MAX_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Engine self-consistency: ∇g, Riemann symmetries, Bianchi identities.
    Engine,
    /// Ricci identity for a two-index field.
    Commutator,
    Codazzi,
    GaugedCodazzi,
    Recurrent,
    WeaklySymmetric,
    Closedness,
    Harmonic,
    WeylForm,
    CyclicIdentity,
    FourTerm,
    KSymmetries,
    Invariance,
    ProofTrace,
}

impl CheckKind {
    pub const ALL: [CheckKind; 14] = [
        CheckKind::Engine,
        CheckKind::Commutator,
        CheckKind::Codazzi,
        CheckKind::GaugedCodazzi,
        CheckKind::Recurrent,
        CheckKind::WeaklySymmetric,
        CheckKind::Closedness,
        CheckKind::Harmonic,
        CheckKind::WeylForm,
        CheckKind::CyclicIdentity,
        CheckKind::FourTerm,
        CheckKind::KSymmetries,
        CheckKind::Invariance,
        CheckKind::ProofTrace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Engine => "engine",
            CheckKind::Commutator => "commutator",
            CheckKind::Codazzi => "codazzi",
            CheckKind::GaugedCodazzi => "gauged_codazzi",
            CheckKind::Recurrent => "recurrent",
            CheckKind::WeaklySymmetric => "weakly_symmetric",
            CheckKind::Closedness => "closedness",
            CheckKind::Harmonic => "harmonic",
            CheckKind::WeylForm => "weyl_form",
            CheckKind::CyclicIdentity => "cyclic_identity",
            CheckKind::FourTerm => "four_term",
            CheckKind::KSymmetries => "k_symmetries",
            CheckKind::Invariance => "invariance",
            CheckKind::ProofTrace => "proof_trace",
        }
    }

    /// Binding roles and the field kinds each accepts.
    pub fn roles(self) -> &'static [(Role, &'static [FieldKind])] {
        use FieldKind::*;
        const SYM: &[FieldKind] = &[Sym2];
        const TWO: &[FieldKind] = &[Sym2, Tensor2];
        const CO: &[FieldKind] = &[Covector];
        match self {
            CheckKind::Engine | CheckKind::Harmonic | CheckKind::WeylForm => &[],
            CheckKind::Commutator => &[(Role::B, TWO)],
            CheckKind::Codazzi
            | CheckKind::CyclicIdentity
            | CheckKind::FourTerm
            | CheckKind::KSymmetries
            | CheckKind::Invariance
            | CheckKind::ProofTrace => &[(Role::B, SYM)],
            CheckKind::GaugedCodazzi => &[(Role::B, SYM), (Role::Beta, CO)],
            CheckKind::Recurrent => &[(Role::B, TWO), (Role::Beta, CO)],
            CheckKind::WeaklySymmetric => &[(Role::B, SYM), (Role::A, CO), (Role::BForm, CO), (Role::D, CO)],
            CheckKind::Closedness => &[(Role::Beta, CO)],
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A field slot of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    B,
    Beta,
    A,
    BForm,
    D,
}

impl Role {
    /// Manifest key.
    pub fn key(self) -> &'static str {
        match self {
            Role::B => "b",
            Role::Beta => "beta",
            Role::A => "A",
            Role::BForm => "B",
            Role::D => "D",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Records,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    /// Unique within the manifest; defaults to the kind name, suffixed by
    /// the bound `b` field when the kind repeats.
    pub id: String,
    pub kind: CheckKind,
    pub bindings: BTreeMap<Role, String>,
    pub tol: Option<f64>,
    pub cluster_tol: Option<f64>,
    pub expect: Expect,
}

impl CheckSpec {
    pub fn binding(&self, role: Role) -> &str {
        self.bindings
            .get(&role)
            .map(String::as_str)
            .expect("bindings are validated at load")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePoint {
    pub name: String,
    pub at: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub schema: u32,
    pub name: String,
    pub description: String,
    pub chart: ChartManifold,
    pub points: Vec<SamplePoint>,
    pub checks: Vec<CheckSpec>,
    pub format: Option<Format>,
    /// `sha256:` hex digest of the source text.
    pub digest: String,
}

// Raw serde layer. Expression strings keep their spans so errors can point
// into the file.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    schema: u32,
    name: String,
    #[serde(default)]
    description: String,
    chart: RawChart,
    metric: BTreeMap<String, Spanned<String>>,
    #[serde(default)]
    fields: BTreeMap<String, RawField>,
    #[serde(default)]
    points: Vec<SamplePoint>,
    #[serde(default)]
    grids: Vec<RawGrid>,
    #[serde(default)]
    checks: Vec<RawCheck>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    coords: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    kind: FieldKind,
    components: BTreeMap<String, Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(default)]
    name: Option<String>,
    axes: Vec<RawAxis>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    min: f64,
    max: f64,
    count: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    kind: CheckKind,
    id: Option<String>,
    b: Option<String>,
    beta: Option<String>,
    #[serde(rename = "A")]
    a: Option<String>,
    #[serde(rename = "B")]
    b_form: Option<String>,
    #[serde(rename = "D")]
    d: Option<String>,
    tol: Option<f64>,
    cluster_tol: Option<f64>,
    #[serde(default)]
    expect: Expect,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<Format>,
}

fn schema_err(path: impl fmt::Display, msg: impl fmt::Display) -> Error {
    Error::Manifest(format!("{path}: {msg}"))
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, col)
}

struct Ctx<'a> {
    origin: &'a str,
    text: &'a str,
    coords: &'a [String],
}

impl Ctx<'_> {
    fn expr(&self, key_path: &str, s: &Spanned<String>) -> Result<Expr> {
        parse_expression(s.get_ref(), self.coords).map_err(|e| {
            // the span starts at the opening quote
            let at = s.span().start + 1 + e.offset();
            let (line, col) = line_col(self.text, at);
            Error::Manifest(format!("{}:{line}:{col}: {key_path}: {e}", self.origin))
        })
    }

    fn coord(&self, key_path: &str, name: &str) -> Result<usize> {
        self.coords
            .iter()
            .position(|c| c == name.trim())
            .ok_or_else(|| schema_err(key_path, format!("unknown coordinate `{}`", name.trim())))
    }

    fn pair(&self, key_path: &str, key: &str) -> Result<(usize, usize)> {
        let mut parts = key.split(',');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => {
                let i = self.coord(key_path, a)?;
                let j = self.coord(key_path, b)?;
                Ok((i, j))
            }
            _ => Err(schema_err(key_path, "expected a key of the form \"i,j\"")),
        }
    }
}

/// Reads and validates a manifest file.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    parse_manifest(&text, &path.display().to_string())
}

/// Parses and validates manifest text. `origin` names the source in errors.
pub fn parse_manifest(text: &str, origin: &str) -> Result<Manifest> {
    let raw: RawManifest = toml::from_str(text).map_err(|e| {
        let loc = e
            .span()
            .map(|s| {
                let (l, c) = line_col(text, s.start);
                format!(":{l}:{c}")
            })
            .unwrap_or_default();
        Error::Manifest(format!("{origin}{loc}: {}", e.message()))
    })?;
    if raw.schema != SCHEMA_VERSION {
        return Err(schema_err(
            "schema",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", raw.schema),
        ));
    }

    let coords = raw.chart.coords.clone();
    if coords.is_empty() {
        return Err(schema_err("chart.coords", "at least one coordinate is required"));
    }
    for (a, c) in coords.iter().enumerate() {
        if coords[..a].contains(c) {
            return Err(schema_err("chart.coords", format!("duplicate coordinate `{c}`")));
        }
    }
    let ctx = Ctx {
        origin,
        text,
        coords: &coords,
    };
    let n = coords.len();

    let mut metric: BTreeMap<(usize, usize), Expr> = BTreeMap::new();
    for (key, value) in &raw.metric {
        let kp = format!("metric.\"{key}\"");
        let (i, j) = ctx.pair(&kp, key)?;
        let e = ctx.expr(&kp, value)?;
        if metric.insert((i.min(j), i.max(j)), e).is_some() {
            return Err(schema_err(kp, "duplicate metric entry"));
        }
    }
    let mut chart = ChartManifold::new(coords.clone(), metric.into_iter().map(|((i, j), e)| (i, j, e)).collect())?;

    for (name, f) in &raw.fields {
        let base = format!("fields.{name}");
        let mut comps = vec![Expr::zero(); n.pow(f.kind.rank() as u32)];
        for (key, value) in &f.components {
            let kp = format!("{base}.components.\"{key}\"");
            let slot = match f.kind {
                FieldKind::Covector => ctx.coord(&kp, key)?,
                FieldKind::Sym2 => {
                    let (i, j) = ctx.pair(&kp, key)?;
                    i.min(j) * n + i.max(j)
                }
                FieldKind::Tensor2 => {
                    let (i, j) = ctx.pair(&kp, key)?;
                    i * n + j
                }
            };
            if !comps[slot].is_zero() {
                return Err(schema_err(kp, "duplicate component"));
            }
            comps[slot] = ctx.expr(&kp, value)?;
        }
        chart
            .add_field(name, f.kind, comps)
            .map_err(|e| schema_err(&base, e))?;
    }

    let mut points = Vec::new();
    for (a, p) in raw.points.iter().enumerate() {
        let kp = format!("points[{a}]");
        if p.at.len() != n {
            return Err(schema_err(kp, format!("`{}` has {} coordinates, chart has {n}", p.name, p.at.len())));
        }
        points.push(p.clone());
    }
    for (gi, g) in raw.grids.iter().enumerate() {
        let kp = format!("grids[{gi}]");
        if g.axes.len() != n {
            return Err(schema_err(kp, format!("{} axes, chart has {n}", g.axes.len())));
        }
        let total = g.axes.iter().try_fold(1usize, |acc, ax| acc.checked_mul(ax.count));
        match total {
            Some(t) if t > 0 && t <= MAX_GRID_POINTS => {}
            _ => return Err(schema_err(kp, format!("grid must expand to 1..={MAX_GRID_POINTS} points"))),
        }
        let label = g.name.clone().unwrap_or_else(|| format!("grid{gi}"));
        let mut idx = vec![0usize; n];
        loop {
            let at = g
                .axes
                .iter()
                .zip(&idx)
                .map(|(ax, &k)| {
                    if ax.count == 1 {
                        ax.min
                    } else {
                        ax.min + (ax.max - ax.min) * k as f64 / (ax.count - 1) as f64
                    }
                })
                .collect();
            let tag: Vec<String> = idx.iter().map(usize::to_string).collect();
            points.push(SamplePoint {
                name: format!("{label}[{}]", tag.join(",")),
                at,
            });
            // odometer over the axes, last axis fastest
            let mut d = n;
            let done = loop {
                if d == 0 {
                    break true;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < g.axes[d].count {
                    break false;
                }
                idx[d] = 0;
            };
            if done {
                break;
            }
        }
    }
    if points.is_empty() {
        return Err(schema_err("points", "no sample points declared"));
    }
    for (a, p) in points.iter().enumerate() {
        if points[..a].iter().any(|q| q.name == p.name) {
            return Err(schema_err("points", format!("duplicate point name `{}`", p.name)));
        }
        chart
            .validate_point(&p.at)
            .map_err(|e| schema_err(format!("point `{}`", p.name), e))?;
    }

    let field_kind = |name: &str| -> Option<FieldKind> {
        match chart.fields().get(name) {
            Some(f) => Some(f.kind),
            None if name == RICCI || name == SCHOUTEN => Some(FieldKind::Sym2),
            None => None,
        }
    };
    let mut checks: Vec<CheckSpec> = Vec::new();
    for (ci, c) in raw.checks.iter().enumerate() {
        let label = c.id.clone().unwrap_or_else(|| format!("#{ci} ({})", c.kind));
        let kp = format!("checks[{ci}] `{label}`");
        let given = [
            (Role::B, &c.b),
            (Role::Beta, &c.beta),
            (Role::A, &c.a),
            (Role::BForm, &c.b_form),
            (Role::D, &c.d),
        ];
        let roles = c.kind.roles();
        let mut bindings = BTreeMap::new();
        for (role, value) in given {
            let Some(field) = value else { continue };
            let Some((_, kinds)) = roles.iter().find(|(r, _)| *r == role) else {
                return Err(schema_err(&kp, format!("`{}` does not take a `{}` binding", c.kind, role.key())));
            };
            let Some(found) = field_kind(field) else {
                return Err(schema_err(&kp, format!("`{}` binds undeclared field `{field}`", role.key())));
            };
            if !kinds.contains(&found) {
                let expected: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
                return Err(schema_err(
                    &kp,
                    format!(
                        "`{}` = `{field}` is {}, expected {}",
                        role.key(),
                        found.name(),
                        expected.join(" or ")
                    ),
                ));
            }
            bindings.insert(role, field.clone());
        }
        for (role, _) in roles {
            if !bindings.contains_key(role) {
                return Err(schema_err(&kp, format!("missing binding `{}`", role.key())));
            }
        }
        if c.kind == CheckKind::WeylForm && n < 4 {
            return Err(schema_err(&kp, format!("weyl_form requires dimension >= 4, chart has {n}")));
        }
        for (key, v) in [("tol", c.tol), ("cluster_tol", c.cluster_tol)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(schema_err(&kp, format!("`{key}` must be positive")));
                }
            }
        }
        if c.cluster_tol.is_some() && c.kind != CheckKind::Invariance && c.kind != CheckKind::ProofTrace {
            return Err(schema_err(&kp, "`cluster_tol` applies to invariance and proof_trace only"));
        }
        let id = match &c.id {
            Some(id) => id.clone(),
            None => match bindings.get(&Role::B).or_else(|| bindings.get(&Role::Beta)) {
                Some(f) => format!("{}:{f}", c.kind),
                None => c.kind.to_string(),
            },
        };
        if checks.iter().any(|k| k.id == id) {
            return Err(schema_err(&kp, format!("duplicate check id `{id}`")));
        }
        checks.push(CheckSpec {
            id,
            kind: c.kind,
            bindings,
            tol: c.tol,
            cluster_tol: c.cluster_tol,
            expect: c.expect,
        });
    }

    let digest = Sha256::digest(text.as_bytes());
    let digest = format!(
        "sha256:{}",
        digest.iter().map(|b| format!("{b:02x}")).collect::<String>()
    );

    Ok(Manifest {
        schema: raw.schema,
        name: raw.name,
        description: raw.description,
        chart,
        points,
        checks,
        format: raw.output.format,
        digest,
    })
}
