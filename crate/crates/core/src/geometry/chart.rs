use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::jet::JetAlgebra;
use crate::error::{Error, Result};
use crate::expr::{parse_expression, DerivativeTable, Expr};

/// Metric derivatives are carried to this order. Four is what the
/// second covariant derivative of the Ricci tensor needs.
pub const METRIC_JET_ORDER: usize = 4;

/// User fields need `b`, `d b` and `dd b` for the commutator check.
pub const FIELD_JET_ORDER: usize = 2;

/// Points whose smallest metric eigenvalue falls below this (relative to
/// `1 + largest`) are treated as chart singularities.
pub const SINGULAR_POINT_THRESHOLD: f64 = 1e-6;

/// Reciprocal condition number below which the metric is not inverted.
pub const SINGULAR_METRIC_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// Symmetric (0,2) tensor.
    Sym2,
    /// General (0,2) tensor; only accepted by the recurrence check.
    Tensor2,
    Covector,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Sym2 => "sym2",
            FieldKind::Tensor2 => "tensor2",
            FieldKind::Covector => "covector",
        }
    }

    pub fn rank(self) -> usize {
        match self {
            FieldKind::Covector => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FieldDef {
    pub kind: FieldKind,
    /// Row-major components (`n` for a covector, `n*n` otherwise).
    pub components: Vec<Expr>,
    pub(crate) tables: Vec<DerivativeTable>,
}

/// A coordinate chart carrying a Riemannian metric and named tensor fields.
#[derive(Debug, Clone)]
pub struct ChartManifold {
    coords: Vec<String>,
    metric: Vec<Expr>,
    pub(crate) metric_tables: Vec<DerivativeTable>,
    fields: BTreeMap<String, FieldDef>,
    pub(crate) algebra: JetAlgebra,
}

impl ChartManifold {
    /// `metric` holds upper-triangle entries `(i, j, expr)` with `i <= j`;
    /// missing entries are zero.
    pub fn new(coords: Vec<String>, metric: Vec<(usize, usize, Expr)>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::Dimension {
                what: "a chart",
                needed: 2,
                found: n,
            });
        }
        for (a, name) in coords.iter().enumerate() {
            if coords[..a].contains(name) {
                return Err(Error::Chart(format!("duplicate coordinate `{name}`")));
            }
        }
        let mut full = vec![Expr::zero(); n * n];
        let mut seen = vec![false; n * n];
        for (i, j, e) in metric {
            let (i, j) = (i.min(j), i.max(j));
            if j >= n {
                return Err(Error::Chart(format!("metric index ({i},{j}) out of range")));
            }
            if seen[i * n + j] {
                return Err(Error::Chart(format!(
                    "metric entry ({},{}) given twice",
                    coords[i], coords[j]
                )));
            }
            check_vars(&e, n)?;
            seen[i * n + j] = true;
            full[i * n + j] = e.clone();
            full[j * n + i] = e;
        }
        let metric_tables = full
            .iter()
            .map(|e| DerivativeTable::new(e, n, METRIC_JET_ORDER))
            .collect();
        Ok(ChartManifold {
            algebra: JetAlgebra::new(n, METRIC_JET_ORDER),
            coords,
            metric: full,
            metric_tables,
            fields: BTreeMap::new(),
        })
    }

    /// Convenience constructor from expression text.
    pub fn parse(coords: &[&str], metric: &[(&str, &str, &str)]) -> Result<Self> {
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let mut entries = Vec::new();
        for (a, b, text) in metric {
            let i = coord_index(&coords, a)?;
            let j = coord_index(&coords, b)?;
            entries.push((i, j, parse_text(text, &coords)?));
        }
        ChartManifold::new(coords, entries)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn metric(&self, i: usize, j: usize) -> &Expr {
        &self.metric[i * self.dim() + j]
    }

    pub fn fields(&self) -> &BTreeMap<String, FieldDef> {
        &self.fields
    }

    pub fn field(&self, name: &str) -> Result<&FieldDef> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::UnknownField(name.to_string()))
    }

    /// Declares a field. Symmetric fields are given by their upper triangle
    /// (lower entries in `components` are ignored and mirrored).
    pub fn add_field(&mut self, name: &str, kind: FieldKind, components: Vec<Expr>) -> Result<()> {
        let n = self.dim();
        let expected = n.pow(kind.rank() as u32);
        if components.len() != expected {
            return Err(Error::Chart(format!(
                "field `{name}` has {} components, expected {expected}",
                components.len()
            )));
        }
        for e in &components {
            check_vars(e, n)?;
        }
        let mut components = components;
        if kind == FieldKind::Sym2 {
            for i in 0..n {
                for j in 0..i {
                    components[i * n + j] = components[j * n + i].clone();
                }
            }
        }
        let tables = components
            .iter()
            .map(|e| DerivativeTable::new(e, n, FIELD_JET_ORDER))
            .collect();
        self.fields.insert(
            name.to_string(),
            FieldDef {
                kind,
                components,
                tables,
            },
        );
        Ok(())
    }

    /// Parses and declares a symmetric field from upper-triangle text entries.
    pub fn add_sym2(&mut self, name: &str, entries: &[(&str, &str, &str)]) -> Result<()> {
        let n = self.dim();
        let mut comps = vec![Expr::zero(); n * n];
        for (a, b, text) in entries {
            let i = coord_index(&self.coords, a)?;
            let j = coord_index(&self.coords, b)?;
            comps[i.min(j) * n + i.max(j)] = parse_text(text, &self.coords)?;
        }
        self.add_field(name, FieldKind::Sym2, comps)
    }

    /// Parses and declares a covector field.
    pub fn add_covector(&mut self, name: &str, components: &[&str]) -> Result<()> {
        let comps = components
            .iter()
            .map(|t| parse_text(t, &self.coords))
            .collect::<Result<Vec<_>>>()?;
        self.add_field(name, FieldKind::Covector, comps)
    }

    /// Evaluated metric matrix at `point`.
    pub fn metric_at(&self, point: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let n = self.dim();
        if point.len() != n {
            return Err(Error::PointLength {
                expected: n,
                found: point.len(),
            });
        }
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.metric(i, j).eval_named(point, &self.coords)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    /// Load-time validation of a sample point: the metric evaluates, is
    /// positive definite and is not within the singular-point threshold.
    pub fn validate_point(&self, point: &[f64]) -> Result<()> {
        let g = self.metric_at(point)?;
        let eig = SymmetricEigen::new(g).eigenvalues;
        let min = eig.min();
        let max = eig.max();
        let band = SINGULAR_POINT_THRESHOLD * (1.0 + max.abs());
        if min < -band {
            return Err(Error::NotPositiveDefinite {
                point: point.to_vec(),
                min_eigenvalue: min,
            });
        }
        if min <= band {
            return Err(Error::NearSingularPoint {
                point: point.to_vec(),
                min_eigenvalue: min,
                threshold: SINGULAR_POINT_THRESHOLD,
            });
        }
        Ok(())
    }
}

fn coord_index(coords: &[String], name: &str) -> Result<usize> {
    coords
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| Error::Chart(format!("unknown coordinate `{name}`")))
}

fn parse_text(text: &str, coords: &[String]) -> Result<Expr> {
    parse_expression(text, coords).map_err(|source| Error::Parse {
        text: text.to_string(),
        source,
    })
}

fn check_vars(e: &Expr, n: usize) -> Result<()> {
    match e.max_var() {
        Some(v) if v >= n => Err(Error::Chart(format!(
            "expression references coordinate #{v} in a {n}-dimensional chart"
        ))),
        _ => Ok(()),
    }
}
