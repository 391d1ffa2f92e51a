//! Browser bindings for the verifier.
//!
//! Every export takes plain strings/numbers and returns a JSON string, so
//! the page needs no glue beyond `JSON.parse`. The `*_json` functions hold
//! the logic and are callable from native Rust.

use codazzi_core::catalog;
use codazzi_core::manifest::parse_manifest;
use codazzi_core::residual::Residual;
use codazzi_core::runner::{run_checks, RunOptions};
use codazzi_core::theorem as th;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn residual(r: Residual) -> Value {
    json!({ "raw": r.raw, "scale": r.scale, "normalized": r.normalized() })
}

pub fn catalog_json() -> Value {
    Value::Array(
        catalog::names()
            .map(|n| json!({ "name": n, "source": catalog::source(n).expect("listed entry") }))
            .collect(),
    )
}

/// Runs the manifest's checks. `only` is a comma-separated selector list
/// (empty for all); a non-positive `tol` means the default.
pub fn verify_json(manifest: &str, only: &str, tol: f64) -> Result<Value, String> {
    let m = parse_manifest(manifest, "editor").map_err(|e| e.to_string())?;
    let only: Vec<String> = only.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    let mut opts = RunOptions::default();
    if tol > 0.0 {
        opts.default_tol = tol;
    }
    if !only.is_empty() {
        opts.only = Some(only);
    }
    let report = run_checks(&m, &opts).map_err(|e| format!("{e:#}"))?;
    Ok(json!({
        "text": report.to_text(),
        "summary": report.summary,
        "records": report.records,
    }))
}

/// Eigenstructure of `field` relative to the metric at one sample point,
/// with the invariance contraction over admissible triples.
pub fn spectrum_json(manifest: &str, field: &str, point: usize, cluster_tol: f64) -> Result<Value, String> {
    let m = parse_manifest(manifest, "editor").map_err(|e| e.to_string())?;
    let p = m
        .points
        .get(point)
        .ok_or_else(|| format!("point index {point} out of range (manifest has {})", m.points.len()))?;
    let frame = m.chart.frame(&p.at).map_err(|e| e.to_string())?;
    let b = frame.field(field).map_err(|e| e.to_string())?;
    let ctol = if cluster_tol > 0.0 { cluster_tol } else { th::DEFAULT_CLUSTER_TOL };
    let eig = th::eigendecompose_frame(&frame, &b.value, ctol).map_err(|e| e.to_string())?;
    let inv = th::invariance_check(&frame, &eig);
    let identity = th::identity_residual(&frame, b).map_err(|e| e.to_string())?;
    Ok(json!({
        "point": p.name,
        "at": p.at,
        "scalar_curvature": frame.scalar,
        "values": eig.values,
        "clusters": eig.cluster_values(),
        "multiplicities": eig.multiplicities(),
        "identity": residual(identity),
        "invariance": {
            "contraction": residual(inv.residual),
            "witness": inv.witness,
            "admissible": inv.admissible,
            "degenerate": residual(inv.degenerate_residual),
            "degenerate_triples": inv.degenerate,
            "vacuous": inv.vacuous,
        },
    }))
}

/// The 3×3 system in three eigenvalues and its determinant, both directly
/// and in product form.
pub fn vandermonde_json(lambda: f64, mu: f64, nu: f64) -> Value {
    let v = th::vandermonde_system(lambda, mu, nu);
    json!({
        "matrix": v.matrix,
        "determinant": v.determinant,
        "factored": v.factored,
        "distinct": lambda != mu && mu != nu && lambda != nu,
    })
}

fn out(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn catalog() -> String {
    catalog_json().to_string()
}

#[wasm_bindgen]
pub fn verify(manifest: &str, only: &str, tol: f64) -> Result<String, JsValue> {
    out(verify_json(manifest, only, tol))
}

#[wasm_bindgen]
pub fn spectrum(manifest: &str, field: &str, point: usize, cluster_tol: f64) -> Result<String, JsValue> {
    out(spectrum_json(manifest, field, point, cluster_tol))
}

#[wasm_bindgen]
pub fn vandermonde(lambda: f64, mu: f64, nu: f64) -> String {
    vandermonde_json(lambda, mu, nu).to_string()
}
