//! Dispatches manifest checks to the geometry, structures and theorem
//! modules and assembles a [`VerificationReport`].

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{commutator_residual, self_test, PointFrame, CONVENTION_ID};
use crate::manifest::{CheckKind, CheckSpec, Manifest, Role, SCHEMA_VERSION};
use crate::report::{Component, Header, Record, Summary, Timing, VerificationReport};
use crate::residual::{Residual, DEFAULT_TOL};
use crate::structures as st;
use crate::theorem as th;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Check ids or kind names; `None` runs every declared check.
    pub only: Option<Vec<String>>,
    /// Tolerance for checks that do not set their own.
    pub default_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            only: None,
            default_tol: DEFAULT_TOL,
        }
    }
}

/// Checks selected by `only`, in manifest order. Every selector must match
/// at least one declared check.
pub fn select<'m>(manifest: &'m Manifest, only: Option<&[String]>) -> Result<Vec<&'m CheckSpec>> {
    let Some(only) = only else {
        return Ok(manifest.checks.iter().collect());
    };
    for s in only {
        if !manifest.checks.iter().any(|c| c.id == *s || c.kind.name() == s) {
            return Err(Error::Manifest(format!(
                "--only: `{s}` matches no declared check (declared: {})",
                manifest.checks.iter().map(|c| c.id.as_str()).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    Ok(manifest
        .checks
        .iter()
        .filter(|c| only.iter().any(|s| c.id == *s || c.kind.name() == s))
        .collect())
}

fn frame_of(manifest: &Manifest, p: &crate::manifest::SamplePoint) -> Result<PointFrame> {
    manifest.chart.frame(&p.at).map_err(|e| Error::Check {
        check: "frame".into(),
        point: p.name.clone(),
        source: Box::new(e),
    })
}

/// Frames for every sample point, computed on worker threads; the result
/// is in point order regardless of scheduling.
#[cfg(not(target_arch = "wasm32"))]
fn frames(manifest: &Manifest) -> Result<Vec<PointFrame>> {
    let pts = &manifest.points;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(pts.len()).max(1);
    let chunk = pts.len().div_ceil(workers);
    let results: Vec<Result<PointFrame>> = std::thread::scope(|s| {
        let handles: Vec<_> = pts
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|p| frame_of(manifest, p)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("frame worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

// no threads in the browser
#[cfg(target_arch = "wasm32")]
fn frames(manifest: &Manifest) -> Result<Vec<PointFrame>> {
    manifest.points.iter().map(|p| frame_of(manifest, p)).collect()
}

/// Wall clock in milliseconds; `None` where there is no clock.
fn now_ms() -> Option<f64> {
    #[cfg(not(target_arch = "wasm32"))]
    {
        use std::sync::OnceLock;
        use std::time::Instant;
        static EPOCH: OnceLock<Instant> = OnceLock::new();
        Some(EPOCH.get_or_init(Instant::now).elapsed().as_secs_f64() * 1e3)
    }
    #[cfg(target_arch = "wasm32")]
    None
}

pub fn run_checks(manifest: &Manifest, opts: &RunOptions) -> Result<VerificationReport> {
    let selected = select(manifest, opts.only.as_deref())?;
    let t0 = now_ms();
    let frames = frames(manifest)?;
    let t1 = now_ms();

    let mut records = Vec::with_capacity(selected.len() * frames.len());
    for check in &selected {
        for (p, frame) in manifest.points.iter().zip(&frames) {
            let rec = evaluate(check, (&p.name, &p.at), frame, opts.default_tol).map_err(|e| {
                Error::Check {
                    check: check.id.clone(),
                    point: p.name.clone(),
                    source: Box::new(e),
                }
            })?;
            records.push(rec);
        }
    }
    let t2 = now_ms();

    Ok(VerificationReport {
        header: Header {
            schema: SCHEMA_VERSION,
            manifest: manifest.name.clone(),
            digest: manifest.digest.clone(),
            convention: CONVENTION_ID.to_string(),
            default_tol: opts.default_tol,
            tool: format!("codazzi {}", env!("CARGO_PKG_VERSION")),
        },
        summary: Summary::of(&records, selected.len(), frames.len()),
        records,
        timing: match (t0, t1, t2) {
            (Some(t0), Some(t1), Some(t2)) => Some(Timing {
                frames_ms: t1 - t0,
                checks_ms: t2 - t1,
            }),
            _ => None,
        },
    })
}

/// Evaluates one check at one point.
pub fn evaluate(check: &CheckSpec, point: (&str, &[f64]), frame: &PointFrame, default_tol: f64) -> Result<Record> {
    let tol = check.tol.unwrap_or(default_tol);
    let field = |role: Role| frame.field(check.binding(role));
    let named = |role: Role| -> Result<(&str, &crate::geometry::FieldFrame)> {
        Ok((check.binding(role), field(role)?))
    };
    let comp = |name: &str, r: Residual| Component::new(name, r, tol);
    let record = |components: Vec<Component>, consistent: Option<bool>| {
        Record::new(&check.id, check.kind, point, tol, check.expect, components, consistent)
    };

    let rec = match check.kind {
        CheckKind::Engine => {
            let s = self_test(frame);
            record(s.all().into_iter().map(|(n, r)| comp(n, r)).collect(), None)
        }
        CheckKind::Commutator => record(vec![comp("commutator", commutator_residual(frame, field(Role::B)?)?)], None),
        CheckKind::Codazzi => {
            let (name, b) = named(Role::B)?;
            record(vec![comp("codazzi", st::codazzi_residual(name, b)?)], None)
        }
        CheckKind::GaugedCodazzi => {
            let g = st::gauged_codazzi_residual(named(Role::B)?, named(Role::Beta)?)?;
            record(
                vec![comp("equation", g.equation), comp("closedness", g.closedness)],
                None,
            )
        }
        CheckKind::Recurrent => {
            let r = st::recurrent_form_residual(named(Role::B)?, named(Role::Beta)?)?;
            record(vec![comp("equation", r)], None)
        }
        CheckKind::WeaklySymmetric => {
            let w = st::weakly_symmetric_residual(
                named(Role::B)?,
                named(Role::A)?,
                named(Role::BForm)?,
                named(Role::D)?,
            )?;
            let mut r = record(
                vec![comp("equation", w.equation), comp("gauge_closedness", w.gauge_closedness)],
                None,
            );
            r.info.insert("derived_gauge".into(), json!(w.derived_gauge));
            r
        }
        CheckKind::Closedness => {
            let beta = field(Role::Beta)?;
            record(vec![comp("closedness", st::closedness_residual(&beta.nabla))], None)
        }
        CheckKind::Harmonic => {
            let p = st::harmonic_curvature_residual(frame)?;
            record(
                vec![comp("divergence", p.primary), comp("ricci_codazzi", p.partner)],
                Some(p.agree(tol)),
            )
        }
        CheckKind::WeylForm => {
            let p = st::weyl_form_closedness_residual(frame)?;
            record(
                vec![comp("form_closedness", p.primary), comp("weyl_divergence", p.partner)],
                Some(p.agree(tol)),
            )
        }
        CheckKind::CyclicIdentity => record(vec![comp("identity", th::identity_residual(frame, field(Role::B)?)?)], None),
        CheckKind::FourTerm => record(vec![comp("four_term", th::four_term_residual(frame, field(Role::B)?)?)], None),
        CheckKind::KSymmetries => {
            let k = th::build_k_frame(frame, field(Role::B)?)?;
            let s = th::check_k_symmetries(&k);
            record(s.all().into_iter().map(|(n, r)| comp(n, r)).collect(), None)
        }
        CheckKind::Invariance => invariance(check, frame, tol, field(Role::B)?, record)?,
        CheckKind::ProofTrace => proof_trace(check, frame, tol, field(Role::B)?, record)?,
    };
    Ok(rec)
}

fn eigen_info(eig: &th::EigenStructure) -> Value {
    json!({
        "values": eig.values,
        "clusters": eig.cluster_values(),
        "multiplicities": eig.multiplicities(),
    })
}

fn invariance(
    check: &CheckSpec,
    frame: &PointFrame,
    tol: f64,
    b: &crate::geometry::FieldFrame,
    record: impl Fn(Vec<Component>, Option<bool>) -> Record,
) -> Result<Record> {
    let cluster_tol = check.cluster_tol.unwrap_or(th::DEFAULT_CLUSTER_TOL);
    let eig = th::eigendecompose_frame(frame, &b.value, cluster_tol)?;
    let inv = th::invariance_check(frame, &eig);
    let comp = |name: &str, r: Residual| Component::new(name, r, tol);
    let mut r = record(
        vec![
            comp("contraction", inv.residual),
            comp("degenerate", inv.degenerate_residual),
            comp("eigen_equation", th::eigen_residual(&frame.g_inv, &b.value, &eig)),
            comp("gram", th::gram_residual(&frame.g, &eig)),
        ],
        None,
    );
    r.witness = inv.witness;
    r.info.insert("admissible".into(), json!(inv.admissible));
    r.info.insert("degenerate_triples".into(), json!(inv.degenerate));
    r.info.insert("vacuous".into(), json!(inv.vacuous));
    r.info.insert("eigen".into(), eigen_info(&eig));
    // the theorem's hypothesis, reported alongside rather than gated on
    r.info.insert(
        "hypothesis_identity".into(),
        json!(th::identity_residual(frame, b)?.normalized()),
    );
    Ok(r)
}

fn proof_trace(
    check: &CheckSpec,
    frame: &PointFrame,
    tol: f64,
    b: &crate::geometry::FieldFrame,
    record: impl Fn(Vec<Component>, Option<bool>) -> Record,
) -> Result<Record> {
    let cluster_tol = check.cluster_tol.unwrap_or(th::DEFAULT_CLUSTER_TOL);
    let eig = th::eigendecompose_frame(frame, &b.value, cluster_tol)?;
    let n = frame.dim();
    let cl = &eig.cluster_of;
    let mut worst = [Residual::ZERO; 3];
    // triple with the largest row residual; ties keep the first in lexicographic order
    let mut worst_triple: Option<([usize; 3], f64)> = None;
    let mut triples = 0usize;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if cl[x] == cl[z] || cl[y] == cl[z] {
                    continue;
                }
                triples += 1;
                let t = th::proof_trace(frame, b, &eig, (x, y, z))?;
                for (w, r) in worst.iter_mut().zip(t.rows) {
                    *w = w.worse(r);
                }
                let m = t.rows.iter().map(Residual::normalized).fold(0.0, f64::max);
                if worst_triple.is_none_or(|(_, best)| m > best) {
                    worst_triple = Some(([x, y, z], m));
                }
            }
        }
    }
    let comp = |name: &str, r: Residual| Component::new(name, r, tol);
    let mut r = record(
        vec![comp("row1", worst[0]), comp("row2", worst[1]), comp("row3", worst[2])],
        None,
    );
    r.info.insert("triples".into(), json!(triples));
    r.info.insert("vacuous".into(), json!(triples == 0));
    r.info.insert("worst_triple".into(), json!(worst_triple.map(|(t, _)| t)));
    r.info.insert("eigen".into(), eigen_info(&eig));
    Ok(r)
}
