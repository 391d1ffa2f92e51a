//! Verification reports: one record per (check, point), plus a header and a
//! summary. Two renderings: line-delimited JSON records for machines and a
//! per-check table for people.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::{CheckKind, Expect};
use crate::residual::Residual;
use crate::theorem::Witness;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub raw: f64,
    pub scale: f64,
    pub normalized: f64,
    pub pass: bool,
}

impl Component {
    pub fn new(name: &str, r: Residual, tol: f64) -> Self {
        Component {
            name: name.to_string(),
            raw: r.raw,
            scale: r.scale,
            normalized: r.normalized(),
            pass: r.passes(tol),
        }
    }

    pub fn residual(&self) -> Residual {
        Residual {
            raw: self.raw,
            scale: self.scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    ExpectedFail,
    /// Failed without an expect-fail marker.
    Fail,
    /// Marked expect-fail but every component passed.
    UnexpectedPass,
}

impl Status {
    pub fn from_verdict(pass: bool, consistent: Option<bool>, expect: Expect) -> Status {
        if consistent == Some(false) {
            return Status::Fail;
        }
        match (pass, expect) {
            (true, Expect::Pass) => Status::Pass,
            (false, Expect::Fail) => Status::ExpectedFail,
            (false, Expect::Pass) => Status::Fail,
            (true, Expect::Fail) => Status::UnexpectedPass,
        }
    }

    pub fn is_ok(self) -> bool {
        matches!(self, Status::Pass | Status::ExpectedFail)
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::ExpectedFail => "expected-fail",
            Status::Fail => "FAIL",
            Status::UnexpectedPass => "UNEXPECTED-PASS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub kind: CheckKind,
    pub point: String,
    pub at: Vec<f64>,
    pub tol: f64,
    pub expect: Expect,
    pub components: Vec<Component>,
    pub pass: bool,
    /// For paired checks: whether both formulations reach the same verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, serde_json::Value>,
}

impl Record {
    pub fn new(
        check: &str,
        kind: CheckKind,
        point: (&str, &[f64]),
        tol: f64,
        expect: Expect,
        components: Vec<Component>,
        consistent: Option<bool>,
    ) -> Record {
        let pass = components.iter().all(|c| c.pass);
        Record {
            check: check.to_string(),
            kind,
            point: point.0.to_string(),
            at: point.1.to_vec(),
            tol,
            expect,
            components,
            pass,
            consistent,
            status: Status::from_verdict(pass, consistent, expect),
            witness: None,
            info: BTreeMap::new(),
        }
    }

    /// Largest normalized component.
    pub fn worst(&self) -> Option<&Component> {
        self.components
            .iter()
            .fold(None, |w: Option<&Component>, c| match w {
                Some(w) if w.normalized >= c.normalized || c.normalized.is_nan() => Some(w),
                _ => Some(c),
            })
    }

    /// Recomputes the verdict and status from the stored residuals and
    /// tolerance only.
    pub fn recomputed_status(&self) -> Status {
        let consistent = self.consistent;
        let pass = self
            .components
            .iter()
            .all(|c| c.residual().passes(self.tol));
        Status::from_verdict(pass, consistent, self.expect)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: u32,
    pub manifest: String,
    pub digest: String,
    pub convention: String,
    pub default_tol: f64,
    pub tool: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub points: usize,
    pub records: usize,
    pub pass: usize,
    pub expected_fail: usize,
    pub fail: usize,
    pub unexpected_pass: usize,
}

impl Summary {
    pub fn of(records: &[Record], checks: usize, points: usize) -> Summary {
        let mut s = Summary {
            checks,
            points,
            records: records.len(),
            ..Summary::default()
        };
        for r in records {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::ExpectedFail => s.expected_fail += 1,
                Status::Fail => s.fail += 1,
                Status::UnexpectedPass => s.unexpected_pass += 1,
            }
        }
        s
    }

    pub fn all_ok(&self) -> bool {
        self.fail == 0 && self.unexpected_pass == 0
    }

    /// 0 when every record passed or failed as declared, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_ok() {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub frames_ms: f64,
    pub checks_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub header: Header,
    pub records: Vec<Record>,
    pub summary: Summary,
    /// Wall-clock timing. Left out of the record rendering so that
    /// repeated runs produce identical bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header(Header),
    Check(Box<Record>),
    Summary(Summary),
}

impl VerificationReport {
    /// Line-delimited JSON: header, one line per record, summary.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        let mut push = |l: &Line| {
            out.push_str(&serde_json::to_string(l).expect("report values serialize"));
            out.push('\n');
        };
        push(&Line::Header(self.header.clone()));
        for r in &self.records {
            push(&Line::Check(Box::new(r.clone())));
        }
        push(&Line::Summary(self.summary.clone()));
        out
    }

    pub fn from_records(text: &str) -> Result<VerificationReport> {
        let mut header = None;
        let mut summary = None;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parsed: Line = serde_json::from_str(line)
                .map_err(|e| Error::Manifest(format!("report line {}: {e}", i + 1)))?;
            match parsed {
                Line::Header(h) => header = Some(h),
                Line::Check(r) => records.push(*r),
                Line::Summary(s) => summary = Some(s),
            }
        }
        Ok(VerificationReport {
            header: header.ok_or_else(|| Error::Manifest("report has no header line".into()))?,
            records,
            summary: summary.ok_or_else(|| Error::Manifest("report has no summary line".into()))?,
            timing: None,
        })
    }

    /// Per-check table with the worst point of each check.
    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        let _ = writeln!(out, "manifest   {}", h.manifest);
        let _ = writeln!(out, "digest     {}", h.digest);
        let _ = writeln!(out, "convention {}", h.convention);
        let _ = writeln!(out);

        struct Row {
            check: String,
            points: String,
            worst: String,
            at: String,
            component: String,
            tol: String,
            status: String,
        }
        let mut rows: Vec<Row> = Vec::new();
        let mut notes: Vec<String> = Vec::new();
        let mut order: Vec<&str> = Vec::new();
        let mut by_check: BTreeMap<&str, Vec<&Record>> = BTreeMap::new();
        for r in &self.records {
            if !by_check.contains_key(r.check.as_str()) {
                order.push(&r.check);
            }
            by_check.entry(&r.check).or_default().push(r);
        }
        for id in order {
            let recs = &by_check[id];
            let mut worst: Option<(&Record, &Component)> = None;
            for r in recs {
                if let Some(c) = r.worst() {
                    if worst.is_none_or(|(_, w)| c.normalized > w.normalized) {
                        worst = Some((r, c));
                    }
                }
            }
            let bad: Vec<&&Record> = recs.iter().filter(|r| !r.status.is_ok()).collect();
            let status = match bad.first() {
                None if recs.iter().all(|r| r.status == Status::Pass) => "pass".to_string(),
                None => "expected-fail".to_string(),
                Some(r) => format!("{} ({}/{})", r.status.label(), bad.len(), recs.len()),
            };
            let (worst_s, at, comp) = match worst {
                Some((r, c)) => (format!("{:.3e}", c.normalized), r.point.clone(), c.name.clone()),
                None => ("-".into(), "-".into(), "-".into()),
            };
            rows.push(Row {
                check: id.to_string(),
                points: recs.len().to_string(),
                worst: worst_s,
                at,
                component: comp,
                tol: format!("{:.0e}", recs[0].tol),
                status,
            });
            for r in recs {
                if r.consistent == Some(false) {
                    notes.push(format!("{id} @ {}: paired formulations disagree", r.point));
                }
            }
            if let Some(r) = recs.iter().find(|r| r.witness.is_some()) {
                let w = r.witness.expect("checked");
                let triples = r.info.get("admissible").map(|v| v.to_string()).unwrap_or_default();
                notes.push(format!(
                    "{id}: {triples} admissible triples; worst witness at {} is (X,Y,Z,l) = ({},{},{},{})",
                    r.point, w.x, w.y, w.z, w.l
                ));
            } else if recs.iter().any(|r| r.info.get("vacuous") == Some(&serde_json::Value::Bool(true))) {
                notes.push(format!("{id}: vacuous at some points (single eigenvalue cluster)"));
            }
        }

        let head = ["check", "points", "worst", "at", "component", "tol", "status"];
        let cells = |r: &Row| {
            [
                r.check.clone(),
                r.points.clone(),
                r.worst.clone(),
                r.at.clone(),
                r.component.clone(),
                r.tol.clone(),
                r.status.clone(),
            ]
        };
        let mut width = head.map(str::len);
        for r in &rows {
            for (w, c) in width.iter_mut().zip(cells(r)) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cols: [String; 7]| {
            let mut s = String::new();
            for (i, (c, w)) in cols.iter().zip(width).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{c:<w$}");
            }
            s.trim_end().to_string()
        };
        let _ = writeln!(out, "{}", line(head.map(String::from)));
        let _ = writeln!(out, "{}", line(width.map(|w| "-".repeat(w))));
        for r in &rows {
            let _ = writeln!(out, "{}", line(cells(r)));
        }
        if !notes.is_empty() {
            let _ = writeln!(out);
            for n in notes {
                let _ = writeln!(out, "{n}");
            }
        }
        let s = &self.summary;
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{} records: {} pass, {} expected-fail, {} fail, {} unexpected-pass",
            s.records, s.pass, s.expected_fail, s.fail, s.unexpected_pass
        );
        if let Some(t) = &self.timing {
            let _ = writeln!(out, "time: frames {:.1} ms, checks {:.1} ms", t.frames_ms, t.checks_ms);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut r = Record::new(
            "invariance:ricci",
            CheckKind::Invariance,
            ("p1", &[0.1, 1.0 / 3.0]),
            1e-8,
            Expect::Pass,
            vec![Component::new("contraction", Residual { raw: 1e-12, scale: 0.7 }, 1e-8)],
            None,
        );
        r.witness = Some(Witness { x: 0, y: 1, z: 2, l: 3 });
        r.info.insert("admissible".into(), 16.into());
        r.info.insert("eigenvalues".into(), serde_json::json!([0.25, 1.0 / 3.0]));
        let bad = Record::new(
            "codazzi:ricci",
            CheckKind::Codazzi,
            ("p1", &[0.1, 0.2]),
            1e-8,
            Expect::Fail,
            vec![Component::new("codazzi", Residual { raw: 0.3, scale: 2.0 }, 1e-8)],
            None,
        );
        let records = vec![r, bad];
        VerificationReport {
            header: Header {
                schema: 1,
                manifest: "m".into(),
                digest: "sha256:00".into(),
                convention: "c".into(),
                default_tol: 1e-8,
                tool: "t".into(),
            },
            summary: Summary::of(&records, 2, 1),
            records,
            timing: Some(Timing {
                frames_ms: 1.5,
                checks_ms: 2.0,
            }),
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let rep = sample();
        let s = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<VerificationReport>(&s).unwrap(), rep);
    }

    #[test]
    fn records_round_trip_drops_only_timing() {
        let rep = sample();
        let text = rep.to_records();
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains("frames_ms"));
        let back = VerificationReport::from_records(&text).unwrap();
        assert_eq!(back.records, rep.records);
        assert_eq!(back.summary, rep.summary);
        assert_eq!(back.timing, None);
    }

    #[test]
    fn verdicts_recompute_from_residual_and_tol() {
        let rep = sample();
        for r in &rep.records {
            assert_eq!(r.recomputed_status(), r.status);
        }
        assert_eq!(rep.records[1].status, Status::ExpectedFail);
        assert_eq!(rep.summary.exit_code(), 0);
    }

    #[test]
    fn status_table() {
        use Expect::*;
        assert_eq!(Status::from_verdict(true, None, Pass), Status::Pass);
        assert_eq!(Status::from_verdict(false, None, Pass), Status::Fail);
        assert_eq!(Status::from_verdict(false, None, Fail), Status::ExpectedFail);
        assert_eq!(Status::from_verdict(true, None, Fail), Status::UnexpectedPass);
        assert_eq!(Status::from_verdict(true, Some(false), Pass), Status::Fail);
    }

    #[test]
    fn text_table_names_worst_point() {
        let t = sample().to_text();
        assert!(t.contains("invariance:ricci"));
        assert!(t.contains("expected-fail"));
        assert!(t.contains("(X,Y,Z,l) = (0,1,2,3)"), "{t}");
        assert!(t.contains("2 records: 1 pass, 1 expected-fail"));
    }
}
