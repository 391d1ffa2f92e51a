//! Residual checkers for Codazzi-type differential structures.
//!
//! Every checker works on numeric data at one point (a [`PointFrame`] and
//! the [`FieldFrame`]s it carries) and returns a [`Residual`]. Verdicts
//! across sample points are assembled by [`StructureVerdict`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FieldFrame, FieldKind, PointFrame, Tensor, RICCI, SCHOUTEN};
use crate::residual::{Residual, ResidualAcc};

fn require_sym2(name: &str, f: &FieldFrame) -> Result<()> {
    match f.kind {
        FieldKind::Sym2 => Ok(()),
        FieldKind::Tensor2 => Err(Error::NotSymmetric(name.to_string())),
        FieldKind::Covector => Err(Error::FieldKind {
            name: name.to_string(),
            expected: "sym2",
            found: "covector",
        }),
    }
}

fn require_covector(name: &str, f: &FieldFrame) -> Result<()> {
    if f.kind == FieldKind::Covector {
        Ok(())
    } else {
        Err(Error::FieldKind {
            name: name.to_string(),
            expected: "covector",
            found: f.kind.name(),
        })
    }
}

/// `max |(∇_k - β_k) b_ij - (∇_i - β_i) b_kj|`. With `beta = None` this is
/// the plain Codazzi residual; the two paths share this loop.
fn antisymmetrized(b: &Tensor, nabla_b: &Tensor, beta: Option<&Tensor>) -> Residual {
    let n = b.dim();
    let mut acc = ResidualAcc::new();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let lhs = nabla_b[[k, i, j]];
                let rhs = nabla_b[[i, k, j]];
                match beta {
                    None => acc.sum(&[lhs, -rhs]),
                    Some(beta) => {
                        let gl = beta[[k]] * b[[i, j]];
                        let gr = beta[[i]] * b[[k, j]];
                        acc.sum(&[lhs, -gl, -rhs, gr]);
                    }
                }
            }
        }
    }
    acc.finish()
}

/// `max |∇_k β_j - ∇_j β_k|`.
pub fn closedness_residual(nabla_beta: &Tensor) -> Residual {
    let n = nabla_beta.dim();
    let mut acc = ResidualAcc::new();
    for k in 0..n {
        for j in 0..n {
            acc.sum(&[nabla_beta[[k, j]], -nabla_beta[[j, k]]]);
        }
    }
    acc.finish()
}

/// Codazzi equation `∇_j b_kl - ∇_k b_jl = 0`.
pub fn codazzi_residual(name: &str, b: &FieldFrame) -> Result<Residual> {
    require_sym2(name, b)?;
    Ok(antisymmetrized(&b.value, &b.nabla, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugedCodazzi {
    /// `(∇_k - β_k) b_ij - (∇_i - β_i) b_kj`.
    pub equation: Residual,
    /// `∇_k β_j - ∇_j β_k`.
    pub closedness: Residual,
}

/// Gauged Codazzi equation together with closedness of the gauge field.
pub fn gauged_codazzi_residual(
    (b_name, b): (&str, &FieldFrame),
    (beta_name, beta): (&str, &FieldFrame),
) -> Result<GaugedCodazzi> {
    require_sym2(b_name, b)?;
    require_covector(beta_name, beta)?;
    Ok(GaugedCodazzi {
        equation: antisymmetrized(&b.value, &b.nabla, Some(&beta.value)),
        closedness: closedness_residual(&beta.nabla),
    })
}

/// Recurrence of the 1-form `B_j = b_kj dx^k`:
/// `(∇_i - β_i) b_kl = (∇_k - β_k) b_il`. Closedness of β is not part of
/// this check. Non-symmetric `b` is accepted.
pub fn recurrent_form_residual(
    (b_name, b): (&str, &FieldFrame),
    (beta_name, beta): (&str, &FieldFrame),
) -> Result<Residual> {
    if b.kind == FieldKind::Covector {
        return Err(Error::FieldKind {
            name: b_name.to_string(),
            expected: "sym2 or tensor2",
            found: "covector",
        });
    }
    require_covector(beta_name, beta)?;
    Ok(antisymmetrized(&b.value, &b.nabla, Some(&beta.value)))
}

/// Recurrence with raw numeric inputs (used by property tests).
pub fn recurrent_form_residual_raw(b: &Tensor, nabla_b: &Tensor, beta: &Tensor) -> Residual {
    antisymmetrized(b, nabla_b, Some(beta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeaklySymmetric {
    /// `∇_i b_kl - A_i b_kl - B_k b_il - D_l b_ik`.
    pub equation: Residual,
    /// `β = A - B` at the point.
    pub derived_gauge: Vec<f64>,
    /// Closedness of `A - B`.
    pub gauge_closedness: Residual,
}

/// Residual of `∇_i b_kl = A_i b_kl + B_k b_il + D_l b_ik` from raw numbers.
pub fn weakly_symmetric_equation(
    b: &Tensor,
    nabla_b: &Tensor,
    a: &Tensor,
    bb: &Tensor,
    d: &Tensor,
) -> Residual {
    let n = b.dim();
    let mut acc = ResidualAcc::new();
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                acc.sum(&[
                    nabla_b[[i, k, l]],
                    -a[[i]] * b[[k, l]],
                    -bb[[k]] * b[[i, l]],
                    -d[[l]] * b[[i, k]],
                ]);
            }
        }
    }
    acc.finish()
}

/// Weakly b-symmetric structure plus the derived gauge `β = A - B`.
pub fn weakly_symmetric_residual(
    (b_name, b): (&str, &FieldFrame),
    (a_name, a): (&str, &FieldFrame),
    (bb_name, bb): (&str, &FieldFrame),
    (d_name, d): (&str, &FieldFrame),
) -> Result<WeaklySymmetric> {
    require_sym2(b_name, b)?;
    require_covector(a_name, a)?;
    require_covector(bb_name, bb)?;
    require_covector(d_name, d)?;
    let equation = weakly_symmetric_equation(&b.value, &b.nabla, &a.value, &bb.value, &d.value);
    let derived = a.value.minus(&bb.value);
    let nabla_derived = a.nabla.minus(&bb.nabla);
    Ok(WeaklySymmetric {
        equation,
        derived_gauge: derived.as_slice().to_vec(),
        gauge_closedness: closedness_residual(&nabla_derived),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedResidual {
    /// The primary quantity.
    pub primary: Residual,
    /// The quantity it is equivalent to.
    pub partner: Residual,
}

impl PairedResidual {
    /// Both verdicts agree at `tol`.
    pub fn agree(&self, tol: f64) -> bool {
        self.primary.passes(tol) == self.partner.passes(tol)
    }
}

/// `max |∇_m R_jkl^m|`, paired with the Codazzi residual of Ricci.
pub fn harmonic_curvature_residual(frame: &PointFrame) -> Result<PairedResidual> {
    let n = frame.dim();
    let nr = &frame.nabla_riemann_up;
    let mut acc = ResidualAcc::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let terms: Vec<f64> = (0..n).map(|m| nr[[m, j, k, l, m]]).collect();
                acc.sum(&terms);
            }
        }
    }
    Ok(PairedResidual {
        primary: acc.finish(),
        partner: codazzi_residual(RICCI, frame.field(RICCI)?)?,
    })
}

/// Closedness of the Weyl 1-form `(R_kj - R g_kj / (2(n-1))) dx^k`,
/// paired with `max |∇_m C_jkl^m|`. Refuses `n < 4`.
pub fn weyl_form_closedness_residual(frame: &PointFrame) -> Result<PairedResidual> {
    let n = frame.dim();
    if n < 4 {
        return Err(Error::Dimension {
            what: "the Weyl 1-form check",
            needed: 4,
            found: n,
        });
    }
    let form = codazzi_residual(SCHOUTEN, frame.field(SCHOUTEN)?)?;
    let nc = frame.nabla_weyl().expect("n >= 4");
    let gi = &frame.g_inv;
    let mut acc = ResidualAcc::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut terms = Vec::with_capacity(n * n);
                for a in 0..n {
                    for m in 0..n {
                        terms.push(gi[[a, m]] * nc[[a, j, k, l, m]]);
                    }
                }
                acc.sum(&terms);
            }
        }
    }
    Ok(PairedResidual {
        primary: form,
        partner: acc.finish(),
    })
}

/// One residual per sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub point: String,
    pub residual: Residual,
}

/// Verdict of a structure check over all sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureVerdict {
    pub structure: String,
    /// Worst normalized residual over the points.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub per_point: Vec<PointResidual>,
    pub sub_verdicts: Vec<StructureVerdict>,
}

impl StructureVerdict {
    pub fn from_points(structure: &str, tolerance: f64, per_point: Vec<PointResidual>) -> Self {
        let residual = per_point
            .iter()
            .map(|p| p.residual.normalized())
            .fold(0.0, |m: f64, r| if r.is_nan() || m.is_nan() { f64::NAN } else { m.max(r) });
        StructureVerdict {
            structure: structure.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            per_point,
            sub_verdicts: Vec::new(),
        }
    }

    pub fn with_sub(mut self, sub: StructureVerdict) -> Self {
        self.sub_verdicts.push(sub);
        self
    }

    /// Passes only if this and every sub-verdict pass.
    pub fn all_pass(&self) -> bool {
        self.pass && self.sub_verdicts.iter().all(StructureVerdict::all_pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartManifold;

    fn flat2() -> ChartManifold {
        ChartManifold::parse(&["x", "y"], &[("x", "x", "1"), ("y", "y", "1")]).unwrap()
    }

    #[test]
    fn constant_multiple_of_metric_is_codazzi() {
        let mut m = ChartManifold::parse(
            &["t", "p"],
            &[("t", "t", "1"), ("p", "p", "sin(t)^2")],
        )
        .unwrap();
        m.add_sym2("b", &[("t", "t", "3"), ("p", "p", "3*sin(t)^2")]).unwrap();
        let f = m.frame(&[0.7, 0.1]).unwrap();
        assert!(codazzi_residual("b", f.field("b").unwrap()).unwrap().normalized() < 1e-15);
    }

    #[test]
    fn diag_x_is_not_codazzi() {
        let mut m = flat2();
        m.add_sym2("b", &[("x", "x", "x"), ("y", "y", "x")]).unwrap();
        let f = m.frame(&[0.4, 2.0]).unwrap();
        let r = codazzi_residual("b", f.field("b").unwrap()).unwrap();
        assert_eq!(r.raw, 1.0);
        assert_eq!(r.normalized(), 0.5);
    }

    #[test]
    fn gauge_with_zero_beta_is_codazzi_bit_for_bit() {
        let mut m = flat2();
        m.add_sym2("b", &[("x", "x", "x*y^2"), ("x", "y", "sin(x)"), ("y", "y", "x")])
            .unwrap();
        m.add_covector("zero", &["0", "0"]).unwrap();
        let f = m.frame(&[0.4, 2.0]).unwrap();
        let b = f.field("b").unwrap();
        let plain = codazzi_residual("b", b).unwrap();
        let gauged = gauged_codazzi_residual(("b", b), ("zero", f.field("zero").unwrap())).unwrap();
        assert_eq!(plain.raw.to_bits(), gauged.equation.raw.to_bits());
        assert_eq!(plain.scale.to_bits(), gauged.equation.scale.to_bits());
        assert_eq!(gauged.closedness, Residual::ZERO);
    }

    #[test]
    fn non_closed_gauge() {
        let mut m = flat2();
        m.add_sym2("b", &[("x", "x", "1"), ("y", "y", "1")]).unwrap();
        m.add_covector("beta", &["y", "0"]).unwrap();
        let f = m.frame(&[0.4, 2.0]).unwrap();
        let g = gauged_codazzi_residual(("b", f.field("b").unwrap()), ("beta", f.field("beta").unwrap()))
            .unwrap();
        assert_eq!(g.closedness.raw, 1.0);
    }

    #[test]
    fn symmetric_checks_reject_other_kinds() {
        let mut m = flat2();
        m.add_field(
            "t",
            FieldKind::Tensor2,
            vec![crate::expr::Expr::Var(0), crate::expr::Expr::one(), crate::expr::Expr::zero(), crate::expr::Expr::one()],
        )
        .unwrap();
        m.add_covector("beta", &["1", "0"]).unwrap();
        let f = m.frame(&[0.1, 0.2]).unwrap();
        assert!(matches!(
            codazzi_residual("t", f.field("t").unwrap()),
            Err(Error::NotSymmetric(_))
        ));
        assert!(codazzi_residual("beta", f.field("beta").unwrap()).is_err());
        // recurrence accepts it
        recurrent_form_residual(("t", f.field("t").unwrap()), ("beta", f.field("beta").unwrap()))
            .unwrap();
    }

    #[test]
    fn weyl_form_refuses_three_dimensions() {
        let m = ChartManifold::parse(&["x", "y", "z"], &[("x", "x", "1"), ("y", "y", "1"), ("z", "z", "1")])
            .unwrap();
        let f = m.frame(&[0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            weyl_form_closedness_residual(&f),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn verdict_aggregation_takes_worst_point() {
        let v = StructureVerdict::from_points(
            "x",
            0.1,
            vec![
                PointResidual { point: "a".into(), residual: Residual { raw: 0.05, scale: 0.0 } },
                PointResidual { point: "b".into(), residual: Residual { raw: 0.3, scale: 1.0 } },
            ],
        );
        assert_eq!(v.residual, 0.15);
        assert!(!v.pass);
    }
}
