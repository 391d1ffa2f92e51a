//! Curvature of a chart-defined metric at sample points.
//!
//! The pipeline is exact: metric components are differentiated
//! symbolically up to fourth order, the derivatives seed Taylor jets at
//! the sample point, and Christoffel symbols, the Riemann tensor, Ricci,
//! scalar curvature and all covariant derivatives are assembled by jet
//! arithmetic. See [`CONVENTIONS`] for the index and sign convention.

mod chart;
mod frame;
mod jet;
mod tensor;

pub use chart::{
    ChartManifold, FieldDef, FieldKind, FIELD_JET_ORDER, METRIC_JET_ORDER,
    SINGULAR_METRIC_RATIO, SINGULAR_POINT_THRESHOLD,
};
pub use frame::{FieldFrame, PointFrame, RICCI, SCHOUTEN};
pub use jet::{Jet, JetAlgebra};
pub use tensor::{Tensor, TensorOf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residual::{Residual, ResidualAcc};

/// Identifier recorded in every report.
pub const CONVENTION_ID: &str = "curv-conv/1";

/// The pinned index and sign convention.
pub const CONVENTIONS: &str = r#"Convention sheet curv-conv/1
============================

Coordinates x^0 .. x^(n-1). Repeated indices are summed.

Christoffel symbols (Levi-Civita):
    Γ^k_ij = 1/2 g^km (∂_i g_jm + ∂_j g_im - ∂_m g_ij)

Covariant derivative of a (0,2) tensor and a covector:
    ∇_i b_jk = ∂_i b_jk - Γ^m_ij b_mk - Γ^m_ik b_jm
    ∇_i β_j  = ∂_i β_j  - Γ^m_ij β_m
Second derivatives are taken as ∇ of the (0,3) field ∇b:
    ∇_a ∇_i b_jk = ∂_a(∇_i b_jk) - Γ^p_ai ∇_p b_jk - Γ^p_aj ∇_i b_pk - Γ^p_ak ∇_i b_jp

Riemann tensor, one index up (last slot):
    R_ijk^m = ∂_j Γ^m_ik - ∂_i Γ^m_jk + Γ^m_jp Γ^p_ik - Γ^m_ip Γ^p_jk
All indices down:
    R_ijkl = R_ijk^m g_ml

This choice is ours. It is fixed by two requirements:
  (1) the commutator acts on a (0,2) tensor as
        [∇_i, ∇_j] b_kl = R_ijk^m b_ml + R_ijl^m b_km
  (2) contracting the first and the upper index with a minus sign,
        R_kl = -R_mkl^m,
      gives scalar curvature R = g^kl R_kl = +2 on the unit 2-sphere.
With these, R_ijkl agrees with the common all-down tensor for which
R_1212 > 0 on the sphere, and it has the symmetries
    R_ijkl = -R_jikl = -R_ijlk = R_klij,   R_ijkl + R_jkil + R_kijl = 0.

Contracted second Bianchi identity in this convention:
    ∇_m R_jkl^m = ∇_k R_jl - ∇_j R_kl

Weyl tensor (n >= 3), all down:
    C_jklm = R_jklm - (g_jl R_km - g_jm R_kl - g_kl R_jm + g_km R_jl)/(n-2)
                    + R (g_jl g_km - g_jm g_kl)/((n-1)(n-2))
    C_jkl^m = C_jklp g^pm;  every trace of C vanishes.

Schouten-type tensor of the Weyl 1-form:
    S_kj = R_kj - R/(2(n-1)) g_kj

Residuals: max over indices of |violation| divided by
(1 + max over indices of |each term entering the identity|).
"#;

/// Engine self-consistency residuals at one point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineSelfTest {
    /// ∇g = 0.
    pub metric_compatibility: Residual,
    /// g^ij g_jk = δ^i_k.
    pub inverse: Residual,
    /// Γ^k_ij = Γ^k_ji.
    pub christoffel_symmetry: Residual,
    /// R_ijkl = -R_jikl and R_ijkl = -R_ijlk.
    pub riemann_antisymmetry: Residual,
    /// R_ijkl = R_klij.
    pub riemann_pair_symmetry: Residual,
    /// R_ijkl + R_jkil + R_kijl = 0.
    pub first_bianchi: Residual,
    /// R_kl = R_lk.
    pub ricci_symmetry: Residual,
    /// Every single trace of C; `None` for n < 3.
    pub weyl_trace: Option<Residual>,
    /// ∇_m R_jkl^m - (∇_k R_jl - ∇_j R_kl) = 0.
    pub second_bianchi: Residual,
}

impl EngineSelfTest {
    pub fn all(&self) -> Vec<(&'static str, Residual)> {
        let mut v = vec![
            ("metric_compatibility", self.metric_compatibility),
            ("inverse", self.inverse),
            ("christoffel_symmetry", self.christoffel_symmetry),
            ("riemann_antisymmetry", self.riemann_antisymmetry),
            ("riemann_pair_symmetry", self.riemann_pair_symmetry),
            ("first_bianchi", self.first_bianchi),
            ("ricci_symmetry", self.ricci_symmetry),
            ("second_bianchi", self.second_bianchi),
        ];
        if let Some(w) = self.weyl_trace {
            v.push(("weyl_trace", w));
        }
        v
    }

    pub fn worst(&self) -> Residual {
        self.all()
            .into_iter()
            .fold(Residual::ZERO, |acc, (_, r)| acc.worse(r))
    }
}

/// Runs every engine invariant on a frame.
pub fn self_test(frame: &PointFrame) -> EngineSelfTest {
    let n = frame.dim();
    let r = &frame.riemann;
    let g = &frame.g;
    let gi = &frame.g_inv;

    let mut compat = ResidualAcc::new();
    compat.terms(frame.christoffel.as_slice());
    for v in frame.nabla_g.as_slice() {
        compat.violation(*v);
    }

    let mut inverse = ResidualAcc::new();
    for i in 0..n {
        for k in 0..n {
            let mut s = if i == k { -1.0 } else { 0.0 };
            for j in 0..n {
                let t = gi[[i, j]] * g[[j, k]];
                inverse.term(t);
                s += t;
            }
            inverse.violation(s);
        }
    }

    let mut chr = ResidualAcc::new();
    let gam = &frame.christoffel;
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                chr.sum(&[gam[[m, i, j]], -gam[[m, j, i]]]);
            }
        }
    }

    let mut anti = ResidualAcc::new();
    let mut pair = ResidualAcc::new();
    let mut bianchi = ResidualAcc::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r[[i, j, k, l]];
                    anti.sum(&[v, r[[j, i, k, l]]]);
                    anti.sum(&[v, r[[i, j, l, k]]]);
                    pair.sum(&[v, -r[[k, l, i, j]]]);
                    bianchi.sum(&[v, r[[j, k, i, l]], r[[k, i, j, l]]]);
                }
            }
        }
    }

    let mut ric = ResidualAcc::new();
    for k in 0..n {
        for l in 0..n {
            ric.sum(&[frame.ricci[[k, l]], -frame.ricci[[l, k]]]);
        }
    }

    let weyl_trace = frame.weyl_up().map(|c_up| {
        let c = frame.weyl.as_ref().expect("weyl present with weyl_up");
        let mut acc = ResidualAcc::new();
        acc.terms(c_up.as_slice());
        acc.terms(c.as_slice());
        // contract every pair of slots of C_jklm with g^..
        for (s1, s2) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        for q in 0..n {
                            let mut ix = [0usize; 4];
                            let free: Vec<usize> = (0..4).filter(|x| *x != s1 && *x != s2).collect();
                            ix[s1] = p;
                            ix[s2] = q;
                            ix[free[0]] = a;
                            ix[free[1]] = b;
                            s += gi[[p, q]] * c[ix];
                        }
                    }
                    acc.violation(s);
                }
            }
        }
        acc.finish()
    });

    let div = frame.riemann_divergence();
    let nric = &frame.nabla_ricci;
    let mut b2 = ResidualAcc::new();
    b2.terms(frame.nabla_riemann_up.as_slice());
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let rhs = nric[[k, j, l]] - nric[[j, k, l]];
                b2.terms(&[rhs]);
                b2.violation(div[[j, k, l]] - rhs);
            }
        }
    }

    EngineSelfTest {
        metric_compatibility: compat.finish(),
        inverse: inverse.finish(),
        christoffel_symmetry: chr.finish(),
        riemann_antisymmetry: anti.finish(),
        riemann_pair_symmetry: pair.finish(),
        first_bianchi: bianchi.finish(),
        ricci_symmetry: ric.finish(),
        weyl_trace,
        second_bianchi: b2.finish(),
    }
}

/// `[∇_i, ∇_j] b_kl - (R_ijk^m b_ml + R_ijl^m b_km)`, the commutator
/// identity for a two-index field.
pub fn commutator_residual(frame: &PointFrame, field: &FieldFrame) -> Result<Residual> {
    let n = frame.dim();
    let nn = field.nabla2.as_ref().ok_or_else(|| Error::FieldKind {
        name: "commutator operand".into(),
        expected: "a two-index field",
        found: field.kind.name(),
    })?;
    let b = &field.value;
    let r = &frame.riemann_up;
    let mut acc = ResidualAcc::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let lhs = nn[[i, j, k, l]] - nn[[j, i, k, l]];
                    let mut rhs = 0.0;
                    for m in 0..n {
                        let t1 = r[[i, j, k, m]] * b[[m, l]];
                        let t2 = r[[i, j, l, m]] * b[[k, m]];
                        acc.terms(&[t1, t2]);
                        rhs += t1 + t2;
                    }
                    acc.terms(&[nn[[i, j, k, l]], nn[[j, i, k, l]]]);
                    acc.violation(lhs - rhs);
                }
            }
        }
    }
    Ok(acc.finish())
}

/// Metric compatibility of the covariant derivative applied to a field
/// that equals `c * g`: returns the max of `∇b`.
pub fn covariant_derivative_norm(field: &FieldFrame) -> f64 {
    field.nabla.max_abs()
}
