//! Pointwise checks of the cyclic curvature identity
//! `b_im R_jkl^m + b_jm R_kil^m + b_km R_ijl^m = 0` and its consequences:
//! the generalized curvature tensor `K_ijkl = R_ijrs b_k^r b_l^s`, and the
//! vanishing of `R_ijkl X^i Y^j Z^k` for eigenvectors X, Y, Z of `b_i^j`
//! whose eigenvalues λ, μ both differ from ν.

mod eigen;

pub use eigen::{
    eigen_residual, eigendecompose, eigendecompose_frame, gram_residual, EigenStructure,
    DEFAULT_CLUSTER_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FieldFrame, FieldKind, PointFrame, Tensor};
use crate::residual::{Residual, ResidualAcc};

/// Pair-symmetry residual of K is bounded by this multiple of the worst
/// antisymmetry / first-Bianchi residual (minimal l1 weight of the
/// cyclic-sum derivation, over all index coincidence patterns).
pub const PAIR_SYMMETRY_BOUND: f64 = 6.0;

fn require_sym2(b: &FieldFrame) -> Result<()> {
    match b.kind {
        FieldKind::Sym2 => Ok(()),
        FieldKind::Tensor2 => Err(Error::NotSymmetric("identity operand".into())),
        FieldKind::Covector => Err(Error::FieldKind {
            name: "identity operand".into(),
            expected: "sym2",
            found: "covector",
        }),
    }
}

/// `T_ijkl = b_im R_jkl^m + b_jm R_kil^m + b_km R_ijl^m`, plus the largest
/// individual term.
pub fn identity_tensor(riemann_up: &Tensor, b: &Tensor) -> (Tensor, f64) {
    let n = b.dim();
    let mut scale = 0.0f64;
    let t = Tensor::from_fn(n, 4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let (mut t1, mut t2, mut t3) = (0.0, 0.0, 0.0);
        for m in 0..n {
            t1 += b[[i, m]] * riemann_up[[j, k, l, m]];
            t2 += b[[j, m]] * riemann_up[[k, i, l, m]];
            t3 += b[[k, m]] * riemann_up[[i, j, l, m]];
        }
        scale = scale.max(t1.abs()).max(t2.abs()).max(t3.abs());
        t1 + t2 + t3
    });
    (t, scale)
}

/// Residual of the cyclic identity. Reads only `b.value`.
pub fn identity_residual(frame: &PointFrame, b: &FieldFrame) -> Result<Residual> {
    require_sym2(b)?;
    let (t, scale) = identity_tensor(&frame.riemann_up, &b.value);
    Ok(Residual {
        raw: t.max_abs(),
        scale,
    })
}

/// Residual of the four-term identity
/// `R_kij^m b_ml + R_jli^m b_mk + R_ljk^m b_mi + R_ikl^m b_mj = 0`.
pub fn four_term_residual(frame: &PointFrame, b: &FieldFrame) -> Result<Residual> {
    require_sym2(b)?;
    let n = frame.dim();
    let r = &frame.riemann_up;
    let b = &b.value;
    let mut acc = ResidualAcc::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut t = [0.0; 4];
                    for m in 0..n {
                        t[0] += r[[k, i, j, m]] * b[[m, l]];
                        t[1] += r[[j, l, i, m]] * b[[m, k]];
                        t[2] += r[[l, j, k, m]] * b[[m, i]];
                        t[3] += r[[i, k, l, m]] * b[[m, j]];
                    }
                    acc.sum(&t);
                }
            }
        }
    }
    Ok(acc.finish())
}

/// `K_ijkl = R_ijrs b_k^r b_l^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedCurvature {
    pub k: Tensor,
}

/// Builds K from the all-down Riemann tensor and `b_k^r`.
pub fn build_k(riemann: &Tensor, b_mixed: &Tensor) -> GeneralizedCurvature {
    let n = riemann.dim();
    // contract the last slot first: H_ijrl = R_ijrs b_l^s
    let h = Tensor::from_fn(n, 4, |ix| {
        (0..n)
            .map(|s| riemann[[ix[0], ix[1], ix[2], s]] * b_mixed[[ix[3], s]])
            .sum()
    });
    let k = Tensor::from_fn(n, 4, |ix| {
        (0..n)
            .map(|r| h[[ix[0], ix[1], r, ix[3]]] * b_mixed[[ix[2], r]])
            .sum()
    });
    GeneralizedCurvature { k }
}

/// K for a field at a frame.
pub fn build_k_frame(frame: &PointFrame, b: &FieldFrame) -> Result<GeneralizedCurvature> {
    require_sym2(b)?;
    Ok(build_k(&frame.riemann, &frame.raise_second(&b.value)))
}

/// Residuals of the generalized-curvature symmetries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSymmetries {
    /// `K_ijkl + K_jikl`.
    pub a1: Residual,
    /// `K_ijkl + K_ijlk`.
    pub a2: Residual,
    /// `K_ijkl - K_klij`.
    pub b: Residual,
    /// `K_ijkl + K_jkil + K_kijl`.
    pub c_first3: Residual,
    /// `K_ijkl + K_iklj + K_iljk`.
    pub c_last3: Residual,
}

impl KSymmetries {
    pub fn all(&self) -> [(&'static str, Residual); 5] {
        [
            ("a1", self.a1),
            ("a2", self.a2),
            ("b", self.b),
            ("c_first3", self.c_first3),
            ("c_last3", self.c_last3),
        ]
    }

    pub fn worst(&self) -> Residual {
        self.all().iter().fold(Residual::ZERO, |acc, (_, r)| acc.worse(*r))
    }
}

/// Checks the five symmetry properties. Every residual is normalized by
/// `1 + max |K|` so that they are directly comparable.
pub fn check_k_symmetries(k: &GeneralizedCurvature) -> KSymmetries {
    let k = &k.k;
    let n = k.dim();
    let scale = k.max_abs();
    let mut raw = [0.0f64; 5];
    for i in 0..n {
        for j in 0..n {
            for p in 0..n {
                for l in 0..n {
                    let v = k[[i, j, p, l]];
                    let vals = [
                        v + k[[j, i, p, l]],
                        v + k[[i, j, l, p]],
                        v - k[[p, l, i, j]],
                        v + k[[j, p, i, l]] + k[[p, i, j, l]],
                        v + k[[i, p, l, j]] + k[[i, l, j, p]],
                    ];
                    for (r, x) in raw.iter_mut().zip(vals) {
                        *r = if x.is_nan() { f64::NAN } else { r.max(x.abs()) };
                    }
                }
            }
        }
    }
    let mk = |raw: f64| Residual { raw, scale };
    KSymmetries {
        a1: mk(raw[0]),
        a2: mk(raw[1]),
        b: mk(raw[2]),
        c_first3: mk(raw[3]),
        c_last3: mk(raw[4]),
    }
}

/// An eigenvector triple `(X, Y, Z)` by basis index, and the free index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// Worst `max_l |R_ijkl X^i Y^j Z^k|` over admissible triples.
    pub residual: Residual,
    pub witness: Option<Witness>,
    /// Number of ordered admissible triples.
    pub admissible: usize,
    /// Worst `|R_lkij X^i Y^j Z^k|` over admissible triples with X, Y in
    /// the same cluster.
    pub degenerate_residual: Residual,
    pub degenerate_witness: Option<Witness>,
    pub degenerate: usize,
    /// No admissible triple exists (e.g. a single eigenvalue).
    pub vacuous: bool,
}

/// Contracts `out[a, b, c, l] = T[slots] X_a X_b X_c` where the three
/// eigenvectors go into slots `p, q, r` of T and `l` is the remaining slot.
fn triple_contraction(t: &Tensor, vecs: &[Vec<f64>], slots: [usize; 3]) -> Tensor {
    let n = t.dim();
    let free = (0..4).find(|s| !slots.contains(s)).expect("one free slot");
    Tensor::from_fn(n, 4, |ix| {
        let (a, b, c, l) = (ix[0], ix[1], ix[2], ix[3]);
        let mut s = 0.0;
        let mut idx = [0usize; 4];
        idx[free] = l;
        for i in 0..n {
            idx[slots[0]] = i;
            let xi = vecs[a][i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..n {
                idx[slots[1]] = j;
                let yj = vecs[b][j];
                if yj == 0.0 {
                    continue;
                }
                for k in 0..n {
                    idx[slots[2]] = k;
                    s += t[idx] * xi * yj * vecs[c][k];
                }
            }
        }
        s
    })
}

/// Verifies that `R_ijkl X^i Y^j Z^k = 0` for every ordered triple of basis
/// eigenvectors with `cluster(X) != cluster(Z)` and `cluster(Y) != cluster(Z)`,
/// including `cluster(X) == cluster(Y)`, for which `R_lkij X^i Y^j Z^k` is
/// also checked. Normalization uses the largest contraction over all
/// triples. Ties keep the lexicographically first witness.
pub fn invariance_check(frame: &PointFrame, eig: &EigenStructure) -> InvarianceReport {
    invariance_check_with(&frame.riemann, eig)
}

pub fn invariance_check_with(riemann: &Tensor, eig: &EigenStructure) -> InvarianceReport {
    let n = riemann.dim();
    let main = triple_contraction(riemann, &eig.vectors, [0, 1, 2]);
    // R_lkij X^i Y^j Z^k: X in slot 2, Y in slot 3, Z in slot 1
    let degen = triple_contraction(riemann, &eig.vectors, [2, 3, 1]);
    let scale = main.max_abs().max(degen.max_abs());

    let mut worst = (0.0f64, None);
    let mut worst_degen = (0.0f64, None);
    let mut admissible = 0;
    let mut degenerate = 0;
    let cl = &eig.cluster_of;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if cl[a] == cl[c] || cl[b] == cl[c] {
                    continue;
                }
                admissible += 1;
                let same = cl[a] == cl[b];
                if same {
                    degenerate += 1;
                }
                for l in 0..n {
                    let v = main[[a, b, c, l]].abs();
                    if v > worst.0 || (v.is_nan() && !worst.0.is_nan()) || worst.1.is_none() {
                        worst = (v, Some(Witness { x: a, y: b, z: c, l }));
                    }
                    if same {
                        let d = degen[[a, b, c, l]].abs();
                        if d > worst_degen.0
                            || (d.is_nan() && !worst_degen.0.is_nan())
                            || worst_degen.1.is_none()
                        {
                            worst_degen = (d, Some(Witness { x: a, y: b, z: c, l }));
                        }
                    }
                }
            }
        }
    }
    InvarianceReport {
        residual: Residual { raw: worst.0, scale },
        witness: worst.1,
        admissible,
        degenerate_residual: Residual {
            raw: worst_degen.0,
            scale,
        },
        degenerate_witness: worst_degen.1,
        degenerate,
        vacuous: admissible == 0,
    }
}

/// The 3x3 system in the eigenvalues and its determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VandermondeSystem {
    /// Rows `[1, 1, 1]`, `[λ, μ, ν]`, `[μν, λν, λμ]`.
    pub matrix: [[f64; 3]; 3],
    /// Cofactor expansion along the first row.
    pub determinant: f64,
    /// `(λ - μ)(λ - ν)(ν - μ)`.
    pub factored: f64,
}

pub fn vandermonde_system(lambda: f64, mu: f64, nu: f64) -> VandermondeSystem {
    let m = [
        [1.0, 1.0, 1.0],
        [lambda, mu, nu],
        [mu * nu, lambda * nu, lambda * mu],
    ];
    let determinant = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    VandermondeSystem {
        matrix: m,
        determinant,
        factored: (lambda - mu) * (lambda - nu) * (nu - mu),
    }
}

/// Rows of the linear system for one eigenvector triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub triple: (usize, usize, usize),
    pub eigenvalues: (f64, f64, f64),
    /// `u[l] = (R_lijk, R_ljki, R_lkij) X^i Y^j Z^k`.
    pub unknowns: Vec<[f64; 3]>,
    /// Row residuals from the tensors themselves: first Bianchi of R,
    /// the cyclic identity, last-three Bianchi of K.
    pub rows: [Residual; 3],
    /// The same rows evaluated as `M u` with the eigenvalue matrix.
    pub matrix_rows: [Residual; 3],
}

/// Evaluates the three equations of the system on `(X, Y, Z)`.
pub fn proof_trace(
    frame: &PointFrame,
    b: &FieldFrame,
    eig: &EigenStructure,
    (a, bi, c): (usize, usize, usize),
) -> Result<ProofTrace> {
    require_sym2(b)?;
    let n = frame.dim();
    let r = &frame.riemann;
    let (x, y, z) = (&eig.vectors[a], &eig.vectors[bi], &eig.vectors[c]);
    let (lam, mu, nu) = (eig.values[a], eig.values[bi], eig.values[c]);

    let contract = |t: &dyn Fn(usize, usize, usize, usize) -> f64, l: usize| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += t(l, i, j, k) * x[i] * y[j] * z[k];
                }
            }
        }
        s
    };

    let (ident, _) = identity_tensor(&frame.riemann_up, &b.value);
    let kk = build_k(r, &frame.raise_second(&b.value)).k;

    let mut unknowns = Vec::with_capacity(n);
    let mut rows = [ResidualAcc::new(); 3];
    let mut mrows = [ResidualAcc::new(); 3];
    for l in 0..n {
        let u = [
            contract(&|l, i, j, k| r[[l, i, j, k]], l),
            contract(&|l, i, j, k| r[[l, j, k, i]], l),
            contract(&|l, i, j, k| r[[l, k, i, j]], l),
        ];
        unknowns.push(u);

        rows[0].sum(&u);
        rows[1].terms(&[lam * u[0], mu * u[1], nu * u[2]]);
        rows[1].violation(contract(&|l, i, j, k| ident[[i, j, k, l]], l));
        let kt = [
            contract(&|l, i, j, k| k_at(&kk, l, i, j, k), l),
            contract(&|l, i, j, k| k_at(&kk, l, j, k, i), l),
            contract(&|l, i, j, k| k_at(&kk, l, k, i, j), l),
        ];
        rows[2].sum(&kt);

        mrows[0].sum(&u);
        mrows[1].sum(&[lam * u[0], mu * u[1], nu * u[2]]);
        mrows[2].sum(&[mu * nu * u[0], lam * nu * u[1], lam * mu * u[2]]);
    }
    Ok(ProofTrace {
        triple: (a, bi, c),
        eigenvalues: (lam, mu, nu),
        unknowns,
        rows: rows.map(ResidualAcc::finish),
        matrix_rows: mrows.map(ResidualAcc::finish),
    })
}

fn k_at(k: &Tensor, a: usize, b: usize, c: usize, d: usize) -> f64 {
    k[[a, b, c, d]]
}
