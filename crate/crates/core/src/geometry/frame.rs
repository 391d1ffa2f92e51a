use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::chart::{ChartManifold, FieldKind, SINGULAR_METRIC_RATIO};
use super::jet::{Jet, JetAlgebra};
use super::tensor::{Tensor, TensorOf};
use crate::error::{Error, Result};

/// Engine-computed field names, resolved when not user-declared.
pub const RICCI: &str = "ricci";
pub const SCHOUTEN: &str = "schouten";

type JetTensor = TensorOf<Jet>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Lower,
    Upper,
}

/// Numeric values of one field at a point.
#[derive(Debug, Clone)]
pub struct FieldFrame {
    pub kind: FieldKind,
    /// `b[[i, j]]` or `beta[[i]]`.
    pub value: Tensor,
    /// `nabla[[i, j, k]] = ∇_i b_jk`, or `nabla[[i, j]] = ∇_i β_j`.
    pub nabla: Tensor,
    /// `nabla2[[a, i, j, k]] = ∇_a ∇_i b_jk` (two-index fields only).
    pub nabla2: Option<Tensor>,
}

/// Every curvature quantity at one sample point.
///
/// Index layouts (see `conventions`):
/// `christoffel[[m, i, j]] = Γ^m_ij`, `riemann_up[[j, k, l, m]] = R_jkl^m`,
/// `riemann[[i, j, k, l]] = R_ijk^m g_ml`, `nabla_riemann_up[[a, j, k, l, m]] = ∇_a R_jkl^m`.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub point: Vec<f64>,
    pub g: Tensor,
    pub g_inv: Tensor,
    pub christoffel: Tensor,
    pub riemann_up: Tensor,
    pub riemann: Tensor,
    pub ricci: Tensor,
    pub scalar: f64,
    /// All-down Weyl tensor `C_jklm`; `None` for `n < 3`.
    pub weyl: Option<Tensor>,
    pub nabla_g: Tensor,
    pub nabla_riemann_up: Tensor,
    pub nabla_ricci: Tensor,
    pub nabla_scalar: Tensor,
    pub fields: BTreeMap<String, FieldFrame>,
}

impl PointFrame {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn field(&self, name: &str) -> Result<&FieldFrame> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::UnknownField(name.to_string()))
    }

    /// `b_i^j = g^jm b_im`.
    pub fn raise_second(&self, b: &Tensor) -> Tensor {
        let n = self.dim();
        Tensor::from_fn(n, 2, |ix| {
            (0..n).map(|m| self.g_inv[[ix[1], m]] * b[[ix[0], m]]).sum()
        })
    }

    /// `C_jkl^m`; `None` for `n < 3`.
    pub fn weyl_up(&self) -> Option<Tensor> {
        let c = self.weyl.as_ref()?;
        let n = self.dim();
        Some(Tensor::from_fn(n, 4, |ix| {
            (0..n)
                .map(|p| c[[ix[0], ix[1], ix[2], p]] * self.g_inv[[p, ix[3]]])
                .sum()
        }))
    }

    /// `∇_m R_jkl^m` as `[[j, k, l]]`.
    pub fn riemann_divergence(&self) -> Tensor {
        let n = self.dim();
        Tensor::from_fn(n, 3, |ix| {
            (0..n)
                .map(|m| self.nabla_riemann_up[[m, ix[0], ix[1], ix[2], m]])
                .sum()
        })
    }

    /// `∇_a R_jklm` with the last index lowered.
    pub fn nabla_riemann(&self) -> Tensor {
        let n = self.dim();
        Tensor::from_fn(n, 5, |ix| {
            (0..n)
                .map(|p| self.nabla_riemann_up[[ix[0], ix[1], ix[2], ix[3], p]] * self.g[[p, ix[4]]])
                .sum()
        })
    }

    /// `∇_a C_jklm`; `None` for `n < 3`.
    pub fn nabla_weyl(&self) -> Option<Tensor> {
        let n = self.dim();
        if n < 3 {
            return None;
        }
        let nr = self.nabla_riemann();
        let mut out = Tensor::zeros(n, 5);
        for a in 0..n {
            let slice_r = Tensor::from_fn(n, 4, |ix| nr[[a, ix[0], ix[1], ix[2], ix[3]]]);
            let slice_ric = Tensor::from_fn(n, 2, |ix| self.nabla_ricci[[a, ix[0], ix[1]]]);
            let c = weyl_from(&slice_r, &slice_ric, self.nabla_scalar[[a]], &self.g);
            for (k, v) in c.as_slice().iter().enumerate() {
                out.as_mut_slice()[a * n.pow(4) + k] = *v;
            }
        }
        Some(out)
    }

    /// `∇_m C_jkl^m` as `[[j, k, l]]`; `None` for `n < 3`.
    pub fn weyl_divergence(&self) -> Option<Tensor> {
        let nc = self.nabla_weyl()?;
        let n = self.dim();
        Some(Tensor::from_fn(n, 3, |ix| {
            let mut s = 0.0;
            for a in 0..n {
                for m in 0..n {
                    s += self.g_inv[[a, m]] * nc[[a, ix[0], ix[1], ix[2], m]];
                }
            }
            s
        }))
    }
}

/// All-down Weyl tensor from the Ricci decomposition:
/// `C_jklm = R_jklm - (g_jl P_km - g_jm P_kl - g_kl P_jm + g_km P_jl)/(n-2)
///           + R (g_jl g_km - g_jm g_kl)/((n-1)(n-2))`
/// with `P = Ric`. Linear in `(R, Ric, scalar)` for fixed `g`, so it also
/// maps covariant derivatives to covariant derivatives.
pub(crate) fn weyl_from(riemann: &Tensor, ricci: &Tensor, scalar: f64, g: &Tensor) -> Tensor {
    let n = g.dim();
    let nf = n as f64;
    let a = 1.0 / (nf - 2.0);
    let b = scalar / ((nf - 1.0) * (nf - 2.0));
    Tensor::from_fn(n, 4, |ix| {
        let (j, k, l, m) = (ix[0], ix[1], ix[2], ix[3]);
        riemann[[j, k, l, m]]
            - a * (g[[j, l]] * ricci[[k, m]] - g[[j, m]] * ricci[[k, l]] - g[[k, l]] * ricci[[j, m]]
                + g[[k, m]] * ricci[[j, l]])
            + b * (g[[j, l]] * g[[k, m]] - g[[j, m]] * g[[k, l]])
    })
}

struct Engine<'a> {
    alg: &'a JetAlgebra,
    n: usize,
    gamma: JetTensor,
}

impl Engine<'_> {
    /// Covariant derivative of a jet tensor; the derivative index is
    /// prepended: `out[[a, I]] = ∇_a t[[I]]`.
    fn nabla(&self, t: &JetTensor, slots: &[Slot]) -> JetTensor {
        let n = self.n;
        let alg = self.alg;
        let rank = t.rank();
        assert_eq!(rank, slots.len());
        let mut scratch = vec![0usize; rank];
        TensorOf::from_fn(n, rank + 1, |ix| {
            let a = ix[0];
            let idx = &ix[1..];
            let mut acc = alg.deriv(t.get(idx), a);
            for (s, slot) in slots.iter().enumerate() {
                scratch.copy_from_slice(idx);
                for p in 0..n {
                    scratch[s] = p;
                    let term = match slot {
                        // - Γ^p_{a i_s} T[.. p ..]
                        Slot::Lower => alg.scale(&self.gamma[[p, a, idx[s]]], -1.0),
                        // + Γ^{i_s}_{a p} T[.. p ..]
                        Slot::Upper => self.gamma[[idx[s], a, p]].clone(),
                    };
                    alg.mul_add(&mut acc, &term, t.get(&scratch));
                }
            }
            acc
        })
    }
}

fn values(t: &JetTensor) -> Tensor {
    t.map(Jet::value)
}

impl ChartManifold {
    /// Evaluates every curvature quantity and every declared field at `point`.
    pub fn frame(&self, point: &[f64]) -> Result<PointFrame> {
        let n = self.dim();
        let alg = &self.algebra;
        let order = alg.order();
        if point.len() != n {
            return Err(Error::PointLength {
                expected: n,
                found: point.len(),
            });
        }

        let mut g_jets = Vec::with_capacity(n * n);
        for table in &self.metric_tables {
            g_jets.push(alg.from_table(table, point)?);
        }
        let g_jets = TensorOf::from_fn(n, 2, |ix| g_jets[ix[0] * n + ix[1]].clone());
        let g0 = values(&g_jets);

        let eig = SymmetricEigen::new(g0.to_matrix()).eigenvalues;
        let (min, max) = (eig.min(), eig.max());
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                point: point.to_vec(),
                min_eigenvalue: min,
            });
        }
        if min / max < SINGULAR_METRIC_RATIO {
            return Err(Error::SingularMetric {
                point: point.to_vec(),
                ratio: min / max,
            });
        }
        let g0_inv: DMatrix<f64> = g0
            .to_matrix()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite {
                point: point.to_vec(),
                min_eigenvalue: min,
            })?
            .inverse();

        // g^{-1} = sum_p (-G0 h)^p G0 with h = g - g(p); h has no constant
        // term, so the series terminates at the jet order.
        let h = TensorOf::from_fn(n, 2, |ix| {
            alg.sub(&g_jets[[ix[0], ix[1]]], &alg.constant(g0[[ix[0], ix[1]]], order))
        });
        let minus_g0h = TensorOf::from_fn(n, 2, |ix| {
            let mut acc = alg.zero(order);
            for k in 0..n {
                let c = alg.constant(-g0_inv[(ix[0], k)], order);
                alg.mul_add(&mut acc, &c, &h[[k, ix[1]]]);
            }
            acc
        });
        let identity =
            TensorOf::from_fn(n, 2, |ix| alg.constant(if ix[0] == ix[1] { 1.0 } else { 0.0 }, order));
        let mut term = identity.clone();
        let mut series = identity;
        for _ in 0..order {
            term = TensorOf::from_fn(n, 2, |ix| {
                let mut acc = alg.zero(order);
                for k in 0..n {
                    alg.mul_add(&mut acc, &term[[ix[0], k]], &minus_g0h[[k, ix[1]]]);
                }
                acc
            });
            series = TensorOf::from_fn(n, 2, |ix| alg.add(&series[[ix[0], ix[1]]], &term[[ix[0], ix[1]]]));
        }
        let g_inv_jets = TensorOf::from_fn(n, 2, |ix| {
            let mut acc = alg.zero(order);
            for k in 0..n {
                let c = alg.constant(g0_inv[(k, ix[1])], order);
                alg.mul_add(&mut acc, &series[[ix[0], k]], &c);
            }
            acc
        });

        // Γ_{k,ij} = (∂_i g_jk + ∂_j g_ik - ∂_k g_ij) / 2
        let dg = TensorOf::from_fn(n, 3, |ix| alg.deriv(&g_jets[[ix[1], ix[2]]], ix[0]));
        let gamma_first = TensorOf::from_fn(n, 3, |ix| {
            let (k, i, j) = (ix[0], ix[1], ix[2]);
            let s = alg.sub(&alg.add(&dg[[i, j, k]], &dg[[j, i, k]]), &dg[[k, i, j]]);
            alg.scale(&s, 0.5)
        });
        let gamma = TensorOf::from_fn(n, 3, |ix| {
            let mut acc = alg.zero(order - 1);
            for k in 0..n {
                alg.mul_add(&mut acc, &g_inv_jets[[ix[0], k]], &gamma_first[[k, ix[1], ix[2]]]);
            }
            acc
        });

        // R_ijk^m = ∂_j Γ^m_ik - ∂_i Γ^m_jk + Γ^m_jp Γ^p_ik - Γ^m_ip Γ^p_jk
        let riem_up = TensorOf::from_fn(n, 4, |ix| {
            let (i, j, k, m) = (ix[0], ix[1], ix[2], ix[3]);
            let mut acc = alg.sub(&alg.deriv(&gamma[[m, i, k]], j), &alg.deriv(&gamma[[m, j, k]], i));
            for p in 0..n {
                alg.mul_add(&mut acc, &gamma[[m, j, p]], &gamma[[p, i, k]]);
                let neg = alg.scale(&gamma[[m, i, p]], -1.0);
                alg.mul_add(&mut acc, &neg, &gamma[[p, j, k]]);
            }
            acc
        });

        // R_kl = -R_mkl^m
        let ricci = TensorOf::from_fn(n, 2, |ix| {
            let mut acc = alg.zero(order - 2);
            for m in 0..n {
                acc = alg.sub(&acc, &riem_up[[m, ix[0], ix[1], m]]);
            }
            acc
        });
        let mut scalar = alg.zero(order - 2);
        for k in 0..n {
            for l in 0..n {
                alg.mul_add(&mut scalar, &g_inv_jets[[k, l]], &ricci[[k, l]]);
            }
        }

        let engine = Engine {
            alg,
            n,
            gamma: gamma.clone(),
        };
        let lower2 = [Slot::Lower, Slot::Lower];
        let lower3 = [Slot::Lower, Slot::Lower, Slot::Lower];

        let nabla_g = values(&engine.nabla(&g_jets, &lower2));
        let nabla_riemann_up = values(&engine.nabla(
            &riem_up,
            &[Slot::Lower, Slot::Lower, Slot::Lower, Slot::Upper],
        ));
        let nabla_ricci_jets = engine.nabla(&ricci, &lower2);
        let nabla_scalar = TensorOf::from_fn(n, 1, |ix| alg.deriv(&scalar, ix[0]).value());

        let g = g0;
        let g_inv = values(&g_inv_jets);
        let riemann_up = values(&riem_up);
        let riemann = Tensor::from_fn(n, 4, |ix| {
            (0..n)
                .map(|m| riemann_up[[ix[0], ix[1], ix[2], m]] * g[[m, ix[3]]])
                .sum()
        });
        let ricci_v = values(&ricci);
        let scalar_v = scalar.value();
        let weyl = (n >= 3).then(|| weyl_from(&riemann, &ricci_v, scalar_v, &g));

        let two_index = |jets: &JetTensor, first: Option<JetTensor>| {
            let nabla1 = first.unwrap_or_else(|| engine.nabla(jets, &lower2));
            let nabla2 = engine.nabla(&nabla1, &lower3);
            (values(jets), values(&nabla1), values(&nabla2))
        };

        let mut fields = BTreeMap::new();
        for (name, def) in self.fields() {
            let mut comps = Vec::with_capacity(def.tables.len());
            for table in &def.tables {
                comps.push(alg.from_table(table, point)?);
            }
            let frame = match def.kind {
                FieldKind::Covector => {
                    let jets = TensorOf::from_fn(n, 1, |ix| comps[ix[0]].clone());
                    FieldFrame {
                        kind: def.kind,
                        value: values(&jets),
                        nabla: values(&engine.nabla(&jets, &[Slot::Lower])),
                        nabla2: None,
                    }
                }
                FieldKind::Sym2 | FieldKind::Tensor2 => {
                    let jets = TensorOf::from_fn(n, 2, |ix| comps[ix[0] * n + ix[1]].clone());
                    let (value, nabla, nabla2) = two_index(&jets, None);
                    FieldFrame {
                        kind: def.kind,
                        value,
                        nabla,
                        nabla2: Some(nabla2),
                    }
                }
            };
            fields.insert(name.clone(), frame);
        }
        if !fields.contains_key(RICCI) {
            let (value, nabla, nabla2) = two_index(&ricci, Some(nabla_ricci_jets.clone()));
            fields.insert(
                RICCI.to_string(),
                FieldFrame {
                    kind: FieldKind::Sym2,
                    value,
                    nabla,
                    nabla2: Some(nabla2),
                },
            );
        }
        if !fields.contains_key(SCHOUTEN) {
            // S = Ric - R/(2(n-1)) g
            let c = -1.0 / (2.0 * (n as f64 - 1.0));
            let s = TensorOf::from_fn(n, 2, |ix| {
                let mut acc = ricci[[ix[0], ix[1]]].clone();
                let cr = alg.scale(&scalar, c);
                alg.mul_add(&mut acc, &cr, &g_jets[[ix[0], ix[1]]]);
                acc
            });
            let (value, nabla, nabla2) = two_index(&s, None);
            fields.insert(
                SCHOUTEN.to_string(),
                FieldFrame {
                    kind: FieldKind::Sym2,
                    value,
                    nabla,
                    nabla2: Some(nabla2),
                },
            );
        }

        Ok(PointFrame {
            point: point.to_vec(),
            christoffel: values(&gamma),
            g,
            g_inv,
            riemann_up,
            riemann,
            ricci: ricci_v,
            scalar: scalar_v,
            weyl,
            nabla_g,
            nabla_riemann_up,
            nabla_ricci: values(&nabla_ricci_jets),
            nabla_scalar,
            fields,
        })
    }
}
