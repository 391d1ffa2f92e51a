use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointFrame, Tensor};
use crate::residual::{Residual, ResidualAcc};

/// Default relative cluster tolerance.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Spectrum of `b_i^j = g^jm b_im` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenStructure {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[a]` holds the components `v^i` of the a-th eigenvector;
    /// the set is orthonormal for `g`.
    pub vectors: Vec<Vec<f64>>,
    /// Basis indices grouped by eigenvalue cluster, in ascending order.
    pub clusters: Vec<Vec<usize>>,
    /// `cluster_of[a]` is the cluster of basis vector `a`.
    pub cluster_of: Vec<usize>,
    pub cluster_tol: f64,
}

impl EigenStructure {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Representative eigenvalue (mean) of each cluster.
    pub fn cluster_values(&self) -> Vec<f64> {
        self.clusters
            .iter()
            .map(|c| c.iter().map(|&a| self.values[a]).sum::<f64>() / c.len() as f64)
            .collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }
}

/// Eigen-decomposes `b_i^j` through the symmetric-definite pencil
/// `(b, g)`: with `g = L L^T`, the symmetric matrix `L^-1 b L^-T` has the
/// same eigenvalues and its orthonormal eigenvectors `y` map to
/// g-orthonormal `v = L^-T y`.
pub fn eigendecompose(g: &Tensor, b: &Tensor, cluster_tol: f64) -> Result<EigenStructure> {
    let n = g.dim();
    let gm = g.to_matrix();
    let chol = gm.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        point: vec![],
        min_eigenvalue: SymmetricEigen::new(gm.clone()).eigenvalues.min(),
    })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .expect("Cholesky factor of a positive definite matrix is invertible");
    let bm = b.to_matrix();
    let bm = (&bm + bm.transpose()) * 0.5;
    let reduced = &l_inv * bm * l_inv.transpose();
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&a| eig.eigenvalues[a]).collect();
    let back: DMatrix<f64> = l_inv.transpose();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&a| {
            let v = &back * eig.eigenvectors.column(a);
            v.iter().copied().collect()
        })
        .collect();

    let spread = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = cluster_tol * spread;
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for a in 1..n {
        let gap = values[a] - values[a - 1];
        if gap > 0.5 * threshold && gap <= 2.0 * threshold {
            return Err(Error::ClusterAmbiguity { gap, threshold });
        }
        if gap <= threshold {
            clusters.last_mut().expect("non-empty").push(a);
        } else {
            clusters.push(vec![a]);
        }
    }
    let mut cluster_of = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &a in members {
            cluster_of[a] = c;
        }
    }
    Ok(EigenStructure {
        values,
        vectors,
        clusters,
        cluster_of,
        cluster_tol,
    })
}

/// Eigen-decomposition of a field at a frame.
pub fn eigendecompose_frame(frame: &PointFrame, b: &Tensor, cluster_tol: f64) -> Result<EigenStructure> {
    eigendecompose(&frame.g, b, cluster_tol).map_err(|e| match e {
        Error::NotPositiveDefinite { min_eigenvalue, .. } => Error::NotPositiveDefinite {
            point: frame.point.clone(),
            min_eigenvalue,
        },
        e => e,
    })
}

/// `max |b_i^j v^i - λ v^j|` over all eigenpairs.
pub fn eigen_residual(g_inv: &Tensor, b: &Tensor, eig: &EigenStructure) -> Residual {
    let n = b.dim();
    let mut acc = ResidualAcc::new();
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for m in 0..n {
                    s += g_inv[[j, m]] * b[[i, m]] * v[i];
                }
            }
            acc.terms(&[s, lambda * v[j]]);
            acc.violation(s - lambda * v[j]);
        }
    }
    acc.finish()
}

/// `max |g(v_a, v_b) - δ_ab|`.
pub fn gram_residual(g: &Tensor, eig: &EigenStructure) -> Residual {
    let n = g.dim();
    let mut acc = ResidualAcc::new();
    for (a, va) in eig.vectors.iter().enumerate() {
        for (b, vb) in eig.vectors.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += g[[i, j]] * va[i] * vb[j];
                }
            }
            acc.term(s);
            acc.violation(s - if a == b { 1.0 } else { 0.0 });
        }
    }
    acc.finish()
}
