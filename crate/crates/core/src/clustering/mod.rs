//! Clustering of embedded vertices.
//!
//! [`gmm_bic`] plays the role of a model-selecting Gaussian mixture fit,
//! [`kmeans`] is plain Lloyd with k-means++ seeding and [`robust_kmeans`]
//! minimizes the penalized objective that leaves outlying points unclustered.

mod gmm;
mod kmeans;
mod robust;

pub use gmm::{fit_gmm, gmm_bic, gmm_bic_with, GmmConfig, GmmFit};
pub use kmeans::{kmeans, kmeans_with, KmeansConfig};
pub use robust::{gamma, robust_kmeans, RobustKmeansConfig};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance, row_vec, Signature};

/// Penalty per unclustered vertex used throughout the experiments.
pub const DEFAULT_LAMBDA: f64 = 0.2;

/// A fitted partition of the rows of a point matrix.
///
/// Labels are 1-based; label 0 marks an unclustered (noise) point.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    /// `K x d`, row `k` is the center of label `k + 1`.
    pub centers: DMatrix<f64>,
    pub covariances: Vec<DMatrix<f64>>,
    pub weights: Vec<f64>,
    pub assignments: Vec<usize>,
    /// Criterion the fitter optimized: BIC for mixtures, within-cluster sum
    /// of squares for K-means and the penalized cost for robust K-means.
    pub objective: f64,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centers.nrows()
    }

    pub fn d(&self) -> usize {
        self.centers.ncols()
    }

    pub fn center(&self, label: usize) -> Vec<f64> {
        row_vec(&self.centers, label - 1)
    }

    /// Indices of the points carrying `label`.
    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == label).collect()
    }

    /// Indices of all clustered points, ascending.
    pub fn clustered(&self) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != 0).collect()
    }

    /// Builds a model from hard labels, using member means, maximum-likelihood
    /// covariances and member-count weights.
    pub fn from_labels(points: &DMatrix<f64>, k: usize, labels: Vec<usize>, objective: f64) -> Self {
        let d = points.ncols();
        let mut centers = DMatrix::zeros(k, d);
        let mut covariances = vec![DMatrix::zeros(d, d); k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            if l > 0 {
                counts[l - 1] += 1;
                for c in 0..d {
                    centers[(l - 1, c)] += points[(i, c)];
                }
            }
        }
        for kk in 0..k {
            if counts[kk] > 0 {
                for c in 0..d {
                    centers[(kk, c)] /= counts[kk] as f64;
                }
            }
        }
        for (i, &l) in labels.iter().enumerate() {
            if l > 0 {
                let diff: Vec<f64> = (0..d).map(|c| points[(i, c)] - centers[(l - 1, c)]).collect();
                let cov = &mut covariances[l - 1];
                for a in 0..d {
                    for b in 0..d {
                        cov[(a, b)] += diff[a] * diff[b];
                    }
                }
            }
        }
        for kk in 0..k {
            if counts[kk] > 0 {
                covariances[kk] /= counts[kk] as f64;
            }
        }
        let total: usize = counts.iter().sum();
        let weights = counts
            .iter()
            .map(|&c| if total > 0 { c as f64 / total as f64 } else { 1.0 / k as f64 })
            .collect();
        ClusterModel {
            centers,
            covariances,
            weights,
            assignments: labels,
            objective,
        }
    }

    /// Checks the structural invariants: weights on the simplex, symmetric
    /// positive-semidefinite covariances and labels in `0..=K`.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if self.covariances.len() != k || self.weights.len() != k {
            return Err(Error::Dimension("covariance or weight count differs from K".into()));
        }
        if self.weights.iter().any(|&w| w < 0.0) || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::validation("cluster weights", "not on the simplex"));
        }
        for cov in &self.covariances {
            if !crate::linalg::is_symmetric(cov, 1e-9) {
                return Err(Error::validation("covariance", "not symmetric"));
            }
            if cov.nrows() > 0 && cov.clone().symmetric_eigenvalues().min() < -1e-9 {
                return Err(Error::validation("covariance", "not positive semidefinite"));
            }
        }
        if let Some(&l) = self.assignments.iter().find(|&&l| l > k) {
            return Err(Error::validation("assignments", format!("label {l} exceeds K = {k}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> ClusterModelJson {
        let flat = |m: &DMatrix<f64>| (0..m.nrows()).flat_map(|r| row_vec(m, r)).collect();
        ClusterModelJson {
            k: self.k(),
            d: self.d(),
            centers: (0..self.k()).map(|r| row_vec(&self.centers, r)).collect(),
            covariances: self.covariances.iter().map(flat).collect(),
            weights: self.weights.clone(),
            assignments: self.assignments.clone(),
            objective: self.objective,
        }
    }

    pub fn from_json(j: ClusterModelJson) -> Result<Self> {
        let (k, d) = (j.k, j.d);
        if j.centers.len() != k || j.centers.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("centers do not match k x d".into()));
        }
        if j.covariances.len() != k || j.covariances.iter().any(|c| c.len() != d * d) {
            return Err(Error::Dimension("covariances do not match k blocks of d x d".into()));
        }
        let model = ClusterModel {
            centers: DMatrix::from_fn(k, d, |r, c| j.centers[r][c]),
            covariances: j.covariances.iter().map(|c| DMatrix::from_row_slice(d, d, c)).collect(),
            weights: j.weights,
            assignments: j.assignments,
            objective: j.objective,
        };
        model.validate()?;
        Ok(model)
    }
}

/// JSON form of a [`ClusterModel`]; covariances are flattened row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterModelJson {
    pub k: usize,
    pub d: usize,
    pub centers: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub assignments: Vec<usize>,
    pub objective: f64,
}

/// Nearest center by squared distance; ties go to the lower index.
pub(crate) fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        let d2 = crate::linalg::squared_distance(point, c);
        if d2 < best.1 {
            best = (k, d2);
        }
    }
    best
}

/// Block probability estimate `xi I_{p,q} xi^T` from cluster centers.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEstimate {
    /// Entries clamped into `[0, 1]`.
    pub matrix: DMatrix<f64>,
    /// Number of entries that had to be clamped.
    pub clamped: usize,
}

pub fn estimate_block_matrix(centers: &DMatrix<f64>, signature: Signature) -> Result<BlockEstimate> {
    if centers.ncols() != signature.dim() {
        return Err(Error::Dimension(format!(
            "centers have {} columns, signature {signature}",
            centers.ncols()
        )));
    }
    let raw = signature.gram(centers, centers);
    let clamped = raw.iter().filter(|v| !(0.0..=1.0).contains(*v)).count();
    Ok(BlockEstimate {
        matrix: raw.map(|v| v.clamp(0.0, 1.0)),
        clamped,
    })
}

/// Largest distance from a clustered point to its own center.
pub fn cluster_radius(model: &ClusterModel, points: &DMatrix<f64>) -> f64 {
    model
        .assignments
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0)
        .map(|(i, &l)| distance(&row_vec(points, i), &model.center(l)))
        .fold(0.0, f64::max)
}

/// `r + log_base(n)^2 / sqrt(n)`.
pub fn lambda_heuristic(radius: f64, n_plus_m: usize, log_base: f64) -> f64 {
    let n = n_plus_m as f64;
    let l = n.ln() / log_base.ln();
    radius + l * l / n.sqrt()
}

/// Penalty suggested for robust K-means on a graph with `n_plus_m` vertices,
/// from the widest cluster of a model fitted on clean data (natural log).
pub fn suggest_lambda(clean_model: &ClusterModel, points: &DMatrix<f64>, n_plus_m: usize) -> f64 {
    lambda_heuristic(cluster_radius(clean_model, points), n_plus_m, std::f64::consts::E)
}

/// Scales every row to unit Euclidean norm.
pub fn sphere_project(points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = points.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm == 0.0 {
            return Err(Error::ZeroRow(i));
        }
        row /= norm;
    }
    Ok(out)
}
