use nalgebra::DMatrix;

use super::{check_unit, sample_coupled, sample_independent};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{is_symmetric, symmetric_eigen, Signature};
use crate::rng::rng_from;

/// Rounding slack tolerated when validating probabilities; values inside the
/// slack are clamped.
const FEASIBILITY_SLACK: f64 = 1e-10;

/// Generalized random dot product graph with fixed latent positions.
#[derive(Debug, Clone, PartialEq)]
pub struct GrdpgSpec {
    x: DMatrix<f64>,
    signature: Signature,
    nu: f64,
}

impl GrdpgSpec {
    /// Validates the signature and that every pairwise probability
    /// `nu * x_i^T I_{p,q} x_j` lies in `[0, 1]`.
    pub fn new(x: DMatrix<f64>, signature: Signature, nu: f64) -> Result<Self> {
        if signature.p == 0 {
            return Err(Error::validation("signature", "p must be at least 1"));
        }
        if signature.dim() != x.ncols() {
            return Err(Error::validation(
                "signature",
                format!("{signature} does not match {} columns", x.ncols()),
            ));
        }
        check_unit("sparsity", nu)?;
        let spec = GrdpgSpec { x, signature, nu };
        spec.check_feasible()?;
        Ok(spec)
    }

    fn check_feasible(&self) -> Result<()> {
        let n = self.x.nrows();
        let rows = crate::linalg::rows_of(&self.x);
        for i in 0..n {
            for j in (i + 1)..n {
                let prob = self.nu * self.signature.form(&rows[i], &rows[j]);
                if !(-FEASIBILITY_SLACK..=1.0 + FEASIBILITY_SLACK).contains(&prob) {
                    return Err(Error::Infeasible { i, j, prob });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn positions(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Dense probability matrix with a zero diagonal.
    pub fn probabilities(&self) -> DMatrix<f64> {
        let mut p = self.signature.gram(&self.x, &self.x) * self.nu;
        p.apply(|v| *v = v.clamp(0.0, 1.0));
        p.fill_diagonal(0.0);
        p
    }
}

/// Samples a GRDPG graph.
pub fn sample_grdpg(spec: &GrdpgSpec, seed: u64) -> Graph {
    let p = spec.probabilities();
    sample_independent(spec.n(), &mut rng_from(seed), |i, j| p[(i, j)])
}

/// Samples a `rho`-correlated GRDPG pair.
pub fn sample_correlated_grdpg(spec: &GrdpgSpec, rho: f64, seed: u64) -> Result<(Graph, Graph)> {
    check_unit("correlation", rho)?;
    let p = spec.probabilities();
    Ok(sample_coupled(spec.n(), rho, &mut rng_from(seed), |i, j| p[(i, j)]))
}

/// Latent positions reproducing `nu * B` exactly under the indefinite form.
///
/// Returns a `K x d` matrix whose row `k` is the position of block `k`, with
/// `d` the rank of `B` and the signature given by its eigenvalue signs.
/// Columns for positive eigenvalues come first.
pub fn sbm_latent_positions(b: &DMatrix<f64>, nu: f64) -> Result<(DMatrix<f64>, Signature)> {
    if !is_symmetric(b, 1e-12) {
        return Err(Error::validation("block matrix", "must be square and symmetric"));
    }
    let scaled = b * nu;
    let (vals, vecs) = symmetric_eigen(&scaled);
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = scale * 1e-12 * b.nrows() as f64;
    let mut pos: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol).collect();
    let mut neg: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < -tol).collect();
    pos.sort_by(|&a, &c| vals[c].total_cmp(&vals[a]));
    neg.sort_by(|&a, &c| vals[a].total_cmp(&vals[c]));
    if pos.is_empty() {
        return Err(Error::DegenerateSpectrum("block matrix has no positive eigenvalue".into()));
    }
    let sig = Signature::new(pos.len(), neg.len());
    let cols: Vec<usize> = pos.into_iter().chain(neg).collect();
    let k = b.nrows();
    let x = DMatrix::from_fn(k, cols.len(), |r, c| vecs[(r, cols[c])] * vals[cols[c]].abs().sqrt());
    Ok((x, sig))
}

impl GrdpgSpec {
    /// GRDPG equivalent of an SBM with the given labels; `nu` is folded into
    /// the positions.
    pub fn from_blocks(b: &DMatrix<f64>, nu: f64, labels: &[usize]) -> Result<Self> {
        let (rows, sig) = sbm_latent_positions(b, nu)?;
        let x = DMatrix::from_fn(labels.len(), rows.ncols(), |i, c| rows[(labels[i], c)]);
        GrdpgSpec::new(x, sig, 1.0)
    }
}
