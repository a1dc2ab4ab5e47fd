//! Mahalanobis nomination and its evaluation curves.

mod eval;

pub use eval::{precision_at_k, rank_at_k_curve, write_curve_csv, EvalCurve};

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::clustering::{gmm_bic_with, ClusterModel, GmmConfig};
use crate::error::{Error, Result, StageExt};
use crate::io::fmt_f64;
use crate::linalg::{pinv, select_rows, vstack};
use crate::regularization::orthogonal_procrustes;

/// Relative singular-value cutoff of the covariance pseudoinverses.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Ranked candidates for one query (or one set of queries).
#[derive(Debug, Clone, PartialEq)]
pub struct NominationList {
    /// Clean-graph vertices of interest the list was built for.
    pub queries: Vec<usize>,
    /// `(candidate, score)` by increasing score, ties by candidate id.
    pub ranked: Vec<(usize, f64)>,
}

impl NominationList {
    /// 1-based rank of `candidate`, if present.
    pub fn rank_of(&self, candidate: usize) -> Option<usize> {
        self.ranked.iter().position(|&(c, _)| c == candidate).map(|p| p + 1)
    }

    /// Rewrites candidate ids through `map` (for example trimmed to original).
    pub fn translate(mut self, map: &[usize]) -> Self {
        for (c, _) in self.ranked.iter_mut() {
            *c = map[*c];
        }
        self
    }
}

/// Symmetric Mahalanobis score `max(D_u, D_v)` where each side uses the
/// pseudoinverse covariance of its own cluster.
pub fn mahalanobis_delta(u: &DVector<f64>, v: &DVector<f64>, pinv_u: &DMatrix<f64>, pinv_v: &DMatrix<f64>) -> f64 {
    let diff = u - v;
    let form = |p: &DMatrix<f64>| diff.dot(&(p * &diff)).max(0.0).sqrt();
    form(pinv_u).max(form(pinv_v))
}

struct Scorer {
    pinvs: Vec<DMatrix<f64>>,
    labels: Vec<usize>,
    rows: Vec<DVector<f64>>,
    n1: usize,
}

impl Scorer {
    fn new(model: &ClusterModel, points_1: &DMatrix<f64>, points_2: &DMatrix<f64>) -> Result<Self> {
        let n1 = points_1.nrows();
        let stacked = vstack(points_1, points_2)?;
        if model.assignments.len() != stacked.nrows() {
            return Err(Error::Dimension(format!(
                "model labels {} rows but {} points were given",
                model.assignments.len(),
                stacked.nrows()
            )));
        }
        Ok(Scorer {
            pinvs: model.covariances.iter().map(|c| pinv(c, PINV_CUTOFF)).collect(),
            labels: model.assignments.clone(),
            rows: (0..stacked.nrows()).map(|i| stacked.row(i).transpose()).collect(),
            n1,
        })
    }

    fn delta(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (u, self.n1 + v);
        mahalanobis_delta(
            &self.rows[a],
            &self.rows[b],
            &self.pinvs[self.labels[a] - 1],
            &self.pinvs[self.labels[b] - 1],
        )
    }

    fn candidates(&self) -> Vec<usize> {
        (0..self.rows.len() - self.n1).filter(|&v| self.labels[self.n1 + v] != 0).collect()
    }

    fn check_query(&self, u: usize) -> Result<()> {
        if u >= self.n1 {
            return Err(Error::validation("query", format!("vertex {u} is not in the clean graph")));
        }
        if self.labels[u] == 0 {
            return Err(Error::UnclusteredQuery(u));
        }
        Ok(())
    }
}

fn sorted(mut ranked: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked
}

/// One list per query, ranking every clustered candidate of `points_2` by
/// Mahalanobis score. `model` must be fitted on `[points_1; points_2]`.
pub fn mahalanobis_rank(
    model: &ClusterModel,
    points_1: &DMatrix<f64>,
    points_2: &DMatrix<f64>,
    queries: &[usize],
) -> Result<Vec<NominationList>> {
    let s = Scorer::new(model, points_1, points_2)?;
    let cands = s.candidates();
    queries
        .iter()
        .map(|&u| {
            s.check_query(u)?;
            Ok(NominationList {
                queries: vec![u],
                ranked: sorted(cands.iter().map(|&v| (v, s.delta(u, v))).collect()),
            })
        })
        .collect()
}

/// A single list for a set of queries, scoring each candidate by its
/// smallest Mahalanobis score to any query.
pub fn mahalanobis_rank_set(
    model: &ClusterModel,
    points_1: &DMatrix<f64>,
    points_2: &DMatrix<f64>,
    queries: &[usize],
) -> Result<NominationList> {
    if queries.is_empty() {
        return Err(Error::validation("queries", "need at least one vertex of interest"));
    }
    let s = Scorer::new(model, points_1, points_2)?;
    for &u in queries {
        s.check_query(u)?;
    }
    let ranked = s
        .candidates()
        .into_iter()
        .map(|v| {
            let score = queries.iter().map(|&u| s.delta(u, v)).fold(f64::INFINITY, f64::min);
            (v, score)
        })
        .collect();
    Ok(NominationList {
        queries: queries.to_vec(),
        ranked: sorted(ranked),
    })
}

/// Clusters the stacked aligned embeddings jointly and ranks per query.
pub fn nominate_aligned(
    aligned_1: &DMatrix<f64>,
    points_2: &DMatrix<f64>,
    queries: &[usize],
    gmm: &GmmConfig,
    seed: u64,
) -> Result<Vec<NominationList>> {
    let joint = gmm_bic_with(&vstack(aligned_1, points_2)?, gmm, seed).stage("joint clustering")?;
    mahalanobis_rank(&joint, aligned_1, points_2, queries).stage("rank candidates")
}

/// Aligns `embedding_1` to `embedding_2` by Procrustes on seed rows, then
/// clusters jointly and ranks. Seeds are `(clean vertex, contaminated
/// vertex)` pairs.
pub fn nominate_with_seeds(
    embedding_1: &DMatrix<f64>,
    embedding_2: &DMatrix<f64>,
    seeds: &[(usize, usize)],
    queries: &[usize],
    gmm: &GmmConfig,
    seed: u64,
) -> Result<Vec<NominationList>> {
    if seeds.is_empty() {
        return Err(Error::validation("seeds", "need at least one seed pair"));
    }
    if let Some(&(u, v)) = seeds.iter().find(|&&(u, v)| u >= embedding_1.nrows() || v >= embedding_2.nrows()) {
        return Err(Error::validation("seed pair", format!("({u}, {v}) out of range")));
    }
    let src: Vec<usize> = seeds.iter().map(|s| s.0).collect();
    let tgt: Vec<usize> = seeds.iter().map(|s| s.1).collect();
    let w = orthogonal_procrustes(&select_rows(embedding_1, &src), &select_rows(embedding_2, &tgt))
        .stage("seeded alignment")?
        .w;
    nominate_aligned(&(embedding_1 * w), embedding_2, queries, gmm, seed)
}

/// CSV with columns `query_id,rank,candidate_id,score`; set lists use the
/// first query id.
pub fn format_nominations_csv(lists: &[NominationList]) -> String {
    let mut out = String::from("query_id,rank,candidate_id,score\n");
    for list in lists {
        let q = list.queries.first().copied().unwrap_or_default();
        for (r, (c, s)) in list.ranked.iter().enumerate() {
            let _ = writeln!(out, "{q},{},{c},{}", r + 1, fmt_f64(*s));
        }
    }
    out
}

pub fn write_nominations_csv(path: impl AsRef<Path>, lists: &[NominationList]) -> Result<()> {
    std::fs::write(path, format_nominations_csv(lists))?;
    Ok(())
}
