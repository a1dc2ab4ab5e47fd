//! Adjacency spectral embedding, elbow-based dimension selection and
//! signature estimation.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::{format_matrix_csv, parse_matrix_csv, read_json, write_json};
use crate::linalg::{symmetric_eigen, Signature};

/// Estimated latent positions.
///
/// Columns belonging to positive eigenvalues come first, each group ordered
/// by decreasing magnitude, so `x I_{p,q} x^T` is the rank-`d` spectral
/// approximation of the adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub x: DMatrix<f64>,
    pub signature: Signature,
    /// Eigenvalue behind each column, in column order.
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    /// Retained eigenvalue magnitudes, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.eigenvalues.iter().map(|v| v.abs()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Rows restricted to `idx`, keeping the spectral metadata.
    pub fn select(&self, idx: &[usize]) -> Embedding {
        Embedding {
            x: crate::linalg::select_rows(&self.x, idx),
            signature: self.signature,
            eigenvalues: self.eigenvalues.clone(),
        }
    }

    /// The `d`-dimensional embedding contained in this one, identical to
    /// embedding again at `d` without a second eigendecomposition.
    pub fn truncate(&self, d: usize) -> Result<Embedding> {
        if d == 0 || d > self.d() {
            return Err(Error::validation("embedding dimension", format!("{d} not in 1..={}", self.d())));
        }
        let order = magnitude_order(&self.eigenvalues);
        let kept = &order[..d];
        let vals = &self.eigenvalues;
        let cols: Vec<usize> = kept
            .iter()
            .filter(|&&i| vals[i] > 0.0)
            .chain(kept.iter().filter(|&&i| vals[i] < 0.0))
            .copied()
            .collect();
        let p = kept.iter().filter(|&&i| vals[i] > 0.0).count();
        Ok(Embedding {
            x: self.x.select_columns(&cols),
            signature: Signature::new(p, d - p),
            eigenvalues: cols.iter().map(|&k| vals[k]).collect(),
        })
    }
}

/// Eigenpairs of a symmetric matrix ordered by decreasing magnitude; equal
/// magnitudes put the positive eigenvalue first, then the lower index.
fn magnitude_order(vals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| {
        vals[b]
            .abs()
            .total_cmp(&vals[a].abs())
            .then_with(|| (vals[a] < 0.0).cmp(&(vals[b] < 0.0)))
            .then(a.cmp(&b))
    });
    idx
}

fn rank_tolerance(vals: &[f64]) -> f64 {
    let top = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    1e-9 * top.max(1.0)
}

/// Embeds an arbitrary symmetric matrix.
pub fn ase_matrix(a: &DMatrix<f64>, d: usize) -> Result<Embedding> {
    let n = a.nrows();
    if d == 0 || d > n {
        return Err(Error::validation("embedding dimension", format!("{d} not in 1..={n}")));
    }
    let (vals, vecs) = symmetric_eigen(a);
    let order = magnitude_order(&vals);
    let tol = rank_tolerance(&vals);
    let rank = order.iter().take_while(|&&i| vals[i].abs() > tol).count();
    if rank < d {
        return Err(Error::Rank { requested: d, rank });
    }
    let kept = &order[..d];
    let cols: Vec<usize> = kept
        .iter()
        .filter(|&&i| vals[i] > 0.0)
        .chain(kept.iter().filter(|&&i| vals[i] < 0.0))
        .copied()
        .collect();
    let p = kept.iter().filter(|&&i| vals[i] > 0.0).count();
    let mut x = DMatrix::zeros(n, d);
    for (c, &k) in cols.iter().enumerate() {
        let scale = vals[k].abs().sqrt();
        let col = vecs.column(k);
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            x[(r, c)] = sign * scale * col[r];
        }
    }
    Ok(Embedding {
        x,
        signature: Signature::new(p, d - p),
        eigenvalues: cols.iter().map(|&k| vals[k]).collect(),
    })
}

/// `d`-dimensional adjacency spectral embedding.
pub fn ase(g: &Graph, d: usize) -> Result<Embedding> {
    ase_matrix(&g.to_matrix(), d)
}

/// Adjacency eigenvalues ordered by decreasing magnitude.
pub fn spectrum(g: &Graph) -> Vec<f64> {
    let (vals, _) = symmetric_eigen(&g.to_matrix());
    magnitude_order(&vals).into_iter().map(|i| vals[i]).collect()
}

/// Signs of the `d` largest-magnitude adjacency eigenvalues.
pub fn estimate_signature(g: &Graph, d: usize) -> Result<Signature> {
    let vals = spectrum(g);
    if d == 0 || d > vals.len() {
        return Err(Error::validation("embedding dimension", format!("{d} not in 1..={}", vals.len())));
    }
    let tol = rank_tolerance(&vals);
    let kept = &vals[..d];
    if let Some(z) = kept.iter().position(|v| v.abs() <= tol) {
        return Err(Error::DegenerateSpectrum(format!(
            "eigenvalue {} of the top {d} is numerically zero",
            z + 1
        )));
    }
    let p = kept.iter().filter(|&&v| v > 0.0).count();
    Ok(Signature::new(p, d - p))
}

/// Profile log-likelihood of splitting a descending profile after `q`
/// entries, with a shared variance across both groups.
fn profile_loglik(values: &[f64], q: usize) -> f64 {
    let m = values.len() as f64;
    let ss = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
    };
    let var = ((ss(&values[..q]) + ss(&values[q..])) / m).max(1e-300);
    -0.5 * m * (var.ln() + 1.0 + (2.0 * std::f64::consts::PI).ln())
}

/// Zhu-Ghodsi split point of a profile: the `q` in `1..len` maximizing the
/// profile likelihood, smallest `q` on ties.
pub fn zhu_ghodsi(values: &[f64]) -> Option<usize> {
    if values.len() < 2 {
        return None;
    }
    let mut best = (1, f64::NEG_INFINITY);
    for q in 1..values.len() {
        let l = profile_loglik(values, q);
        if l > best.1 {
            best = (q, l);
        }
    }
    Some(best.0)
}

/// The first `count` elbows of a descending profile. Each elbow is found on
/// the tail that follows the previous one; positions are 1-based counts of
/// retained values.
pub fn elbows(values: &[f64], count: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut start = 0;
    for found in 0..count {
        match zhu_ghodsi(&values[start..]) {
            Some(q) => {
                start += q;
                out.push(start);
            }
            None => {
                return Err(Error::ElbowRange {
                    requested: count,
                    available: found,
                })
            }
        }
    }
    Ok(out)
}

/// Embedding dimension at the `elbow_index`-th elbow of the scree profile of
/// adjacency singular values, optionally truncated to `max_rank` values.
pub fn select_dimension(g: &Graph, elbow_index: usize, max_rank: Option<usize>) -> Result<usize> {
    if g.n() == 0 {
        return Err(Error::validation("graph", "no vertices"));
    }
    if elbow_index == 0 {
        return Err(Error::validation("elbow index", "must be at least 1"));
    }
    let mut sv: Vec<f64> = spectrum(g).into_iter().map(f64::abs).collect();
    if let Some(r) = max_rank {
        sv.truncate(r);
    }
    Ok(*elbows(&sv, elbow_index)?.last().expect("nonempty"))
}

#[derive(Serialize, Deserialize)]
struct EmbeddingMeta {
    p: usize,
    q: usize,
    singular_values: Vec<f64>,
    eigenvalues: Vec<f64>,
}

fn header(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("dim_{i}")).collect()
}

/// Writes `<stem>.csv` and the `<stem>.json` metadata sidecar.
pub fn write_embedding(dir: &Path, stem: &str, emb: &Embedding) -> Result<()> {
    std::fs::write(dir.join(format!("{stem}.csv")), format_matrix_csv(&header(emb.d()), &emb.x))?;
    write_json(
        dir.join(format!("{stem}.json")),
        &EmbeddingMeta {
            p: emb.signature.p,
            q: emb.signature.q,
            singular_values: emb.singular_values(),
            eigenvalues: emb.eigenvalues.clone(),
        },
    )
}

pub fn read_embedding(dir: &Path, stem: &str) -> Result<Embedding> {
    let csv = dir.join(format!("{stem}.csv"));
    let (_, x) = parse_matrix_csv(&std::fs::read_to_string(&csv)?, &csv)?;
    let meta: EmbeddingMeta = read_json(dir.join(format!("{stem}.json")))?;
    if meta.p + meta.q != x.ncols() {
        return Err(Error::Dimension(format!(
            "metadata signature ({}, {}) does not match {} columns",
            meta.p,
            meta.q,
            x.ncols()
        )));
    }
    Ok(Embedding {
        x,
        signature: Signature::new(meta.p, meta.q),
        eigenvalues: meta.eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_embedding() {
        let e = ase(&Graph::complete(4), 1).unwrap();
        assert_eq!(e.signature, Signature::new(1, 0));
        for r in 0..4 {
            assert!((e.x[(r, 0)] - 3f64.sqrt() / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_matches_direct_embedding() {
        let (g, _) = crate::models::sample_sbm(
            &crate::models::SbmSpec::with_sizes(
                DMatrix::from_row_slice(3, 3, &[0.1, 0.6, 0.2, 0.6, 0.1, 0.3, 0.2, 0.3, 0.5]),
                vec![30, 30, 30],
                1.0,
            )
            .unwrap(),
            4,
        );
        let wide = ase(&g, 3).unwrap();
        for d in 1..=3 {
            let direct = ase(&g, d).unwrap();
            let cut = wide.truncate(d).unwrap();
            assert_eq!(cut.signature, direct.signature);
            assert!((cut.x - direct.x).abs().max() < 1e-9);
        }
    }

    #[test]
    fn two_disjoint_edges() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let e = ase(&g, 2).unwrap();
        assert_eq!(e.signature, Signature::new(2, 0));
        for s in e.singular_values() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bipartite_signature() {
        let edges = (0..3).flat_map(|i| (3..6).map(move |j| (i, j)));
        let g = Graph::from_edges(6, edges).unwrap();
        assert_eq!(estimate_signature(&g, 2).unwrap(), Signature::new(1, 1));
    }

    #[test]
    fn rank_error_beyond_spectrum() {
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        assert!(matches!(ase(&g, 3), Err(Error::Rank { requested: 3, rank: 2 })));
        assert!(matches!(estimate_signature(&g, 3), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn elbow_profiles() {
        let mut v = vec![10.0, 10.0];
        v.extend(std::iter::repeat(0.1).take(8));
        assert_eq!(elbows(&v, 1).unwrap(), vec![2]);
        let v = [9.0, 9.0, 9.0, 1.0, 1.0, 1.0, 1.0, 0.01, 0.01];
        assert_eq!(elbows(&v, 2).unwrap(), vec![3, 7]);
        assert!(matches!(
            elbows(&[3.0, 1.0], 2),
            Err(Error::ElbowRange { requested: 2, available: 1 })
        ));
    }

    #[test]
    fn embedding_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 2)]).unwrap();
        let e = ase(&g, 2).unwrap();
        write_embedding(dir.path(), "emb", &e).unwrap();
        assert_eq!(read_embedding(dir.path(), "emb").unwrap(), e);
    }
}
