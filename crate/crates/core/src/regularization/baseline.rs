use crate::clustering::{gmm_bic_with, kmeans, GmmConfig};
use crate::error::{Error, Result, StageExt};
use crate::graph::Graph;
use crate::rng::SeedStream;
use crate::spectral::{ase, select_dimension};

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTrimConfig {
    /// Grid spacing in percent for both trimming fractions (0 to 25).
    pub grid_step: usize,
    /// Embedding dimension; elbow-selected when `None`.
    pub d: Option<usize>,
    pub gmm: GmmConfig,
}

impl Default for DegreeTrimConfig {
    fn default() -> Self {
        DegreeTrimConfig {
            grid_step: 5,
            d: None,
            gmm: GmmConfig::default(),
        }
    }
}

/// Result of the degree-trimming baseline.
#[derive(Debug, Clone)]
pub struct DegreeTrim {
    pub graph: Graph,
    /// Original id of every kept vertex, ascending.
    pub vertex_map: Vec<usize>,
    /// Percent of highest-degree vertices removed.
    pub h: usize,
    /// Percent of lowest-degree vertices removed.
    pub l: usize,
    pub modularity: f64,
}

/// Newman modularity of a labelled partition; 0 for an edgeless graph.
pub fn modularity(g: &Graph, labels: &[usize]) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = labels.iter().max().map_or(0, |v| v + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for (i, j) in g.edges() {
        if labels[i] == labels[j] {
            internal[labels[i]] += 1.0;
        }
    }
    for v in 0..g.n() {
        degree[labels[v]] += g.degree(v) as f64;
    }
    (0..k).map(|c| internal[c] / m - (degree[c] / (2.0 * m)).powi(2)).sum()
}

/// Removes the top `h`% and bottom `l`% of vertices by degree, with `(h, l)`
/// chosen on a grid to maximize the modularity of a K-means partition of the
/// trimmed graph's embedding. `K` comes from a BIC mixture fit on the
/// untrimmed embedding. Ties keep the earliest grid point, so `(0, 0)` wins
/// whenever trimming does not help.
pub fn degree_trim_baseline(g: &Graph, config: &DegreeTrimConfig, seed: u64) -> Result<DegreeTrim> {
    let n = g.n();
    if n == 0 {
        return Err(Error::validation("graph", "no vertices"));
    }
    if config.grid_step == 0 {
        return Err(Error::validation("grid step", "must be positive"));
    }
    let root = SeedStream::new(seed);
    let d = match config.d {
        Some(d) => d,
        None => select_dimension(g, 1, None).stage("select baseline dimension")?,
    };
    let full = ase(g, d).stage("embed untrimmed graph")?;
    let k = gmm_bic_with(&full.x, &config.gmm, root.child("gmm").seed())
        .stage("cluster untrimmed graph")?
        .k();

    let degrees = g.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));

    let grid: Vec<usize> = (0..=25).step_by(config.grid_step).collect();
    let mut best: Option<DegreeTrim> = None;
    for &h in &grid {
        for &l in &grid {
            let top = h * n / 100;
            let bottom = l * n / 100;
            let mut kept: Vec<usize> = order[top..n - bottom].to_vec();
            kept.sort_unstable();
            if kept.len() < k {
                return Err(Error::Trim(format!(
                    "trimming ({h}%, {l}%) leaves {} vertices for {k} clusters",
                    kept.len()
                )));
            }
            let sub = g.induced(&kept);
            let Ok(emb) = ase(&sub, d) else {
                log::debug!("skipping ({h}, {l}): trimmed graph has rank below {d}");
                continue;
            };
            let part = kmeans(&emb.x, k, root.child("kmeans").index((h * 100 + l) as u64).seed())?;
            let labels: Vec<usize> = part.assignments.iter().map(|l| l - 1).collect();
            let q = modularity(&sub, &labels);
            if best.as_ref().map_or(true, |b| q > b.modularity) {
                best = Some(DegreeTrim {
                    graph: sub,
                    vertex_map: kept,
                    h,
                    l,
                    modularity: q,
                });
            }
        }
    }
    best.ok_or_else(|| Error::Trim("no grid point produced an embeddable graph".into()))
}
