use std::ops::RangeInclusive;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::matching::{match_block_matrices_capped, MatchResult, DEFAULT_MATCH_CAP};
use super::procrustes::orthogonal_procrustes;
use crate::clustering::{estimate_block_matrix, fit_gmm, gmm_bic_with, BlockEstimate, ClusterModel, GmmConfig};
use crate::error::{Error, Result, StageExt};
use crate::graph::Graph;
use crate::io::{format_matrix_csv, write_edge_list, write_json};
use crate::linalg::{from_rows, select_rows};
use crate::rng::SeedStream;
use crate::spectral::{ase, select_dimension, write_embedding, Embedding};

/// How the clean embedding is rotated onto the trimmed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Match clean cluster centers to the centers of the corresponding
    /// retained clusters; needs no seeds.
    ClusterCenters,
    /// Use known `(clean vertex, contaminated vertex)` pairs. Pairs whose
    /// contaminated vertex was trimmed are ignored.
    Seeds(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrimConfig {
    /// Embedding dimension of the clean graph; elbow-selected when `None`.
    pub d1: Option<usize>,
    /// Embedding dimension of the contaminated graph; elbow-selected when
    /// `None`.
    pub d2: Option<usize>,
    /// Which scree elbow to use when a dimension is selected automatically.
    pub elbow: usize,
    /// Fixed cluster counts; BIC-selected over `gmm.k_range` when `None`.
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub gmm: GmmConfig,
    pub match_cap: usize,
    pub alignment: Alignment,
}

impl Default for TrimConfig {
    fn default() -> Self {
        TrimConfig {
            d1: None,
            d2: None,
            elbow: 1,
            k1: None,
            k2: None,
            gmm: GmmConfig::default(),
            match_cap: DEFAULT_MATCH_CAP,
            alignment: Alignment::ClusterCenters,
        }
    }
}

impl TrimConfig {
    pub fn with_range(mut self, k_range: RangeInclusive<usize>) -> Self {
        self.gmm.k_range = k_range;
        self
    }
}

/// Everything nomination needs after trimming.
#[derive(Debug, Clone)]
pub struct TrimOutcome {
    /// Contaminated graph induced on the retained vertices.
    pub trimmed_graph: Graph,
    /// `vertex_map[t]` is the original contaminated-graph id of trimmed
    /// vertex `t`.
    pub vertex_map: Vec<usize>,
    pub embedding_1: Embedding,
    /// Clean embedding rotated onto the trimmed embedding.
    pub aligned_embedding_1: DMatrix<f64>,
    /// Embedding of the trimmed graph at the clean dimension.
    pub embedding_2: Embedding,
    pub matching: MatchResult,
    pub model_1: ClusterModel,
    pub model_2: ClusterModel,
    pub bhat_1: BlockEstimate,
    pub bhat_2: BlockEstimate,
    /// Contaminated-graph ids kept by an earlier cleaning stage, if any.
    pub cleaned: Option<Vec<usize>>,
}

fn dimension(g: &Graph, fixed: Option<usize>, elbow: usize) -> Result<usize> {
    match fixed {
        Some(d) => Ok(d),
        None => select_dimension(g, elbow, None),
    }
}

fn cluster(points: &DMatrix<f64>, k: Option<usize>, cfg: &GmmConfig, seed: u64) -> Result<ClusterModel> {
    match k {
        Some(k) => fit_gmm(points, k, cfg, seed).map(|f| f.model),
        None => gmm_bic_with(points, cfg, seed),
    }
}

/// Model-space trimming of `g2` against `g1`.
///
/// Both graphs are embedded and clustered, block matrices are estimated from
/// the cluster centers and matched, and `g2` is cut down to the vertices of
/// its matched clusters. The trimmed graph is re-embedded at the clean
/// dimension and the clean embedding is rotated onto it.
pub fn block_trim(g1: &Graph, g2: &Graph, config: &TrimConfig, seed: u64) -> Result<TrimOutcome> {
    if g1.n() == 0 || g2.n() == 0 {
        return Err(Error::Trim("both graphs need vertices".into()));
    }
    let root = SeedStream::new(seed);
    let d1 = dimension(g1, config.d1, config.elbow).stage("select clean dimension")?;
    let d2 = dimension(g2, config.d2, config.elbow).stage("select contaminated dimension")?;
    let emb1 = ase(g1, d1).stage("embed clean graph")?;
    let emb2 = ase(g2, d2).stage("embed contaminated graph")?;
    let model_1 = cluster(&emb1.x, config.k1, &config.gmm, root.child("cluster clean").seed())
        .stage("cluster clean graph")?;
    let model_2 = cluster(&emb2.x, config.k2, &config.gmm, root.child("cluster contaminated").seed())
        .stage("cluster contaminated graph")?;
    let (k1, k2) = (model_1.k(), model_2.k());
    if k1 > k2 {
        return Err(Error::Trim(format!(
            "the clean graph has {k1} clusters but the contaminated graph only {k2}"
        )));
    }
    let bhat_1 = estimate_block_matrix(&model_1.centers, emb1.signature)?;
    let bhat_2 = estimate_block_matrix(&model_2.centers, emb2.signature)?;
    let mut matching =
        match_block_matrices_capped(&bhat_1.matrix, &bhat_2.matrix, config.match_cap).stage("match blocks")?;

    let keep: Vec<bool> = (0..=k2).map(|l| l > 0 && matching.mapping.contains(&(l - 1))).collect();
    let retained: Vec<usize> = (0..g2.n()).filter(|&v| keep[model_2.assignments[v]]).collect();
    if retained.is_empty() {
        return Err(Error::Trim("no vertices fall in the matched blocks".into()));
    }
    matching.retained_vertices = retained.clone();
    let trimmed_graph = g2.induced(&retained);
    let embedding_2 = ase(&trimmed_graph, d1).stage("embed trimmed graph")?;

    let (source, target) = match &config.alignment {
        Alignment::ClusterCenters => {
            let mut src = Vec::new();
            let mut tgt = Vec::new();
            for (i, &block) in matching.mapping.iter().enumerate() {
                let members: Vec<usize> = (0..retained.len())
                    .filter(|&t| model_2.assignments[retained[t]] == block + 1)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let mean: Vec<f64> = (0..d1)
                    .map(|c| members.iter().map(|&t| embedding_2.x[(t, c)]).sum::<f64>() / members.len() as f64)
                    .collect();
                src.push(model_1.center(i + 1));
                tgt.push(mean);
            }
            (from_rows(&src, d1), from_rows(&tgt, d1))
        }
        Alignment::Seeds(pairs) => {
            let mut src_idx = Vec::new();
            let mut tgt_idx = Vec::new();
            for &(u, v) in pairs {
                if u >= g1.n() {
                    return Err(Error::validation("seed pair", format!("vertex {u} not in the clean graph")));
                }
                if let Ok(t) = retained.binary_search(&v) {
                    src_idx.push(u);
                    tgt_idx.push(t);
                }
            }
            if src_idx.is_empty() {
                return Err(Error::Trim("every seed was trimmed away".into()));
            }
            (select_rows(&emb1.x, &src_idx), select_rows(&embedding_2.x, &tgt_idx))
        }
    };
    let w = orthogonal_procrustes(&source, &target).stage("align embeddings")?.w;
    let aligned_embedding_1 = &emb1.x * w;
    Ok(TrimOutcome {
        trimmed_graph,
        vertex_map: retained,
        embedding_1: emb1,
        aligned_embedding_1,
        embedding_2,
        matching,
        model_1,
        model_2,
        bhat_1,
        bhat_2,
        cleaned: None,
    })
}

#[derive(Serialize)]
struct MatchJson<'a> {
    mapping: &'a [usize],
    objective: f64,
    retained_blocks: &'a [usize],
    retained_vertices: usize,
    bhat_clean: Vec<Vec<f64>>,
    bhat_contaminated: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    crate::linalg::rows_of(m)
}

/// Writes `trimmed.edges`, `vertex_map.csv`, `match.json` and the two
/// embeddings into `dir`.
pub fn write_trim_outcome(dir: &Path, outcome: &TrimOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_edge_list(dir.join("trimmed.edges"), &outcome.trimmed_graph)?;
    let mut map = String::from("retained_index,original_index\n");
    for (t, v) in outcome.vertex_map.iter().enumerate() {
        map.push_str(&format!("{t},{v}\n"));
    }
    std::fs::write(dir.join("vertex_map.csv"), map)?;
    write_json(
        dir.join("match.json"),
        &MatchJson {
            mapping: &outcome.matching.mapping,
            objective: outcome.matching.objective,
            retained_blocks: &outcome.matching.retained_blocks,
            retained_vertices: outcome.vertex_map.len(),
            bhat_clean: rows(&outcome.bhat_1.matrix),
            bhat_contaminated: rows(&outcome.bhat_2.matrix),
        },
    )?;
    let header: Vec<String> = (1..=outcome.aligned_embedding_1.ncols()).map(|i| format!("dim_{i}")).collect();
    std::fs::write(
        dir.join("embedding_1_aligned.csv"),
        format_matrix_csv(&header, &outcome.aligned_embedding_1),
    )?;
    write_embedding(dir, "embedding_2", &outcome.embedding_2)
}
