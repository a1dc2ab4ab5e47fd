use super::trim::{block_trim, Alignment, TrimConfig, TrimOutcome};
use crate::clustering::{robust_kmeans, RobustKmeansConfig};
use crate::error::{Error, Result, StageExt};
use crate::graph::Graph;
use crate::rng::SeedStream;
use crate::spectral::{ase, select_dimension, Embedding};

/// First-stage (diffuse noise) cleaning parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanConfig {
    /// Embedding dimension for the robust clustering; falls back to the trim
    /// configuration's `d2`, then to the elbow.
    pub d: Option<usize>,
    pub robust: RobustKmeansConfig,
}

/// Robust K-means on the contaminated embedding drops unclustered vertices,
/// then model-space trimming runs on what is left. The outcome's vertex map
/// refers to the original contaminated graph.
pub fn two_stage_clean(
    g1: &Graph,
    g2: &Graph,
    clean: &CleanConfig,
    trim: &TrimConfig,
    seed: u64,
) -> Result<TrimOutcome> {
    let root = SeedStream::new(seed);
    let d = match clean.d.or(trim.d2) {
        Some(d) => d,
        None => select_dimension(g2, trim.elbow, None).stage("select cleaning dimension")?,
    };
    let emb = ase(g2, d).stage("embed for cleaning")?;
    let kept = clean_diffuse(&emb, &clean.robust, root.child("robust").seed())?;
    trim_cleaned(g1, g2, &kept, trim, root.child("trim").seed())
}

/// First stage alone: the sorted vertices of `embedding` that robust
/// K-means leaves clustered.
pub fn clean_diffuse(embedding: &Embedding, robust: &RobustKmeansConfig, seed: u64) -> Result<Vec<usize>> {
    let model = robust_kmeans(&embedding.x, robust, seed).stage("robust clustering")?;
    let kept = model.clustered();
    log::debug!("cleaning kept {} of {} vertices", kept.len(), embedding.n());
    if kept.is_empty() {
        return Err(Error::Trim("cleaning removed every vertex".into()));
    }
    Ok(kept)
}

/// Second stage alone: trims `g2[kept]` against `g1`. Seed pairs and the
/// outcome's vertex ids use original `g2` ids.
pub fn trim_cleaned(g1: &Graph, g2: &Graph, kept: &[usize], trim: &TrimConfig, seed: u64) -> Result<TrimOutcome> {
    let cleaned = g2.induced(kept);
    let mut trim = trim.clone();
    if let Alignment::Seeds(pairs) = &trim.alignment {
        let remapped = pairs
            .iter()
            .filter_map(|&(u, v)| kept.binary_search(&v).ok().map(|t| (u, t)))
            .collect();
        trim.alignment = Alignment::Seeds(remapped);
    }
    let mut out = block_trim(g1, &cleaned, &trim, seed)?;
    for v in out.vertex_map.iter_mut() {
        *v = kept[*v];
    }
    for v in out.matching.retained_vertices.iter_mut() {
        *v = kept[*v];
    }
    out.cleaned = Some(kept.to_vec());
    Ok(out)
}
