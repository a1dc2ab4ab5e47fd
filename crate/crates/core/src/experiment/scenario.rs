use nalgebra::DMatrix;

use super::config::{ExperimentConfig, RegionConfig, Scenario};
use crate::error::{Result, StageExt};
use crate::graph::Graph;
use crate::models::{
    build_contaminated_block_matrix, contaminate_block, contaminate_diffuse, feasible_orthant_rotation,
    sample_correlated_grdpg, sample_correlated_sbm, sbm_latent_positions, BlockContaminationSpec,
    DiffuseNoiseSpec, GrdpgSpec, NoiseRegion, SbmSpec, Selection,
};
use crate::rng::SeedStream;

/// One sampled replicate: a clean graph, its contaminated counterpart and
/// the ground truth linking them.
#[derive(Debug, Clone)]
pub struct ScenarioSample {
    pub g1: Graph,
    pub g2: Graph,
    /// `truth[u]` is the contaminated-graph vertex matching clean vertex `u`.
    pub truth: Vec<usize>,
    /// Block of every contaminated-graph vertex in the `3K` layout: core
    /// block `b` is `3b`, its `W+` part `3b + 1` and its `W-` part `3b + 2`.
    /// Diffuse noise vertices get `3K`.
    pub labels: Vec<usize>,
}

impl ScenarioSample {
    pub fn is_core_label(label: usize, k: usize) -> bool {
        label < 3 * k && label % 3 == 0
    }

    pub fn diffuse_mask(&self, k: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == 3 * k).collect()
    }
}

/// Vertex layout shared by both scenarios: each block lists its core
/// vertices, then its `W+` vertices, then its `W-` vertices.
struct Layout {
    labels: Vec<usize>,
    core: Vec<usize>,
    plus: Vec<usize>,
    minus: Vec<usize>,
    block_sizes: Vec<usize>,
}

fn layout(cfg: &ExperimentConfig) -> Layout {
    let q = cfg.noise_per_set();
    let mut out = Layout {
        labels: Vec::new(),
        core: Vec::new(),
        plus: Vec::new(),
        minus: Vec::new(),
        block_sizes: Vec::new(),
    };
    for (b, &size) in cfg.model.core_sizes.iter().enumerate() {
        for (part, count) in [(0, size), (1, q), (2, q)] {
            for _ in 0..count {
                let v = out.labels.len();
                out.labels.push(3 * b + part);
                match part {
                    0 => out.core.push(v),
                    1 => out.plus.push(v),
                    _ => out.minus.push(v),
                }
            }
        }
        out.block_sizes.push(size + 2 * q);
    }
    out
}

/// Samples a replicate of the configured scenario.
pub fn sample_scenario(cfg: &ExperimentConfig, seed: u64) -> Result<ScenarioSample> {
    match cfg.scenario {
        Scenario::Block => sample_block(cfg, seed),
        Scenario::TwoStage => sample_two_stage(cfg, seed),
    }
}

/// The uncontaminated SBM on all vertices is drawn together with a
/// correlated copy; the copy restricted to the core becomes the clean graph
/// and the original is then block-contaminated. Contamination never touches
/// core-core pairs, so the core correlation survives.
fn sample_block(cfg: &ExperimentConfig, seed: u64) -> Result<ScenarioSample> {
    let root = SeedStream::new(seed);
    let lay = layout(cfg);
    let spec = SbmSpec::with_sizes(cfg.block_matrix(), lay.block_sizes.clone(), cfg.model.nu)?;
    let (copy, g2_raw, _) = sample_correlated_sbm(&spec, cfg.model.rho, root.child("graphs").seed())?;
    let contamination = BlockContaminationSpec {
        pi_plus: 0.0,
        pi_minus: 0.0,
        s_plus: cfg.contamination.s_plus,
        s_minus: cfg.contamination.s_minus,
        selection: Selection::Explicit {
            plus: lay.plus.clone(),
            minus: lay.minus.clone(),
        },
    };
    let g2 = contaminate_block(&g2_raw, &contamination, root.child("contamination").seed())?.graph;
    Ok(ScenarioSample {
        g1: copy.induced(&lay.core),
        g2,
        truth: lay.core,
        labels: lay.labels,
    })
}

/// The contaminated graph is a GRDPG whose signal rows are the latent
/// positions of the `3K`-block contaminated matrix and whose extra rows are
/// diffuse noise; the clean graph is the correlated copy on the core.
fn sample_two_stage(cfg: &ExperimentConfig, seed: u64) -> Result<ScenarioSample> {
    let root = SeedStream::new(seed);
    let lay = layout(cfg);
    let bc = build_contaminated_block_matrix(
        &cfg.block_matrix(),
        cfg.contamination.s_plus,
        cfg.contamination.s_minus,
    )?;
    let (rows, sig) = sbm_latent_positions(&bc, cfg.model.nu)?;
    let y = DMatrix::from_fn(lay.labels.len(), rows.ncols(), |i, c| rows[(lay.labels[i], c)]);
    let mut labels = lay.labels;
    let spec = match &cfg.diffuse {
        Some(d) if d.m > 0 => {
            let rotation = if d.rotate {
                Some(feasible_orthant_rotation(&rows, sig, root.child("rotation").seed()).stage("rotate noise region")?)
            } else {
                None
            };
            let region = match &d.region {
                RegionConfig::SphereOrthant => NoiseRegion::SphereOrthant,
                RegionConfig::Box { lower, upper } => NoiseRegion::Box {
                    lower: lower.clone(),
                    upper: upper.clone(),
                },
            };
            let noise = DiffuseNoiseSpec {
                m: d.m,
                region,
                rotation,
            };
            labels.extend(std::iter::repeat(3 * cfg.k()).take(d.m));
            contaminate_diffuse(&y, sig, &noise, 1.0, root.child("diffuse").seed())
                .stage("attach diffuse noise")?
                .0
        }
        _ => GrdpgSpec::new(y, sig, 1.0)?,
    };
    let (copy, g2) = sample_correlated_grdpg(&spec, cfg.model.rho, root.child("graphs").seed())?;
    Ok(ScenarioSample {
        g1: copy.induced(&lay.core),
        g2,
        truth: lay.core,
        labels,
    })
}
