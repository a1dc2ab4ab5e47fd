use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the contaminated graph is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Block-contaminated SBM; the clean graph is correlated with the core.
    Block,
    /// Block contamination plus diffuse noise vertices, sampled as a GRDPG.
    TwoStage,
}

/// A nomination pipeline evaluated on every replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Model-space trimming with seedless center alignment.
    ModelTrim,
    /// Degree trimming, then seeded alignment.
    DegreeTrim,
    /// No trimming; seeded alignment of the raw embeddings.
    NoRegularization,
    /// Robust K-means cleaning followed by model trimming, seedless.
    TwoStage,
    /// As `TwoStage` but aligning with seeds instead of cluster centers.
    TwoStageSeeded,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ModelTrim => "model_trim",
            Method::DegreeTrim => "degree_trim",
            Method::NoRegularization => "no_regularization",
            Method::TwoStage => "two_stage",
            Method::TwoStageSeeded => "two_stage_seeded",
        }
    }

    pub fn uses_seeds(self) -> bool {
        matches!(self, Method::DegreeTrim | Method::NoRegularization | Method::TwoStageSeeded)
    }
}

/// Paired comparisons reported as mean difference curves, `(name, a, b)`
/// meaning `a - b`.
pub const DIFFERENCES: [(&str, Method, Method); 4] = [
    ("model_trim_minus_degree_trim", Method::ModelTrim, Method::DegreeTrim),
    ("model_trim_minus_no_regularization", Method::ModelTrim, Method::NoRegularization),
    ("two_stage_minus_no_regularization", Method::TwoStage, Method::NoRegularization),
    ("two_stage_seeded_minus_two_stage", Method::TwoStageSeeded, Method::TwoStage),
];

fn one() -> f64 {
    1.0
}
fn default_rho() -> f64 {
    0.7
}
fn default_s() -> f64 {
    0.2
}
fn default_true() -> bool {
    true
}
fn default_replicates() -> usize {
    30
}
fn default_k_max() -> usize {
    100
}
fn default_elbow() -> usize {
    1
}
fn default_k_range() -> [usize; 2] {
    [1, 9]
}
fn default_lambda() -> f64 {
    crate::clustering::DEFAULT_LAMBDA
}
fn default_seeds() -> usize {
    10
}
fn default_gmm_restarts() -> usize {
    5
}
fn default_robust_restarts() -> usize {
    10
}
fn default_grid_step() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Uncontaminated block matrix, row by row.
    pub b: Vec<Vec<f64>>,
    /// Core (uncontaminated) block sizes; the clean graph has this many
    /// vertices in total.
    pub core_sizes: Vec<usize>,
    #[serde(default = "one")]
    pub nu: f64,
    /// Edge correlation between the clean graph and the contaminated core.
    #[serde(default = "default_rho")]
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContaminationConfig {
    /// Number of block-noise vertices, split evenly between the `W+` and
    /// `W-` sets of every block.
    pub m: usize,
    #[serde(default = "default_s")]
    pub s_plus: f64,
    #[serde(default = "default_s")]
    pub s_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    #[default]
    SphereOrthant,
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffuseConfig {
    pub m: usize,
    #[serde(default)]
    pub region: RegionConfig,
    /// Rotate the noise region so every pairwise probability is valid.
    #[serde(default = "default_true")]
    pub rotate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Clean-graph embedding dimension; elbow-selected when absent.
    #[serde(default)]
    pub d1: Option<usize>,
    /// Contaminated-graph embedding dimension; elbow-selected when absent.
    #[serde(default)]
    pub d2: Option<usize>,
    #[serde(default = "default_elbow")]
    pub elbow: usize,
    /// Inclusive range searched by BIC when a cluster count is not fixed.
    #[serde(default = "default_k_range")]
    pub k_range: [usize; 2],
    #[serde(default)]
    pub k1: Option<usize>,
    #[serde(default)]
    pub k2: Option<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub r_star: Option<f64>,
    /// Robust K-means cluster count; defaults to `k2`, then to three times
    /// the number of core blocks.
    #[serde(default)]
    pub clean_k: Option<usize>,
    /// Seed pairs drawn from the core for seeded methods.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Methods to run; a scenario-specific default when absent.
    #[serde(default)]
    pub methods: Option<Vec<Method>>,
    #[serde(default = "default_gmm_restarts")]
    pub gmm_restarts: usize,
    #[serde(default = "default_robust_restarts")]
    pub robust_restarts: usize,
    /// Percent step of the degree-trimming grid.
    #[serde(default = "default_grid_step")]
    pub degree_grid_step: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        toml::from_str("").expect("all pipeline fields have defaults")
    }
}

/// A Monte Carlo experiment, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub scenario: Scenario,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Largest `k` on the evaluation curves.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    pub model: ModelConfig,
    pub contamination: ContaminationConfig,
    #[serde(default)]
    pub diffuse: Option<DiffuseConfig>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    /// Default output directory; the command line overrides it.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn block_matrix(&self) -> DMatrix<f64> {
        let k = self.model.b.len();
        DMatrix::from_fn(k, k, |i, j| self.model.b[i][j])
    }

    /// Number of core blocks.
    pub fn k(&self) -> usize {
        self.model.core_sizes.len()
    }

    pub fn n_core(&self) -> usize {
        self.model.core_sizes.iter().sum()
    }

    /// Noise vertices added to each of `W+` and `W-` per block.
    pub fn noise_per_set(&self) -> usize {
        self.contamination.m / (2 * self.k())
    }

    pub fn diffuse_m(&self) -> usize {
        self.diffuse.as_ref().map_or(0, |d| d.m)
    }

    /// Vertices in the contaminated graph.
    pub fn n2(&self) -> usize {
        self.n_core() + self.contamination.m + self.diffuse_m()
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut m = self.pipeline.methods.clone().unwrap_or_else(|| match self.scenario {
            Scenario::Block => vec![Method::ModelTrim, Method::DegreeTrim],
            Scenario::TwoStage => vec![Method::TwoStage, Method::TwoStageSeeded, Method::NoRegularization],
        });
        m.sort();
        m.dedup();
        m
    }

    pub fn clean_k(&self) -> usize {
        self.pipeline.clean_k.or(self.pipeline.k2).unwrap_or(3 * self.k())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        let k = self.k();
        if k == 0 {
            return bad("model.core_sizes must list at least one block");
        }
        if self.model.b.len() != k || self.model.b.iter().any(|r| r.len() != k) {
            return bad("model.b must be a square matrix with one row per core block");
        }
        let b = self.block_matrix();
        if !crate::linalg::is_symmetric(&b, 1e-12) {
            return bad("model.b must be symmetric");
        }
        if b.iter().any(|&v| !(0.0..=1.0).contains(&(v * self.model.nu))) {
            return bad("model.b scaled by nu must lie in [0, 1]");
        }
        if self.model.core_sizes.contains(&0) {
            return bad("model.core_sizes entries must be positive");
        }
        if !(0.0..=1.0).contains(&self.model.rho) {
            return bad("model.rho must lie in [0, 1]");
        }
        let c = &self.contamination;
        if !(0.0..=1.0).contains(&c.s_plus) || !(0.0..=1.0).contains(&c.s_minus) {
            return bad("contamination.s_plus and s_minus must lie in [0, 1]");
        }
        if c.m % (2 * k) != 0 {
            return Err(Error::Config(format!(
                "contamination.m = {} must be divisible by {} (two noise sets per block)",
                c.m,
                2 * k
            )));
        }
        if self.diffuse.is_some() && self.scenario == Scenario::Block {
            return bad("diffuse noise needs scenario = \"two_stage\"");
        }
        if self.replicates == 0 || self.k_max == 0 {
            return bad("replicates and k_max must be at least 1");
        }
        let p = &self.pipeline;
        if p.k_range[0] == 0 || p.k_range[0] > p.k_range[1] {
            return bad("pipeline.k_range must be [lo, hi] with 1 <= lo <= hi");
        }
        if p.elbow == 0 || p.gmm_restarts == 0 || p.robust_restarts == 0 || p.degree_grid_step == 0 {
            return bad("pipeline.elbow, restarts and degree_grid_step must be at least 1");
        }
        if !(p.lambda > 0.0) || p.r_star.is_some_and(|r| !(r > 0.0)) {
            return bad("pipeline.lambda and r_star must be positive");
        }
        if p.d1 == Some(0) || p.d2 == Some(0) || p.k1 == Some(0) || p.k2 == Some(0) || p.clean_k == Some(0) {
            return bad("fixed dimensions and cluster counts must be positive");
        }
        let methods = self.methods();
        if methods.is_empty() {
            return bad("pipeline.methods is empty");
        }
        if methods.iter().any(|m| m.uses_seeds()) && (p.seeds == 0 || p.seeds > self.n_core()) {
            return Err(Error::Config(format!(
                "pipeline.seeds must be in 1..={} for seeded methods",
                self.n_core()
            )));
        }
        Ok(())
    }
}
