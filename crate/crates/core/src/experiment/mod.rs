//! Monte Carlo experiment harness.
//!
//! An [`ExperimentConfig`] (usually TOML) describes a contamination scenario
//! and the nomination methods to compare. [`run_simulation`] samples every
//! replicate from its own seed stream, runs the methods and averages their
//! rank-at-k curves; [`write_simulation`] stores curves, paired differences,
//! diagnostics and SVG plots. [`resample_experiment`] is the single-network
//! protocol scored by precision at `k`.

mod config;
mod plot;
mod resample;
mod runner;
mod scenario;

pub use config::{
    ContaminationConfig, DiffuseConfig, ExperimentConfig, Method, ModelConfig, PipelineConfig, RegionConfig,
    Scenario, DIFFERENCES,
};
pub use plot::{render_curve_plot, write_curve_plot, PlotSeries};
pub use resample::{resample_experiment, write_resample, ResampleConfig, ResampleOutcome};
pub use runner::{
    run_replicate, run_simulation, summarize, write_simulation, CleaningDiagnostics, MethodDiagnostics,
    MethodOutcome, ReplicateResult, SimulationResult,
};
pub use scenario::{sample_scenario, ScenarioSample};
