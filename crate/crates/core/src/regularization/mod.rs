//! Regularizing a contaminated graph before nomination.
//!
//! Model-space trimming estimates block matrices for both graphs, matches
//! them over injections of blocks and keeps only the matched blocks of the
//! contaminated graph. [`two_stage_clean`] first strips diffuse noise with
//! robust K-means. [`degree_trim_baseline`] is the degree-based comparison
//! method and [`check_separation`] evaluates the margins under which the
//! matching is asymptotically unique.

mod baseline;
mod matching;
mod procrustes;
mod separation;
mod trim;
mod two_stage;

pub use baseline::{degree_trim_baseline, modularity, DegreeTrim, DegreeTrimConfig};
pub use matching::{match_block_matrices, match_block_matrices_capped, MatchResult, DEFAULT_MATCH_CAP};
pub use procrustes::{orthogonal_procrustes, procrustes_align, Procrustes};
pub use separation::{check_separation, SeparationMode, SeparationReport, SeparationTerm};
pub use trim::{block_trim, write_trim_outcome, Alignment, TrimConfig, TrimOutcome};
pub use two_stage::{clean_diffuse, trim_cleaned, two_stage_clean, CleanConfig};
