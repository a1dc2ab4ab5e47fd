//! Model-space trimming: estimate both block matrices, match them, keep the
//! matched blocks of the contaminated graph and rotate the clean embedding
//! onto the trimmed one.
//!
//! cargo run --example model_trimming

use vnreg::experiment::{sample_scenario, ExperimentConfig};
use vnreg::regularization::{block_trim, check_separation, SeparationMode, TrimConfig};

const SETTING: &str = r#"
name = "trim demo"
scenario = "block"
[model]
b = [[0.7, 0.2], [0.2, 0.3]]
core_sizes = [200, 200]
rho = 0.8
[contamination]
m = 240
"#;

fn main() -> vnreg::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(SETTING)?;
    println!("{}", check_separation(&cfg.block_matrix(), 0.2, 0.2, SeparationMode::Diagonal)?);

    let sample = sample_scenario(&cfg, 11)?;
    let trim = TrimConfig {
        d1: Some(2),
        d2: Some(6),
        ..TrimConfig::default()
    };
    let out = block_trim(&sample.g1, &sample.g2, &trim, 12)?;
    println!(
        "K1 = {}, K2 = {}, mapping {:?}, objective {:.4}",
        out.model_1.k(),
        out.model_2.k(),
        out.matching.mapping,
        out.matching.objective
    );
    let core = out.vertex_map.iter().filter(|&&v| sample.labels[v] % 3 == 0).count();
    println!(
        "kept {} of {} vertices, {core} of them core ({} core in total)",
        out.vertex_map.len(),
        sample.g2.n(),
        sample.truth.len()
    );
    println!("estimated clean block matrix:\n{:.3}", out.bhat_1.matrix);
    Ok(())
}
