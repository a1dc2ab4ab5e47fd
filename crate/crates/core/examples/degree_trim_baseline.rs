//! The graph-trimming baseline: drop the highest and lowest degree vertices,
//! choosing both fractions by modularity.
//!
//! cargo run --example degree_trim_baseline

use vnreg::experiment::{sample_scenario, ExperimentConfig};
use vnreg::regularization::{degree_trim_baseline, DegreeTrimConfig};

const SETTING: &str = r#"
name = "baseline demo"
scenario = "block"
[model]
b = [[0.7, 0.2], [0.2, 0.3]]
core_sizes = [150, 150]
[contamination]
m = 200
"#;

fn main() -> vnreg::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(SETTING)?;
    let sample = sample_scenario(&cfg, 31)?;
    let trimmed = degree_trim_baseline(
        &sample.g2,
        &DegreeTrimConfig {
            grid_step: 10,
            d: Some(6),
            ..DegreeTrimConfig::default()
        },
        32,
    )?;
    let core = trimmed.vertex_map.iter().filter(|&&v| sample.labels[v] % 3 == 0).count();
    println!(
        "removed top {}% and bottom {}% by degree (modularity {:.3}); kept {} vertices, {core} core",
        trimmed.h,
        trimmed.l,
        trimmed.modularity,
        trimmed.vertex_map.len()
    );
    Ok(())
}
