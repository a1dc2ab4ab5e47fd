//! Two-stage regularization: robust K-means strips diffuse noise vertices,
//! then model trimming removes the block contamination.
//!
//! cargo run --example two_stage_regularization

use vnreg::clustering::RobustKmeansConfig;
use vnreg::experiment::{sample_scenario, ExperimentConfig};
use vnreg::regularization::{two_stage_clean, CleanConfig, TrimConfig};

const SETTING: &str = r#"
name = "two-stage demo"
scenario = "two_stage"
[model]
b = [[0.7, 0.2], [0.2, 0.3]]
core_sizes = [200, 200]
rho = 0.8
[contamination]
m = 400
[diffuse]
m = 200
"#;

fn main() -> vnreg::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(SETTING)?;
    let sample = sample_scenario(&cfg, 21)?;
    let noise = sample.diffuse_mask(cfg.k());

    let clean = CleanConfig {
        d: Some(6),
        robust: RobustKmeansConfig::new(6, 0.3),
    };
    let trim = TrimConfig {
        d1: Some(2),
        d2: Some(6),
        k1: Some(2),
        k2: Some(6),
        ..TrimConfig::default()
    };
    let out = two_stage_clean(&sample.g1, &sample.g2, &clean, &trim, 22)?;
    let cleaned = out.cleaned.as_deref().unwrap_or_default();
    let noise_left = cleaned.iter().filter(|&&v| noise[v]).count();
    println!(
        "cleaning kept {} of {} vertices ({noise_left} of {} diffuse noise)",
        cleaned.len(),
        sample.g2.n(),
        cfg.diffuse_m()
    );
    let core = out.vertex_map.iter().filter(|&&v| sample.labels[v] % 3 == 0 && !noise[v]).count();
    println!("trimming kept {} vertices, {core} core", out.vertex_map.len());
    Ok(())
}
