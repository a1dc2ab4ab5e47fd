//! Runs the bundled smoke experiment through the Monte Carlo harness and
//! writes curves, plots and summaries to a directory.
//!
//! cargo run --example monte_carlo -- [output dir]

use std::path::PathBuf;

use vnreg::experiment::{run_simulation, write_simulation, ExperimentConfig};

fn main() -> vnreg::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "smoke-out".into()).into();
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "configs", "smoke.toml"].iter().collect();
    let cfg = ExperimentConfig::load(&path)?;
    let result = run_simulation(&cfg, None)?;
    for (method, curve) in &result.means {
        println!(
            "{:<18} mean at k={}: {:>6.1} (chance {:.1})",
            method.name(),
            cfg.k_max,
            curve.at(cfg.k_max),
            curve.chance[cfg.k_max - 1]
        );
    }
    write_simulation(&result, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
