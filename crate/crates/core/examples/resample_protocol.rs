//! The re-sampling protocol for a single observed network: append diffuse
//! noise in latent space, re-sample, clean and score precision at k per
//! class.
//!
//! cargo run --example resample_protocol

use nalgebra::DMatrix;
use vnreg::experiment::{resample_experiment, ResampleConfig};
use vnreg::models::{sample_sbm, SbmSpec};

fn main() -> vnreg::Result<()> {
    let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.05, 0.05, 0.4]);
    let (g, classes) = sample_sbm(&SbmSpec::with_sizes(b, vec![180, 120], 1.0)?, 41);
    let cfg = ResampleConfig {
        m: 100,
        k_max: 50,
        ..ResampleConfig::default()
    };
    let out = resample_experiment(&g, Some(&classes), &cfg, 42)?;
    println!(
        "kept {} of {} re-sampled vertices; {:.0}% of the noise removed",
        out.kept.len(),
        out.resampled.n(),
        100.0 * out.noise_removed()
    );
    for (class, curve) in &out.precision {
        println!(
            "class {class}: precision at 10 = {:.2}, at 50 = {:.2} (chance {:.2})",
            curve.at(10),
            curve.at(50),
            curve.chance[0]
        );
    }
    Ok(())
}
