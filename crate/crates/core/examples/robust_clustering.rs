//! Penalized robust K-means separating two communities from diffuse noise
//! vertices. The penalty comes from the heuristic applied to a fit on clean
//! data.
//!
//! cargo run --example robust_clustering

use nalgebra::DMatrix;
use vnreg::clustering::{kmeans, robust_kmeans, suggest_lambda, RobustKmeansConfig};
use vnreg::models::{contaminate_diffuse, sample_grdpg, DiffuseNoiseSpec, NoiseRegion};
use vnreg::spectral::ase;
use vnreg::Signature;

fn main() -> vnreg::Result<()> {
    let (n, m) = (600, 60);
    let y = DMatrix::from_fn(n, 2, |i, c| if (i < n / 2) == (c == 0) { 0.8 } else { 0.05 });
    let noise = DiffuseNoiseSpec {
        m,
        region: NoiseRegion::Box {
            lower: vec![0.0, 0.0],
            upper: vec![0.7, 0.7],
        },
        rotation: None,
    };
    let (spec, is_noise) = contaminate_diffuse(&y, Signature::positive(2), &noise, 1.0, 5)?;
    let g = sample_grdpg(&spec, 6);
    let x = ase(&g, 2)?.x;

    let signal: Vec<usize> = (0..n).collect();
    let clean_fit = kmeans(&vnreg::linalg::select_rows(&x, &signal), 2, 7)?;
    let suggested = suggest_lambda(&clean_fit, &vnreg::linalg::select_rows(&x, &signal), n + m);
    println!("heuristic penalty {suggested:.3}; using 0.15 for this small graph");

    let model = robust_kmeans(&x, &RobustKmeansConfig::new(2, 0.15), 8)?;
    let kept_noise = model.clustered().iter().filter(|&&v| is_noise[v]).count();
    let dropped_signal = (0..n).filter(|&v| model.assignments[v] == 0).count();
    println!("objective {:.3}", model.objective);
    println!("noise vertices kept: {kept_noise} of {m}; signal vertices dropped: {dropped_signal} of {n}");
    Ok(())
}
