//! Vertex nomination across a correlated pair with a handful of seeds, scored
//! by how many queries find their match in the top k.
//!
//! cargo run --example seeded_nomination

use nalgebra::DMatrix;
use vnreg::clustering::GmmConfig;
use vnreg::models::{sample_correlated_sbm, SbmSpec};
use vnreg::nomination::{nominate_with_seeds, rank_at_k_curve};
use vnreg::spectral::ase;

fn main() -> vnreg::Result<()> {
    let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.3]);
    let (g1, g2, _) = sample_correlated_sbm(&SbmSpec::with_sizes(b, vec![150, 150], 1.0)?, 0.9, 3)?;
    let (e1, e2) = (ase(&g1, 2)?, ase(&g2, 2)?);

    // Vertices correspond by index; ten of them are revealed as seeds.
    let seeds: Vec<(usize, usize)> = (0..300).step_by(30).map(|v| (v, v)).collect();
    let queries: Vec<usize> = (0..300).collect();
    let lists = nominate_with_seeds(&e1.x, &e2.x, &seeds, &queries, &GmmConfig::default(), 4)?;
    println!("top five for vertex 0: {:?}", &lists[0].ranked[..5]);

    let curve = rank_at_k_curve(&lists, Some, 50, g2.n())?;
    for k in [1, 10, 50] {
        println!("k = {k:>2}: {:>5} matches found (chance {:.1})", curve.at(k), curve.chance[k - 1]);
    }
    Ok(())
}
