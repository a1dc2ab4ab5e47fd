//! Adjacency spectral embedding with scree-plot elbow selection on a
//! three-block graph whose block matrix is indefinite.
//!
//! cargo run --example embed_and_select_dimension

use nalgebra::DMatrix;
use vnreg::models::{sample_sbm, SbmSpec};
use vnreg::spectral::{ase, elbows, estimate_signature, select_dimension, spectrum};

fn main() -> vnreg::Result<()> {
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(3, 3, &[
        0.2, 0.6, 0.1,
        0.6, 0.2, 0.1,
        0.1, 0.1, 0.5,
    ]);
    let (g, _) = sample_sbm(&SbmSpec::with_sizes(b, vec![120, 120, 120], 1.0)?, 4);

    let mut scree: Vec<f64> = spectrum(&g).into_iter().map(f64::abs).collect();
    scree.truncate(12);
    println!("leading singular values: {:.1?}", scree);
    println!("first two elbows: {:?}", elbows(&scree, 2)?);

    let d = select_dimension(&g, 1, Some(40))?;
    let emb = ase(&g, d)?;
    println!("selected d = {d}, signature {}", emb.signature);
    println!("signature estimate at d = 3: {}", estimate_signature(&g, 3)?);
    println!("first rows:\n{:.3}", emb.x.rows(0, 3));
    Ok(())
}
