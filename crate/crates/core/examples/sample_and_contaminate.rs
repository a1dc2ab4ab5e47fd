//! Draws a correlated pair of stochastic blockmodel graphs, then attacks the
//! second with block contamination and prints the resulting 6-block matrix.
//!
//! cargo run --example sample_and_contaminate

use nalgebra::DMatrix;
use vnreg::models::{
    build_contaminated_block_matrix, contaminate_block, sample_correlated_sbm, BlockContaminationSpec, SbmSpec,
    Selection,
};

fn main() -> vnreg::Result<()> {
    let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.3]);
    let spec = SbmSpec::with_sizes(b.clone(), vec![150, 150], 1.0)?;
    let (g1, g2, labels) = sample_correlated_sbm(&spec, 0.7, 1)?;
    let shared = g1.edges().filter(|&(u, v)| g2.has_edge(u, v)).count();
    println!(
        "G1 has {} edges, G2 has {}, {} in common",
        g1.edge_count(),
        g2.edge_count(),
        shared
    );

    // A fifth of every block joins W+ (gains edges), another fifth W- (loses them).
    let attack = BlockContaminationSpec {
        pi_plus: 0.2,
        pi_minus: 0.2,
        s_plus: 0.2,
        s_minus: 0.2,
        selection: Selection::Stratified { labels },
    };
    let contaminated = contaminate_block(&g2, &attack, 2)?;
    println!(
        "after contamination: {} edges, |W+| = {}, |W-| = {}",
        contaminated.graph.edge_count(),
        contaminated.w_plus.len(),
        contaminated.w_minus.len()
    );

    println!("expected block matrix of the contaminated graph:");
    println!("{:.2}", build_contaminated_block_matrix(&b, 0.2, 0.2)?);
    Ok(())
}
