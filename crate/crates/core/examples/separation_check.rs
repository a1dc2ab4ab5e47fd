//! Checks whether a block matrix and contamination rates leave the clean
//! blocks identifiable inside the contaminated block matrix.
//!
//! cargo run --example separation_check

use nalgebra::DMatrix;
use vnreg::models::build_contaminated_block_matrix;
use vnreg::regularization::{check_separation, match_block_matrices, SeparationMode};

fn main() -> vnreg::Result<()> {
    for (name, b) in [
        ("distinct diagonal", DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.3])),
        ("equal diagonal", DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, 0.5])),
    ] {
        println!("== {name}");
        for mode in [SeparationMode::Diagonal, SeparationMode::OffDiagonal] {
            println!("{}", check_separation(&b, 0.2, 0.2, mode)?);
        }
        let m = match_block_matrices(&b, &build_contaminated_block_matrix(&b, 0.2, 0.2)?)?;
        println!("exact matching {:?} with objective {:.2e}\n", m.mapping, m.objective);
    }
    Ok(())
}
