use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest contaminated block count searched exhaustively by default.
pub const DEFAULT_MATCH_CAP: usize = 12;

/// Best injection of the clean blocks into the contaminated blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `mapping[i]` is the contaminated block matched to clean block `i`
    /// (both 0-based).
    pub mapping: Vec<usize>,
    /// `||B - P B_c P^T||_F` at the optimum.
    pub objective: f64,
    /// Image of the mapping, ascending.
    pub retained_blocks: Vec<usize>,
    /// Contaminated-graph vertices in the retained blocks, ascending. Empty
    /// until filled in by trimming.
    pub retained_vertices: Vec<usize>,
}

struct Search<'a> {
    b: &'a DMatrix<f64>,
    bc: &'a DMatrix<f64>,
    mapping: Vec<usize>,
    used: Vec<bool>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    /// Depth-first over injections in lexicographic order. A branch is cut as
    /// soon as its partial cost reaches the incumbent, so the first minimizer
    /// found (the lexicographically smallest) is kept on ties.
    fn descend(&mut self, partial: f64) {
        let depth = self.mapping.len();
        if let Some((best, _)) = &self.best {
            if partial >= *best {
                return;
            }
        }
        if depth == self.b.nrows() {
            self.best = Some((partial, self.mapping.clone()));
            return;
        }
        for t in 0..self.bc.nrows() {
            if self.used[t] {
                continue;
            }
            let mut add = (self.b[(depth, depth)] - self.bc[(t, t)]).powi(2);
            for (i, &s) in self.mapping.iter().enumerate() {
                add += 2.0 * (self.b[(depth, i)] - self.bc[(t, s)]).powi(2);
            }
            self.used[t] = true;
            self.mapping.push(t);
            self.descend(partial + add);
            self.mapping.pop();
            self.used[t] = false;
        }
    }
}

/// Exhaustive matching with a custom cap on the contaminated block count.
pub fn match_block_matrices_capped(b: &DMatrix<f64>, bc: &DMatrix<f64>, cap: usize) -> Result<MatchResult> {
    let (k1, k2) = (b.nrows(), bc.nrows());
    if !b.is_square() || !bc.is_square() {
        return Err(Error::Dimension("block matrices must be square".into()));
    }
    if k1 == 0 {
        return Err(Error::Dimension("clean block matrix is empty".into()));
    }
    if k1 > k2 {
        return Err(Error::Dimension(format!(
            "cannot inject {k1} clean blocks into {k2} contaminated blocks"
        )));
    }
    if k2 > cap {
        return Err(Error::MatchSize { k2, cap });
    }
    let mut search = Search {
        b,
        bc,
        mapping: Vec::with_capacity(k1),
        used: vec![false; k2],
        best: None,
    };
    search.descend(0.0);
    let (sq, mapping) = search.best.expect("an injection exists when k1 <= k2");
    let mut retained_blocks = mapping.clone();
    retained_blocks.sort_unstable();
    Ok(MatchResult {
        mapping,
        objective: sq.sqrt(),
        retained_blocks,
        retained_vertices: Vec::new(),
    })
}

/// Finds `argmin_P ||B - P B_c P^T||_F` over all injections `P` of the
/// `K1` clean blocks into the `K2` contaminated ones by exhaustive search.
pub fn match_block_matrices(b: &DMatrix<f64>, bc: &DMatrix<f64>) -> Result<MatchResult> {
    match_block_matrices_capped(b, bc, DEFAULT_MATCH_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_match_is_identity() {
        let b = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.2, 0.1, 0.6, 0.3, 0.2, 0.3, 0.9]);
        let m = match_block_matrices(&b, &b).unwrap();
        assert_eq!(m.mapping, vec![0, 1, 2]);
        assert_eq!(m.objective, 0.0);
    }

    #[test]
    fn single_block_picks_closest_diagonal() {
        let b = DMatrix::from_element(1, 1, 0.7);
        let bc = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.69]);
        let m = match_block_matrices(&b, &bc).unwrap();
        assert_eq!(m.mapping, vec![1]);
        assert!((m.objective - 0.01).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_lexicographically_smallest() {
        let b = DMatrix::from_element(1, 1, 0.5);
        let bc = DMatrix::from_row_slice(3, 3, &[0.75, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.75]);
        assert_eq!(match_block_matrices(&b, &bc).unwrap().mapping, vec![0]);
    }

    #[test]
    fn size_errors() {
        let small = DMatrix::from_element(1, 1, 0.5);
        let big = DMatrix::from_element(2, 2, 0.5);
        assert!(matches!(match_block_matrices(&big, &small), Err(Error::Dimension(_))));
        let huge = DMatrix::from_element(13, 13, 0.5);
        assert!(matches!(
            match_block_matrices(&small, &huge),
            Err(Error::MatchSize { k2: 13, cap: 12 })
        ));
    }
}
