use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::{check_unit, sample_coupled, sample_independent};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::is_symmetric;
use crate::rng::{rng_from, SeedStream};

/// How vertices are assigned to blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Each vertex draws its block independently from `pi`.
    Probabilities(Vec<f64>),
    /// Exact block sizes; vertices are laid out block by block.
    Sizes(Vec<usize>),
}

/// Stochastic blockmodel parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    n: usize,
    b: DMatrix<f64>,
    membership: Membership,
    nu: f64,
}

impl SbmSpec {
    pub fn with_sizes(b: DMatrix<f64>, sizes: Vec<usize>, nu: f64) -> Result<Self> {
        let n = sizes.iter().sum();
        Self::new(n, b, Membership::Sizes(sizes), nu)
    }

    pub fn with_probabilities(b: DMatrix<f64>, pi: Vec<f64>, n: usize, nu: f64) -> Result<Self> {
        Self::new(n, b, Membership::Probabilities(pi), nu)
    }

    pub fn new(n: usize, b: DMatrix<f64>, membership: Membership, nu: f64) -> Result<Self> {
        let k = b.nrows();
        if k == 0 || !is_symmetric(&b, 0.0) {
            return Err(Error::validation("block matrix", "must be square, symmetric and nonempty"));
        }
        for &x in b.iter() {
            check_unit("block matrix entry", x)?;
        }
        check_unit("sparsity", nu)?;
        match &membership {
            Membership::Probabilities(pi) => {
                if pi.len() != k {
                    return Err(Error::validation("block probabilities", format!("expected {k} entries")));
                }
                if pi.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::validation("block probabilities", "entries must be positive"));
                }
                let s: f64 = pi.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::validation("block probabilities", format!("sum to {s}, not 1")));
                }
            }
            Membership::Sizes(sizes) => {
                if sizes.len() != k {
                    return Err(Error::validation("block sizes", format!("expected {k} entries")));
                }
                if sizes.iter().sum::<usize>() != n {
                    return Err(Error::validation("block sizes", format!("do not sum to {n}")));
                }
            }
        }
        Ok(SbmSpec { n, b, membership, nu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.b.nrows()
    }

    pub fn block_matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Draws block labels (0-based). Fixed sizes ignore the seed.
    pub fn draw_labels(&self, seed: u64) -> Vec<usize> {
        match &self.membership {
            Membership::Sizes(sizes) => sizes
                .iter()
                .enumerate()
                .flat_map(|(b, &s)| std::iter::repeat(b).take(s))
                .collect(),
            Membership::Probabilities(pi) => {
                let dist = WeightedIndex::new(pi).expect("validated weights");
                let mut rng = rng_from(seed);
                (0..self.n).map(|_| dist.sample(&mut rng)).collect()
            }
        }
    }
}

/// Samples an SBM graph and its block labels.
pub fn sample_sbm(spec: &SbmSpec, seed: u64) -> (Graph, Vec<usize>) {
    let root = SeedStream::new(seed);
    let labels = spec.draw_labels(root.child("labels").seed());
    let mut rng = root.child("edges").rng();
    let g = sample_independent(spec.n, &mut rng, |i, j| spec.nu * spec.b[(labels[i], labels[j])]);
    (g, labels)
}

/// Samples a `rho`-correlated SBM pair sharing one set of block labels.
pub fn sample_correlated_sbm(spec: &SbmSpec, rho: f64, seed: u64) -> Result<(Graph, Graph, Vec<usize>)> {
    check_unit("correlation", rho)?;
    let root = SeedStream::new(seed);
    let labels = spec.draw_labels(root.child("labels").seed());
    let mut rng = root.child("edges").rng();
    let (g1, g2) = sample_coupled(spec.n, rho, &mut rng, |i, j| {
        spec.nu * spec.b[(labels[i], labels[j])]
    });
    Ok((g1, g2, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_b() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.3])
    }

    #[test]
    fn unit_block_gives_complete_graph() {
        let spec = SbmSpec::with_sizes(DMatrix::from_element(1, 1, 1.0), vec![4], 1.0).unwrap();
        let (g, labels) = sample_sbm(&spec, 1);
        assert_eq!(g, Graph::complete(4));
        assert_eq!(labels, vec![0; 4]);
    }

    #[test]
    fn zero_sparsity_gives_empty_graph() {
        let spec = SbmSpec::with_sizes(reference_b(), vec![30, 30], 0.0).unwrap();
        assert_eq!(sample_sbm(&spec, 3).0.edge_count(), 0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SbmSpec::with_sizes(reference_b(), vec![3, 3], 1.5).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.3, 0.3]);
        assert!(SbmSpec::with_sizes(asym, vec![3, 3], 1.0).is_err());
        assert!(SbmSpec::with_probabilities(reference_b(), vec![0.5, 0.6], 10, 1.0).is_err());
        assert!(SbmSpec::with_probabilities(reference_b(), vec![1.0, 0.0], 10, 1.0).is_err());
        assert!(SbmSpec::new(7, reference_b(), Membership::Sizes(vec![3, 3]), 1.0).is_err());
    }

    #[test]
    fn probabilistic_membership_covers_blocks() {
        let spec = SbmSpec::with_probabilities(reference_b(), vec![0.5, 0.5], 400, 1.0).unwrap();
        let labels = spec.draw_labels(9);
        let ones = labels.iter().filter(|&&l| l == 1).count();
        assert!(ones > 150 && ones < 250);
    }

    #[test]
    fn full_correlation_copies_graph() {
        let spec = SbmSpec::with_sizes(reference_b(), vec![40, 40], 1.0).unwrap();
        for seed in 0..5 {
            let (g1, g2, _) = sample_correlated_sbm(&spec, 1.0, seed).unwrap();
            assert_eq!(g1, g2);
        }
        assert!(sample_correlated_sbm(&spec, 1.2, 0).is_err());
    }
}
