//! Random graph models and contamination operators.
//!
//! All samplers are pure functions of their inputs and a `u64` seed.

mod contamination;
mod diffuse;
mod grdpg;
mod sbm;

pub use contamination::{
    build_contaminated_block_matrix, contaminate_block, BlockContaminationSpec, ContaminatedGraph,
    Selection,
};
pub use diffuse::{contaminate_diffuse, feasible_orthant_rotation, DiffuseNoiseSpec, NoiseRegion};
pub use grdpg::{
    sample_correlated_grdpg, sample_grdpg, sbm_latent_positions, GrdpgSpec,
};
pub use sbm::{sample_correlated_sbm, sample_sbm, Membership, SbmSpec};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::Rng;

/// Draws each pair `i < j` independently with probability `p(i, j)`.
pub(crate) fn sample_independent(n: usize, rng: &mut Rng, p: impl Fn(usize, usize) -> f64) -> Graph {
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p(i, j) {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

/// Conditional-Bernoulli coupling: the first indicator is `Bern(p)`, the
/// second is `Bern(p + rho(1 - p))` given a first edge and `Bern(p(1 - rho))`
/// otherwise. Both marginals are `Bern(p)` and the correlation is `rho`.
pub(crate) fn sample_coupled(
    n: usize,
    rho: f64,
    rng: &mut Rng,
    p: impl Fn(usize, usize) -> f64,
) -> (Graph, Graph) {
    let mut g1 = Graph::empty(n);
    let mut g2 = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let pij = p(i, j);
            let e1 = rng.gen::<f64>() < pij;
            let q = if e1 { pij + rho * (1.0 - pij) } else { pij * (1.0 - rho) };
            let e2 = rng.gen::<f64>() < q;
            if e1 {
                g1.set_edge(i, j, true);
            }
            if e2 {
                g2.set_edge(i, j, true);
            }
        }
    }
    (g1, g2)
}

pub(crate) fn check_unit(what: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::validation(what, format!("{x} is outside [0, 1]")));
    }
    Ok(())
}
