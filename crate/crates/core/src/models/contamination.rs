use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::check_unit;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::is_symmetric;
use crate::rng::SeedStream;

/// How the added-edge set `W+` and deleted-edge set `W-` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Each vertex joins `W+` with probability `pi_plus`; the rest join `W-`
    /// with probability `pi_minus`.
    Independent,
    /// Within every block, exactly `round(pi_plus * size)` vertices join `W+`
    /// and `round(pi_minus * size)` join `W-`, chosen uniformly.
    Stratified { labels: Vec<usize> },
    /// Fixed sets.
    Explicit { plus: Vec<usize>, minus: Vec<usize> },
}

/// Block contamination parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockContaminationSpec {
    pub pi_plus: f64,
    pub pi_minus: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub selection: Selection,
}

impl BlockContaminationSpec {
    pub fn validate(&self) -> Result<()> {
        check_unit("pi_plus", self.pi_plus)?;
        check_unit("pi_minus", self.pi_minus)?;
        check_unit("s_plus", self.s_plus)?;
        check_unit("s_minus", self.s_minus)?;
        Ok(())
    }
}

/// A contaminated graph together with the sets that drove the contamination.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminatedGraph {
    pub graph: Graph,
    pub w_plus: Vec<usize>,
    pub w_minus: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Plain,
    Plus,
    Minus,
}

fn choose_sets(n: usize, spec: &BlockContaminationSpec, seed: u64) -> Result<Vec<Role>> {
    let mut roles = vec![Role::Plain; n];
    let mut rng = SeedStream::new(seed).rng();
    match &spec.selection {
        Selection::Independent => {
            for role in roles.iter_mut() {
                if rng.gen::<f64>() < spec.pi_plus {
                    *role = Role::Plus;
                } else if rng.gen::<f64>() < spec.pi_minus {
                    *role = Role::Minus;
                }
            }
        }
        Selection::Stratified { labels } => {
            if labels.len() != n {
                return Err(Error::validation(
                    "stratified selection",
                    format!("{} labels for {n} vertices", labels.len()),
                ));
            }
            let k = labels.iter().max().map_or(0, |m| m + 1);
            for block in 0..k {
                let mut members: Vec<usize> = (0..n).filter(|&v| labels[v] == block).collect();
                members.shuffle(&mut rng);
                let size = members.len() as f64;
                let plus = ((spec.pi_plus * size).round() as usize).min(members.len());
                let minus = ((spec.pi_minus * size).round() as usize).min(members.len() - plus);
                for &v in &members[..plus] {
                    roles[v] = Role::Plus;
                }
                for &v in &members[plus..plus + minus] {
                    roles[v] = Role::Minus;
                }
            }
        }
        Selection::Explicit { plus, minus } => {
            for (set, role) in [(plus, Role::Plus), (minus, Role::Minus)] {
                for &v in set {
                    if v >= n {
                        return Err(Error::validation("contamination set", format!("vertex {v} out of range")));
                    }
                    if roles[v] != Role::Plain {
                        return Err(Error::validation(
                            "contamination set",
                            format!("vertex {v} listed twice or in both sets"),
                        ));
                    }
                    roles[v] = role;
                }
            }
        }
    }
    Ok(roles)
}

/// Adds edges on `W+ x (V \ W-)` with probability `s_plus` and deletes edges
/// on `W- x (V \ W+)` with probability `s_minus`.
pub fn contaminate_block(g: &Graph, spec: &BlockContaminationSpec, seed: u64) -> Result<ContaminatedGraph> {
    spec.validate()?;
    let n = g.n();
    let root = SeedStream::new(seed);
    let roles = choose_sets(n, spec, root.child("sets").seed())?;
    let mut rng = root.child("edges").rng();
    let mut out = g.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (roles[i], roles[j]);
            let touches = |r: Role| a == r || b == r;
            let edge = g.has_edge(i, j);
            if touches(Role::Plus) && !touches(Role::Minus) {
                if !edge && rng.gen::<f64>() < spec.s_plus {
                    out.set_edge(i, j, true);
                }
            } else if touches(Role::Minus) && !touches(Role::Plus) && edge && rng.gen::<f64>() < spec.s_minus {
                out.set_edge(i, j, false);
            }
        }
    }
    let collect = |r: Role| (0..n).filter(|&v| roles[v] == r).collect();
    Ok(ContaminatedGraph {
        graph: out,
        w_plus: collect(Role::Plus),
        w_minus: collect(Role::Minus),
    })
}

/// The `3K`-block matrix produced by block contamination of a `K`-block SBM.
///
/// Blocks are ordered `(B1, B1+, B1-, B2, B2+, B2-, ...)`: each original block
/// splits into its untouched part, its `W+` part and its `W-` part.
pub fn build_contaminated_block_matrix(b: &DMatrix<f64>, s_plus: f64, s_minus: f64) -> Result<DMatrix<f64>> {
    if !is_symmetric(b, 0.0) {
        return Err(Error::validation("block matrix", "must be square and symmetric"));
    }
    for &x in b.iter() {
        check_unit("block matrix entry", x)?;
    }
    check_unit("s_plus", s_plus)?;
    check_unit("s_minus", s_minus)?;
    let k = b.nrows();
    Ok(DMatrix::from_fn(3 * k, 3 * k, |r, c| {
        let p = b[(r / 3, c / 3)];
        let added = p + s_plus * (1.0 - p);
        let deleted = p * (1.0 - s_minus);
        match (r % 3, c % 3) {
            (1, 2) | (2, 1) => p,
            (u, v) if u == 1 || v == 1 => added,
            (u, v) if u == 2 || v == 2 => deleted,
            _ => p,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(pi_plus: f64, pi_minus: f64, s_plus: f64, s_minus: f64) -> BlockContaminationSpec {
        BlockContaminationSpec {
            pi_plus,
            pi_minus,
            s_plus,
            s_minus,
            selection: Selection::Independent,
        }
    }

    fn ring(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn zero_rates_leave_graph_unchanged() {
        let g = ring(30);
        let out = contaminate_block(&g, &spec(0.3, 0.3, 0.0, 0.0), 5).unwrap();
        assert_eq!(out.graph, g);
    }

    #[test]
    fn full_addition_completes_graph() {
        let out = contaminate_block(&ring(12), &spec(1.0, 0.0, 1.0, 0.0), 5).unwrap();
        assert_eq!(out.graph, Graph::complete(12));
        assert_eq!(out.w_plus.len(), 12);
        assert!(out.w_minus.is_empty());
    }

    #[test]
    fn stratified_sets_have_exact_sizes() {
        let labels: Vec<usize> = (0..40).map(|v| v / 20).collect();
        let s = BlockContaminationSpec {
            selection: Selection::Stratified { labels: labels.clone() },
            ..spec(0.25, 0.25, 0.2, 0.2)
        };
        let out = contaminate_block(&ring(40), &s, 1).unwrap();
        for block in 0..2 {
            assert_eq!(out.w_plus.iter().filter(|&&v| labels[v] == block).count(), 5);
            assert_eq!(out.w_minus.iter().filter(|&&v| labels[v] == block).count(), 5);
        }
    }

    #[test]
    fn explicit_sets_must_be_disjoint() {
        let s = BlockContaminationSpec {
            selection: Selection::Explicit {
                plus: vec![1, 2],
                minus: vec![2],
            },
            ..spec(0.0, 0.0, 0.5, 0.5)
        };
        assert!(contaminate_block(&ring(5), &s, 0).is_err());
    }

    #[test]
    fn collapses_without_contamination() {
        let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, 0.3]);
        let bc = build_contaminated_block_matrix(&b, 0.0, 0.0).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                assert_eq!(bc[(r, c)], b[(r / 3, c / 3)]);
            }
        }
    }

    #[test]
    fn uniform_half_matrix() {
        let b = DMatrix::from_element(2, 2, 0.5);
        let bc = build_contaminated_block_matrix(&b, 0.4, 0.2).unwrap();
        // x1, x3, x5 coincide, as do x2, x4, x6
        assert!((bc[(0, 1)] - 0.7).abs() < 1e-15);
        assert!((bc[(0, 4)] - 0.7).abs() < 1e-15);
        assert!((bc[(3, 4)] - 0.7).abs() < 1e-15);
        assert!((bc[(0, 2)] - 0.4).abs() < 1e-15);
        assert!((bc[(0, 5)] - 0.4).abs() < 1e-15);
        assert!((bc[(3, 5)] - 0.4).abs() < 1e-15);
    }
}
