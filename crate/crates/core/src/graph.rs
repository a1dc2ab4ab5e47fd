use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected simple graph backed by a dense symmetric 0/1 adjacency matrix.
///
/// The only mutator keeps the matrix symmetric and hollow, so every `Graph`
/// satisfies both invariants by construction.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from an undirected edge list. Duplicate edges collapse;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::validation(
                    "edge",
                    format!("({i}, {j}) out of range for {n} vertices"),
                ));
            }
            if i == j {
                return Err(Error::validation("edge", format!("self-loop at {i}")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    /// Builds a graph from a dense 0/1 matrix, checking symmetry and hollowness.
    pub fn from_adjacency(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::validation("adjacency", "matrix is not square"));
        }
        let mut g = Graph::empty(n);
        for i in 0..n {
            if a[(i, i)] != 0.0 {
                return Err(Error::validation("adjacency", format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let (x, y) = (a[(i, j)], a[(j, i)]);
                if x != y {
                    return Err(Error::validation("adjacency", format!("asymmetric at ({i}, {j})")));
                }
                match x {
                    0.0 => {}
                    1.0 => g.set_edge(i, j, true),
                    v => {
                        return Err(Error::validation(
                            "adjacency",
                            format!("entry {v} at ({i}, {j}) is not 0/1"),
                        ))
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    /// Sets or clears `{i, j}`. Panics on a self-loop.
    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loop at {i}");
        self.adj[i * self.n + j] = present;
        self.adj[j * self.n + i] = present;
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i * self.n..(i + 1) * self.n].iter().filter(|&&e| e).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i * self.n..(i + 1) * self.n]
            .iter()
            .enumerate()
            .filter_map(|(j, &e)| e.then_some(j))
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    /// Subgraph induced on `vertices`; vertex `k` of the result is
    /// `vertices[k]` of `self`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let m = vertices.len();
        let mut g = Graph::empty(m);
        for (a, &i) in vertices.iter().enumerate() {
            for (b, &j) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(i, j) {
                    g.set_edge(a, b, true);
                }
            }
        }
        g
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (self.n * (self.n - 1) / 2) as f64
    }

    /// Checks the adjacency invariants explicitly.
    pub fn is_valid(&self) -> bool {
        (0..self.n).all(|i| {
            !self.has_edge(i, i) && ((i + 1)..self.n).all(|j| self.has_edge(i, j) == self.has_edge(j, i))
        })
    }
}
