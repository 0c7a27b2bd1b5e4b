//! Edge and arc indexing over the complete graph with loops.

use serde::{Deserialize, Serialize};

/// Undirected edge `{k, l}` stored with `k <= l`; `k == l` is a loop.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn is_loop(self) -> bool {
        self.0 == self.1
    }

    pub fn touches(self, k: usize) -> bool {
        self.0 == k || self.1 == k
    }

    /// Position in the upper-triangular enumeration used by [`edges`].
    pub fn index(self, n: usize) -> usize {
        self.0 * n - self.0 * (self.0 + 1) / 2 + self.1
    }
}

/// Directed arc `(k, l)`; `k == l` is the loop arc.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc(pub usize, pub usize);

impl Arc {
    pub fn edge(self) -> Edge {
        Edge::new(self.0, self.1)
    }

    pub fn reversed(self) -> Arc {
        Arc(self.1, self.0)
    }

    pub fn index(self, n: usize) -> usize {
        self.0 * n + self.1
    }
}

/// All edges `{k, l}`, `k <= l`, in row-major upper-triangular order.
pub fn edges(n: usize) -> impl Iterator<Item = Edge> {
    (0..n).flat_map(move |k| (k..n).map(move |l| Edge(k, l)))
}

/// All arcs `(k, l)` in row-major order.
pub fn arcs(n: usize) -> impl Iterator<Item = Arc> {
    (0..n).flat_map(move |k| (0..n).map(move |l| Arc(k, l)))
}

pub fn num_edges(n: usize) -> usize {
    n * (n + 1) / 2
}
