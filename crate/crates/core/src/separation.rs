//! Max-flow, Gomory–Hu trees and exact separation of λ-cutset inequalities.
//!
//! Two inequality families protect the backbone. For a node set `S`, a hub
//! `k ∈ S` and a hub `l ∉ S`:
//!
//! * small-set form, valid when `|S| ≤ λ − 1`: `y(δ(S)) + y_kk ≥ λ z_k`
//! * pairwise form, always valid: `y(δ(S)) + y_kk ≥ λ (z_k + z_l − 1)`
//!
//! where `δ(S)` never contains loops.

use std::collections::{HashSet, VecDeque};

use crate::instance::Matrix;
use crate::network::Edge;

/// Capacities below this are treated as absent from the support graph.
pub const SUPPORT_THRESHOLD: f64 = 1e-7;

/// Undirected capacitated graph on nodes `0..n` without self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportGraph {
    n: usize,
    cap: Vec<f64>,
}

impl SupportGraph {
    pub fn new(n: usize) -> Self {
        SupportGraph {
            n,
            cap: vec![0.0; n * n],
        }
    }

    /// Support of a fractional `y`: off-diagonal entries above [`SUPPORT_THRESHOLD`].
    pub fn from_point(y: &Matrix) -> Self {
        let n = y.dim();
        let mut g = SupportGraph::new(n);
        for k in 0..n {
            for l in k + 1..n {
                let v = y[(k, l)];
                if v > SUPPORT_THRESHOLD {
                    g.add_edge(k, l, v);
                }
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut g = SupportGraph::new(n);
        for &(u, v, c) in edges {
            g.add_edge(u, v, c);
        }
        g
    }

    /// Adds `c` to the capacity of `{u, v}`; loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        if u != v {
            self.cap[u * self.n + v] += c;
            self.cap[v * self.n + u] += c;
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn capacity(&self, u: usize, v: usize) -> f64 {
        self.cap[u * self.n + v]
    }

    /// Nodes with at least one incident support edge.
    pub fn support_nodes(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&u| (0..self.n).any(|v| self.capacity(u, v) > 0.0))
            .collect()
    }

    /// Total capacity of edges with exactly one endpoint in `side`.
    pub fn cut_value(&self, side: &[bool]) -> f64 {
        let mut total = 0.0;
        for u in 0..self.n {
            if !side[u] {
                continue;
            }
            for v in 0..self.n {
                if !side[v] {
                    total += self.capacity(u, v);
                }
            }
        }
        total
    }
}

/// Maximum `s`–`t` flow by shortest augmenting paths. Returns the flow value
/// and the source side of a minimum cut (nodes reachable from `s` in the residual graph).
pub fn max_flow(g: &SupportGraph, s: usize, t: usize) -> (f64, Vec<bool>) {
    assert!(s != t, "max_flow needs distinct terminals");
    let n = g.n;
    let mut flow = vec![0.0; n * n];
    let residual = |flow: &[f64], u: usize, v: usize| g.cap[u * n + v] - flow[u * n + v];
    let eps = 1e-12;
    let mut total = 0.0;
    loop {
        let mut pred = vec![usize::MAX; n];
        pred[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if pred[v] == usize::MAX && residual(&flow, u, v) > eps {
                    pred[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if pred[t] == usize::MAX {
            let side: Vec<bool> = pred.iter().map(|&p| p != usize::MAX).collect();
            return (total, side);
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = pred[v];
            push = push.min(residual(&flow, u, v));
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = pred[v];
            flow[u * n + v] += push;
            flow[v * n + u] -= push;
            v = u;
        }
        total += push;
    }
}

/// Gomory–Hu tree built by Gusfield's procedure.
#[derive(Clone, Debug)]
pub struct GomoryHuTree {
    /// `parent[i]` for `i > 0`; node 0 is the root.
    pub parent: Vec<usize>,
    /// Flow value of the tree edge `(i, parent[i])`; `weight[0]` is unused.
    pub weight: Vec<f64>,
    /// Source side of the minimum cut computed for each tree edge.
    pub cuts: Vec<Vec<bool>>,
}

impl GomoryHuTree {
    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    /// Minimum weight on the tree path between `u` and `v`, the `u`–`v` max-flow value.
    pub fn pair_value(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return f64::INFINITY;
        }
        let path_to_root = |mut x: usize| {
            let mut path = vec![x];
            while x != 0 {
                x = self.parent[x];
                path.push(x);
            }
            path
        };
        let pu = path_to_root(u);
        let pv = path_to_root(v);
        let on_pv: HashSet<usize> = pv.iter().copied().collect();
        let meet = *pu.iter().find(|x| on_pv.contains(x)).expect("tree is connected");
        let mut best = f64::INFINITY;
        for path in [&pu, &pv] {
            for &x in path.iter().take_while(|&&x| x != meet) {
                best = best.min(self.weight[x]);
            }
        }
        best
    }

    /// Smallest tree edge weight, the global minimum cut value.
    pub fn global_min_cut(&self) -> f64 {
        self.weight.iter().skip(1).copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn gomory_hu(g: &SupportGraph) -> GomoryHuTree {
    let n = g.n;
    let mut parent = vec![0usize; n];
    let mut weight = vec![0.0; n];
    let mut cuts = vec![Vec::new(); n];
    for i in 1..n {
        let (value, side) = max_flow(g, i, parent[i]);
        weight[i] = value;
        for j in i + 1..n {
            if side[j] && parent[j] == parent[i] {
                parent[j] = i;
            }
        }
        cuts[i] = side;
    }
    GomoryHuTree {
        parent,
        weight,
        cuts,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum InequalityForm {
    /// `y(δ(S)) + y_kk ≥ λ z_k`, only for `|S| ≤ λ − 1`.
    SmallSet,
    /// `y(δ(S)) + y_kk ≥ λ (z_k + z_l − 1)`.
    Pairwise,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationResult {
    /// Membership of `S`, indexed by node.
    pub set: Vec<bool>,
    pub hub: usize,
    pub partner: Option<usize>,
    pub form: InequalityForm,
    pub violation: f64,
}

impl SeparationResult {
    pub fn members(&self) -> Vec<usize> {
        (0..self.set.len()).filter(|&i| self.set[i]).collect()
    }

    /// Non-loop edges crossing the cut.
    pub fn cut_edges(&self) -> Vec<Edge> {
        let n = self.set.len();
        let mut out = Vec::new();
        for k in 0..n {
            for l in k + 1..n {
                if self.set[k] != self.set[l] {
                    out.push(Edge(k, l));
                }
            }
        }
        out
    }

    /// Row as `(y coefficients, z coefficients, rhs)` in `≥` sense.
    pub fn row(&self, lambda: usize) -> (Vec<(Edge, f64)>, Vec<(usize, f64)>, f64) {
        let lam = lambda as f64;
        let mut y: Vec<(Edge, f64)> = self.cut_edges().into_iter().map(|e| (e, 1.0)).collect();
        y.push((Edge(self.hub, self.hub), 1.0));
        match (self.form, self.partner) {
            (InequalityForm::Pairwise, Some(l)) => (y, vec![(self.hub, -lam), (l, -lam)], -lam),
            _ => (y, vec![(self.hub, -lam)], 0.0),
        }
    }

    /// Violation of this row at `(z, y)`; positive when violated.
    pub fn evaluate(&self, lambda: usize, z: &[f64], y: &Matrix) -> f64 {
        let (yc, zc, rhs) = self.row(lambda);
        let lhs: f64 = yc.iter().map(|&(e, a)| a * y[(e.0, e.1)]).sum::<f64>()
            + zc.iter().map(|&(k, a)| a * z[k]).sum::<f64>();
        rhs - lhs
    }
}

/// Checks a candidate set `S` and returns the violated row it induces, if any.
pub fn check_set(set: &[bool], z: &[f64], y: &Matrix, lambda: usize, tol: f64) -> Option<SeparationResult> {
    let n = z.len();
    let size = set.iter().filter(|&&b| b).count();
    if size == 0 || size == n {
        return None;
    }
    let lam = lambda as f64;
    let mut cut = 0.0;
    for k in 0..n {
        for l in k + 1..n {
            if set[k] != set[l] {
                cut += y[(k, l)];
            }
        }
    }
    let mut hub = usize::MAX;
    let mut best = f64::NEG_INFINITY;
    for k in (0..n).filter(|&k| set[k]) {
        let score = lam * z[k] - y[(k, k)];
        if score > best {
            best = score;
            hub = k;
        }
    }
    if cut >= best - tol {
        return None;
    }
    if size < lambda {
        return Some(SeparationResult {
            set: set.to_vec(),
            hub,
            partner: None,
            form: InequalityForm::SmallSet,
            violation: best - cut,
        });
    }
    let mut partner = usize::MAX;
    let mut zmax = f64::NEG_INFINITY;
    for l in (0..n).filter(|&l| !set[l]) {
        if z[l] > zmax {
            zmax = z[l];
            partner = l;
        }
    }
    let violation = lam * (z[hub] + zmax - 1.0) - y[(hub, hub)] - cut;
    (violation > tol).then(|| SeparationResult {
        set: set.to_vec(),
        hub,
        partner: Some(partner),
        form: InequalityForm::Pairwise,
        violation,
    })
}

/// Separates λ-cutset inequalities at `(z, y)`.
///
/// Candidate sets are every singleton plus both sides of each cut recorded
/// while building the Gomory–Hu tree of the support graph. The tree spans all
/// nodes, so hubs without incident support edges appear as isolated sides.
pub fn separate(z: &[f64], y: &Matrix, lambda: usize, tol: f64) -> Vec<SeparationResult> {
    let n = z.len();
    if n < 2 {
        return Vec::new();
    }
    let graph = SupportGraph::from_point(y);
    let tree = gomory_hu(&graph);
    let mut candidates: Vec<Vec<bool>> = Vec::new();
    for k in 0..n {
        let mut s = vec![false; n];
        s[k] = true;
        candidates.push(s);
    }
    for side in tree.cuts.iter().skip(1) {
        candidates.push(side.clone());
        candidates.push(side.iter().map(|b| !b).collect());
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for set in candidates {
        if let Some(res) = check_set(&set, z, y, lambda, tol) {
            if seen.insert((res.set.clone(), res.hub, res.partner)) {
                out.push(res);
            }
        }
    }
    out
}

/// Exhaustive reference: whether any `S` and hub choice yields a violated row.
/// Exponential in `n`; meant for tests and audits on small graphs.
pub fn exists_violation_exhaustive(z: &[f64], y: &Matrix, lambda: usize, tol: f64) -> bool {
    let n = z.len();
    let lam = lambda as f64;
    for mask in 1u64..(1u64 << n) - 1 {
        let set: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let size = mask.count_ones() as usize;
        let mut cut = 0.0;
        for k in 0..n {
            for l in k + 1..n {
                if set[k] != set[l] {
                    cut += y[(k, l)];
                }
            }
        }
        let zmax = (0..n).filter(|&l| !set[l]).map(|l| z[l]).fold(f64::NEG_INFINITY, f64::max);
        for k in (0..n).filter(|&k| set[k]) {
            let rhs = if size < lambda {
                lam * z[k]
            } else {
                lam * (z[k] + zmax - 1.0)
            };
            if cut + y[(k, k)] < rhs - tol {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SupportGraph {
        SupportGraph::from_edges(3, &[(0, 1, 0.5), (0, 2, 0.5), (1, 2, 1.0)])
    }

    #[test]
    fn triangle_flows() {
        let g = triangle();
        let (v, side) = max_flow(&g, 0, 1);
        assert_eq!(v, 1.0);
        assert!((g.cut_value(&side) - v).abs() < 1e-12);
        assert_eq!(max_flow(&g, 1, 2).0, 1.5);
    }

    #[test]
    fn isolated_nodes_have_zero_flow() {
        let g = SupportGraph::new(2);
        let (v, side) = max_flow(&g, 0, 1);
        assert_eq!(v, 0.0);
        assert_eq!(side, vec![true, false]);
    }

    #[test]
    fn triangle_tree_values() {
        let t = gomory_hu(&triangle());
        assert_eq!(t.pair_value(0, 1), 1.0);
        assert_eq!(t.pair_value(0, 2), 1.0);
        assert_eq!(t.pair_value(1, 2), 1.5);
        assert_eq!(t.global_min_cut(), 1.0);
    }

    #[test]
    fn star_leaf_pairs() {
        let g = SupportGraph::from_edges(5, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]);
        let t = gomory_hu(&g);
        for a in 1..5 {
            for b in a + 1..5 {
                assert_eq!(t.pair_value(a, b), 1.0);
            }
        }
    }

    #[test]
    fn pairwise_violation_arithmetic() {
        // S = {0, 1} joined to {2, 3} by one unit of capacity.
        let n = 4;
        let mut y = Matrix::zeros(n);
        for (k, l) in [(0, 1), (2, 3), (1, 2)] {
            y[(k, l)] = 1.0;
            y[(l, k)] = 1.0;
        }
        let z = vec![1.0; n];
        let res = check_set(&[true, true, false, false], &z, &y, 2, 1e-6).unwrap();
        assert_eq!(res.form, InequalityForm::Pairwise);
        assert_eq!(res.hub, 0);
        assert_eq!(res.partner, Some(2));
        assert!((res.violation - 1.0).abs() < 1e-12);
        assert!((res.evaluate(2, &z, &y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lone_hub_with_loop_is_caught() {
        let mut y = Matrix::zeros(3);
        y[(0, 0)] = 1.0;
        let z = vec![1.0, 0.0, 0.0];
        let found = separate(&z, &y, 2, 1e-6);
        let single = found.iter().find(|r| r.members() == vec![0]).unwrap();
        assert_eq!(single.form, InequalityForm::SmallSet);
        assert!((single.violation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn connected_design_has_no_violation() {
        // 4-cycle of hubs: every cut holds two edges.
        let n = 4;
        let mut y = Matrix::zeros(n);
        for (k, l) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            y[(k, l)] = 1.0;
            y[(l, k)] = 1.0;
        }
        let z = vec![1.0; n];
        assert!(separate(&z, &y, 2, 1e-6).is_empty());
        assert!(!exists_violation_exhaustive(&z, &y, 2, 1e-6));
        assert!(!separate(&z, &y, 3, 1e-6).is_empty());
    }
}
