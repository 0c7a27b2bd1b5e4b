//! Post-solve analytics: re-routing over a damaged backbone, density
//! indices, cost shares, price of robustness and connectivity audits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{HubError, Result};
use crate::formulations::DesignSolution;
use crate::instance::Instance;
use crate::network::Edge;
use crate::separation::{max_flow, SupportGraph};

/// A routing path `o → hubs… → d` with its cost (demand included).
#[derive(Clone, Debug, PartialEq)]
pub struct RoutePath {
    pub hubs: Vec<usize>,
    pub cost: f64,
}

#[derive(PartialEq)]
struct Label {
    cost: f64,
    node: usize,
}

impl Eq for Label {}
impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Cheapest path for commodity `r` through hubs `hubs` using only `edges`.
///
/// A path through a single hub `h` needs the loop `{h, h}` in `edges` and
/// pays its handling cost `c_hh`; longer paths chain inter-hub edges.
pub fn shortest_route(inst: &Instance, r: usize, hubs: &[usize], edges: &[Edge]) -> Option<RoutePath> {
    let c = inst.commodities[r];
    let m = hubs.len();
    if m == 0 {
        return None;
    }
    let mut pos = vec![usize::MAX; inst.n];
    for (i, &h) in hubs.iter().enumerate() {
        pos[h] = i;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut has_loop = vec![false; m];
    for &e in edges {
        let (a, b) = (pos[e.0], pos[e.1]);
        if a == usize::MAX || b == usize::MAX {
            continue;
        }
        if e.is_loop() {
            has_loop[a] = true;
        } else {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable_by_key(|&i| hubs[i]);
    }
    // States: i < m is hub i entered from the origin, m + i is hub i reached
    // over at least one inter-hub edge, 2m is the destination.
    let target = 2 * m;
    let mut dist = vec![f64::INFINITY; 2 * m + 1];
    let mut pred = vec![usize::MAX; 2 * m + 1];
    let mut heap = BinaryHeap::new();
    for (i, &h) in hubs.iter().enumerate() {
        dist[i] = inst.access_cost[(c.origin, h)];
        heap.push(Label { cost: dist[i], node: i });
    }
    while let Some(Label { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if node == target {
            break;
        }
        let i = node % m;
        let h = hubs[i];
        let mut relax = |to: usize, w: f64, heap: &mut BinaryHeap<Label>| {
            let nd = cost + w;
            if nd < dist[to] {
                dist[to] = nd;
                pred[to] = node;
                heap.push(Label { cost: nd, node: to });
            }
        };
        let exit = inst.access_cost[(h, c.destination)];
        if node >= m {
            relax(target, exit, &mut heap);
        } else if has_loop[i] {
            relax(target, inst.interhub_cost[(h, h)] + exit, &mut heap);
        }
        for &j in &adj[i] {
            relax(m + j, inst.interhub_cost[(h, hubs[j])], &mut heap);
        }
    }
    if !dist[target].is_finite() {
        return None;
    }
    let mut path = Vec::new();
    let mut node = pred[target];
    while node != usize::MAX {
        path.push(hubs[node % m]);
        node = pred[node];
    }
    path.reverse();
    Some(RoutePath {
        hubs: path,
        cost: c.demand * dist[target],
    })
}

/// Cheapest backup path for commodity `r` once `failed` is lost.
pub fn recover_backup_path(sol: &DesignSolution, inst: &Instance, r: usize, failed: Edge) -> Result<Option<RoutePath>> {
    if r >= inst.num_commodities() {
        return Err(HubError::Index(format!(
            "commodity {r} out of range (instance has {})",
            inst.num_commodities()
        )));
    }
    let surviving: Vec<Edge> = sol.edges.iter().copied().filter(|&e| e != failed).collect();
    Ok(shortest_route(inst, r, &sol.hubs, &surviving))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub num_hubs: usize,
    /// Activated hub edges, loops included.
    pub num_links: usize,
    pub num_loops: usize,
    /// `2 #Lk / (#H (#H + 1))`; `None` without hubs.
    pub i1: Option<f64>,
    /// `2 (#Lk − #Lp) / (#H (#H − 1))`; `None` with fewer than two hubs.
    pub i2: Option<f64>,
    /// Percentages of the total cost.
    pub routing_share: f64,
    pub hub_share: f64,
    pub link_share: f64,
}

pub fn density_indices(hubs: usize, links: usize, loops: usize) -> (Option<f64>, Option<f64>) {
    let h = hubs as f64;
    let i1 = (hubs > 0).then(|| 2.0 * links as f64 / (h * (h + 1.0)));
    let i2 = (hubs > 1).then(|| 2.0 * (links - loops) as f64 / (h * (h - 1.0)));
    (i1, i2)
}

pub fn network_metrics(sol: &DesignSolution) -> NetworkMetrics {
    let num_hubs = sol.hubs.len();
    let num_links = sol.edges.len();
    let num_loops = sol.num_loops();
    let (i1, i2) = density_indices(num_hubs, num_links, num_loops);
    let c = &sol.cost;
    let total = c.hub_setup + c.edge_setup + c.routing;
    let share = |v: f64| if total > 0.0 { 100.0 * v / total } else { 0.0 };
    NetworkMetrics {
        num_hubs,
        num_links,
        num_loops,
        i1,
        i2,
        routing_share: share(c.routing),
        hub_share: share(c.hub_setup),
        link_share: share(c.edge_setup),
    }
}

/// Percent increase in hub plus edge set-up cost of `protected` over `base`;
/// `None` when the base design has no set-up cost.
pub fn price_of_robustness(base: &DesignSolution, protected: &DesignSolution) -> Result<Option<f64>> {
    if base.instance_hash != protected.instance_hash {
        return Err(HubError::InstanceMismatch {
            expected: base.instance_hash.clone(),
            found: protected.instance_hash.clone(),
        });
    }
    Ok(setup_deviation(base.cost.setup(), protected.cost.setup()))
}

pub fn setup_deviation(base: f64, protected: f64) -> Option<f64> {
    (base != 0.0).then(|| 100.0 * (protected - base) / base)
}

/// A hub or hub pair whose backbone connectivity falls short of `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityViolation {
    pub hub: usize,
    pub partner: Option<usize>,
    /// Cut or flow value plus the hub's loop.
    pub value: f64,
}

/// Checks `y(δ(k)) + y_kk ≥ λ` for every hub and `maxflow(k, l) + y_kk ≥ λ`
/// for every ordered hub pair on the activated backbone.
pub fn lambda_audit(n: usize, sol: &DesignSolution, lambda: usize) -> Vec<ConnectivityViolation> {
    audit_edges(n, &sol.hubs, &sol.edges, lambda)
}

pub fn audit_edges(n: usize, hubs: &[usize], edges: &[Edge], lambda: usize) -> Vec<ConnectivityViolation> {
    let lam = lambda as f64;
    let mut g = SupportGraph::new(n);
    let mut has_loop = vec![0.0; n];
    for &e in edges {
        if e.is_loop() {
            has_loop[e.0] = 1.0;
        } else {
            g.add_edge(e.0, e.1, 1.0);
        }
    }
    let mut out = Vec::new();
    for &k in hubs {
        let degree: f64 = (0..n).map(|l| g.capacity(k, l)).sum();
        if degree + has_loop[k] < lam {
            out.push(ConnectivityViolation {
                hub: k,
                partner: None,
                value: degree + has_loop[k],
            });
        }
    }
    for &k in hubs {
        for &l in hubs {
            if k == l {
                continue;
            }
            let (flow, _) = max_flow(&g, k, l);
            if flow + has_loop[k] < lam - 1e-9 {
                out.push(ConnectivityViolation {
                    hub: k,
                    partner: Some(l),
                    value: flow + has_loop[k],
                });
            }
        }
    }
    out
}
