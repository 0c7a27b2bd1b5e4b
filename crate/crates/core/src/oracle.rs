//! Brute-force reference solvers for tiny instances.
//!
//! Every hub set `H` and every edge set `E_H ⊆ E[H]` (loops included) is
//! enumerated in ascending bitmask order; routing is then optimized per
//! commodity in closed form. Used to validate the MILP encodings.

use rayon::prelude::*;

use crate::error::{HubError, Result};
use crate::formulations::{assemble_design, DesignSolution, ModelSpec, Routing};
use crate::instance::Instance;
use crate::network::{Arc, Edge};

pub const MAX_NODES: usize = 6;
pub const MAX_COMMODITIES: usize = 12;

fn guard(inst: &Instance) -> Result<()> {
    if inst.n > MAX_NODES || inst.num_commodities() > MAX_COMMODITIES {
        return Err(HubError::OracleGuard(format!(
            "instance has n = {} and {} commodities; enumeration is limited to n <= {MAX_NODES} and at most {MAX_COMMODITIES} commodities",
            inst.n,
            inst.num_commodities()
        )));
    }
    Ok(())
}

#[derive(Copy, Clone)]
enum Law {
    Plain,
    Backup,
    Inflated(f64),
}

/// Per commodity and edge, the cheaper orientation and its cost.
fn best_orientations(inst: &Instance, edges: &[Edge]) -> Vec<Vec<(Arc, f64)>> {
    (0..inst.num_commodities())
        .map(|r| {
            edges
                .iter()
                .map(|&e| {
                    let fwd = Arc(e.0, e.1);
                    let rev = Arc(e.1, e.0);
                    let (cf, cr) = (inst.arc_cost(r, fwd), inst.arc_cost(r, rev));
                    if cr < cf {
                        (rev, cr)
                    } else {
                        (fwd, cf)
                    }
                })
                .collect()
        })
        .collect()
}

/// Best routing cost of all commodities over the chosen edges (indices into `edges`).
fn route_all(inst: &Instance, law: Law, edges: &[Edge], best: &[Vec<(Arc, f64)>], chosen: &[usize]) -> Option<(f64, Vec<Routing>)> {
    let mut total = 0.0;
    let mut routes = Vec::with_capacity(best.len());
    for (r, row) in best.iter().enumerate() {
        match law {
            Law::Plain | Law::Inflated(_) => {
                let mut pick: Option<(usize, f64)> = None;
                for &i in chosen {
                    let factor = match law {
                        Law::Inflated(beta) => 1.0 + beta * inst.prob(edges[i]),
                        _ => 1.0,
                    };
                    let v = factor * row[i].1;
                    if pick.is_none_or(|(_, b)| v < b) {
                        pick = Some((i, v));
                    }
                }
                let (i, v) = pick?;
                total += v;
                routes.push(Routing {
                    commodity: r,
                    original: row[i].0,
                    backup: None,
                });
            }
            Law::Backup => {
                let mut pick: Option<(usize, usize, f64)> = None;
                for &i in chosen {
                    let p = inst.prob(edges[i]);
                    for &j in chosen {
                        if i == j {
                            continue;
                        }
                        let v = (1.0 - p) * row[i].1 + p * row[j].1;
                        if pick.is_none_or(|(_, _, b)| v < b) {
                            pick = Some((i, j, v));
                        }
                    }
                }
                let (i, j, v) = pick?;
                total += v;
                routes.push(Routing {
                    commodity: r,
                    original: row[i].0,
                    backup: Some(row[j].0),
                });
            }
        }
    }
    Some((total, routes))
}

/// Whether the backbone satisfies the singleton and pairwise λ-cutset
/// conditions, checked over every node subset.
pub fn is_lambda_connected(n: usize, hubs: &[usize], edges: &[Edge], lambda: usize) -> bool {
    let lam = lambda as f64;
    let mut is_hub = vec![false; n];
    for &k in hubs {
        is_hub[k] = true;
    }
    let mut has_loop = vec![0.0; n];
    for e in edges.iter().filter(|e| e.is_loop()) {
        has_loop[e.0] = 1.0;
    }
    for &k in hubs {
        let degree = edges.iter().filter(|e| !e.is_loop() && e.touches(k)).count() as f64;
        if degree + has_loop[k] < lam {
            return false;
        }
    }
    for mask in 1u32..(1u32 << n) - 1 {
        let inside = |v: usize| mask >> v & 1 == 1;
        if !(0..n).any(|l| is_hub[l] && !inside(l)) {
            continue;
        }
        let cut = edges.iter().filter(|e| inside(e.0) != inside(e.1)).count() as f64;
        for k in (0..n).filter(|&k| is_hub[k] && inside(k)) {
            if cut + has_loop[k] < lam {
                return false;
            }
        }
    }
    true
}

fn enumerate(inst: &Instance, spec: ModelSpec, law: Law, lambda: Option<usize>) -> Result<(f64, DesignSolution)> {
    guard(inst)?;
    let n = inst.n;
    let best_design = (0u32..1 << n)
        .into_par_iter()
        .filter_map(|hmask| {
            let hubs: Vec<usize> = (0..n).filter(|&k| hmask >> k & 1 == 1).collect();
            let edges: Vec<Edge> = hubs
                .iter()
                .flat_map(|&k| hubs.iter().filter(move |&&l| l >= k).map(move |&l| Edge(k, l)))
                .collect();
            let best = best_orientations(inst, &edges);
            let hub_cost: f64 = hubs.iter().map(|&k| inst.hub_setup[k]).sum();
            let mut local: Option<(f64, u32, u64, Vec<Edge>, Vec<Routing>)> = None;
            for emask in 0u64..1 << edges.len() {
                let chosen: Vec<usize> = (0..edges.len()).filter(|&i| emask >> i & 1 == 1).collect();
                let picked: Vec<Edge> = chosen.iter().map(|&i| edges[i]).collect();
                if let Some(lam) = lambda {
                    if !is_lambda_connected(n, &hubs, &picked, lam) {
                        continue;
                    }
                }
                let Some((routing, routes)) = route_all(inst, law, &edges, &best, &chosen) else {
                    continue;
                };
                let total = hub_cost + picked.iter().map(|&e| inst.edge_cost(e)).sum::<f64>() + routing;
                if local.as_ref().is_none_or(|b| total < b.0) {
                    local = Some((total, hmask, emask, picked, routes));
                }
            }
            local.map(|(total, h, e, picked, routes)| (total, h, e, hubs, picked, routes))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (_, _, _, hubs, picked, routes) = best_design.ok_or_else(|| {
        HubError::InfeasibleByConstruction("no enumerated design is feasible".into())
    })?;
    let design = assemble_design(inst, &spec, hubs, picked, routes);
    Ok((design.cost.total, design))
}

/// Exact optimum of the unprotected model by enumeration.
pub fn oracle_m0(inst: &Instance) -> Result<(f64, DesignSolution)> {
    enumerate(inst, ModelSpec::m0(), Law::Plain, None)
}

/// Exact optimum of the single-backup model: per commodity the best ordered
/// pair of arcs on distinct activated edges under the expected cost.
pub fn oracle_m1(inst: &Instance) -> Result<(f64, DesignSolution)> {
    enumerate(inst, ModelSpec::m1(), Law::Backup, None)
}

/// Exact optimum of the λ-connected model with `(1 + βp)` routing costs.
pub fn oracle_m2(inst: &Instance, lambda: usize, beta: f64) -> Result<(f64, DesignSolution)> {
    enumerate(inst, ModelSpec::m2(lambda, beta), Law::Inflated(beta), Some(lambda))
}
