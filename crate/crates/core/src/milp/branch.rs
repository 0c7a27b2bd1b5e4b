//! Best-bound branch-and-cut over a single warm-started LP.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use super::simplex::{LpEngine, LpStatus};
use super::{Constraint, MilpProblem, MilpSolution, MilpStatus, SolverConfig};
use crate::error::{HubError, Result};

/// A lazy-constraint callback. It receives the current LP point and returns
/// rows violated by that point; an empty result accepts the point.
pub trait Separator {
    fn separate(&mut self, point: &[f64]) -> Vec<Constraint>;
}

impl<F: FnMut(&[f64]) -> Vec<Constraint>> Separator for F {
    fn separate(&mut self, point: &[f64]) -> Vec<Constraint> {
        self(point)
    }
}

struct Node {
    bound: f64,
    id: usize,
    /// Bound overrides relative to the root: (variable, lower, upper).
    fixes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

pub struct MilpSolver<'a> {
    problem: &'a MilpProblem,
    config: SolverConfig,
    separator: Option<Box<dyn Separator + 'a>>,
}

impl<'a> MilpSolver<'a> {
    pub fn new(problem: &'a MilpProblem, config: SolverConfig) -> Self {
        MilpSolver {
            problem,
            config,
            separator: None,
        }
    }

    /// Installs a lazy-constraint callback invoked at every LP optimum.
    pub fn register_separation(&mut self, separator: impl Separator + 'a) {
        self.separator = Some(Box::new(separator));
    }

    pub fn solve(&mut self) -> Result<MilpSolution> {
        self.problem.validate()?;
        let cfg = self.config.clone();
        let problem = self.problem;
        let start = Instant::now();
        let mut lp = LpEngine::new(problem);
        let root_bounds: Vec<(f64, f64)> = problem.variables.iter().map(|v| (v.lower, v.upper)).collect();
        let integers: Vec<usize> = (0..problem.num_vars()).filter(|&j| problem.variables[j].integer).collect();

        let mut seen = HashSet::new();
        let mut cuts: Vec<Constraint> = Vec::new();
        let mut incumbent: Vec<f64> = Vec::new();
        let mut best = f64::INFINITY;
        let mut nodes = 0usize;
        let mut next_id = 1usize;
        let mut applied: Vec<usize> = Vec::new();
        let mut heap = BinaryHeap::new();
        heap.push(Node {
            bound: f64::NEG_INFINITY,
            id: 0,
            fixes: Vec::new(),
        });
        let mut global_bound = f64::NEG_INFINITY;
        let mut stop: Option<MilpStatus> = None;

        while let Some(node) = heap.peek() {
            let prune_tol = 1e-9 * best.abs().max(1.0);
            if node.bound >= best - prune_tol {
                // Best-first: every open node is at least as bad.
                global_bound = best;
                heap.clear();
                break;
            }
            global_bound = global_bound.max(node.bound);
            if best.is_finite() && cfg.gap_target > 0.0 {
                let gap = (best - global_bound).max(0.0) / best.abs().max(1.0);
                if gap <= cfg.gap_target {
                    stop = Some(MilpStatus::GapLimit);
                    break;
                }
            }
            if cfg.node_limit.is_some_and(|lim| nodes >= lim) {
                stop = Some(MilpStatus::NodeLimit);
                break;
            }
            if cfg.time_limit.is_some_and(|lim| start.elapsed() >= lim) {
                stop = Some(MilpStatus::TimeLimit);
                break;
            }
            let node = heap.pop().expect("peeked");
            nodes += 1;

            for &j in &applied {
                let (lo, hi) = root_bounds[j];
                lp.set_bounds(j, lo, hi);
            }
            applied.clear();
            for &(j, lo, hi) in &node.fixes {
                lp.set_bounds(j, lo, hi);
                applied.push(j);
            }

            let mut rounds = 0usize;
            let (obj, point) = loop {
                match lp.solve() {
                    LpStatus::Optimal => {}
                    LpStatus::Infeasible => break (f64::INFINITY, Vec::new()),
                    LpStatus::Unbounded => {
                        if nodes == 1 {
                            return Ok(finish(MilpStatus::Unbounded, Vec::new(), f64::NEG_INFINITY, f64::NEG_INFINITY, nodes, cuts));
                        }
                        return Err(HubError::Contract("LP became unbounded below the root".into()));
                    }
                    LpStatus::NumericFailure => {
                        log::warn!("branch-and-cut: LP numeric failure at node {}", node.id);
                        return Ok(finish(
                            MilpStatus::NumericFailure,
                            incumbent,
                            best,
                            global_bound,
                            nodes,
                            cuts,
                        ));
                    }
                }
                let obj = lp.objective();
                let point = lp.values();
                if obj >= best - prune_tol {
                    break (obj, Vec::new());
                }
                let Some(sep) = self.separator.as_mut() else {
                    break (obj, point);
                };
                let integral = integers
                    .iter()
                    .all(|&j| (point[j] - point[j].round()).abs() <= cfg.integrality_tol);
                if rounds >= cfg.max_cut_rounds && !integral {
                    break (obj, point);
                }
                let mut fresh = Vec::new();
                for row in sep.separate(&point) {
                    let row = row.normalized();
                    let viol = row.violation(&point);
                    if viol < cfg.violation_tol {
                        if cfg!(debug_assertions) {
                            return Err(HubError::Contract(format!(
                                "separator returned a row violated by only {viol:e}"
                            )));
                        }
                        continue;
                    }
                    if seen.insert(row.fingerprint()) {
                        fresh.push(row);
                    }
                }
                if fresh.is_empty() {
                    break (obj, point);
                }
                for row in fresh {
                    lp.add_row(&row.coefs, row.sense, row.rhs);
                    cuts.push(row);
                }
                rounds += 1;
            };
            if point.is_empty() {
                continue;
            }

            let branch_var = integers
                .iter()
                .copied()
                .map(|j| (j, (point[j] - point[j].round()).abs()))
                .filter(|&(_, f)| f > cfg.integrality_tol)
                .fold(None, |acc: Option<(usize, f64)>, (j, f)| match acc {
                    Some((_, g)) if g >= f => acc,
                    _ => Some((j, f)),
                });

            match branch_var {
                None => {
                    let mut x = point;
                    for &j in &integers {
                        x[j] = x[j].round();
                    }
                    let viol = problem
                        .max_violation(&x)
                        .max(cuts.iter().map(|c| c.violation(&x)).fold(0.0, f64::max));
                    if viol > cfg.feasibility_tol {
                        log::debug!("branch-and-cut: rounded point violates rows by {viol:e}");
                        continue;
                    }
                    let value = problem.objective(&x);
                    if value < best {
                        log::debug!("branch-and-cut: incumbent {value} at node {}", node.id);
                        best = value;
                        incumbent = x;
                    }
                }
                Some((j, _)) => {
                    let v = point[j];
                    let (lo, hi) = (lp.bounds(j).0, lp.bounds(j).1);
                    let down = v.floor();
                    let up = v.ceil();
                    let mut left = node.fixes.clone();
                    left.retain(|f| f.0 != j);
                    let mut right = left.clone();
                    left.push((j, lo, down));
                    right.push((j, up, hi));
                    let bound = obj.max(node.bound);
                    for fixes in [left, right] {
                        heap.push(Node {
                            bound,
                            id: next_id,
                            fixes,
                        });
                        next_id += 1;
                    }
                }
            }
        }

        let status = match stop {
            Some(s) => s,
            None if incumbent.is_empty() => MilpStatus::Infeasible,
            None => {
                global_bound = best;
                MilpStatus::Optimal
            }
        };
        let bound = if let Some(top) = heap.peek() {
            top.bound.max(global_bound).min(best)
        } else {
            global_bound
        };
        Ok(finish(status, incumbent, best, bound, nodes, cuts))
    }
}

fn finish(
    status: MilpStatus,
    values: Vec<f64>,
    objective: f64,
    bound: f64,
    nodes: usize,
    cuts: Vec<Constraint>,
) -> MilpSolution {
    MilpSolution {
        status,
        objective: if values.is_empty() { f64::INFINITY } else { objective },
        values,
        bound,
        nodes,
        cuts_added: cuts.len(),
        cuts,
    }
}

/// Solves `problem` to proven optimality (or the configured limits) without cuts.
pub fn solve_milp(problem: &MilpProblem, config: SolverConfig) -> Result<MilpSolution> {
    MilpSolver::new(problem, config).solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Sense;

    #[test]
    fn knapsack_matches_enumeration() {
        // max 3a + 4b + 2c + 5d  s.t. 2a + 3b + c + 4d <= 5
        let w = [2.0, 3.0, 1.0, 4.0];
        let v = [3.0, 4.0, 2.0, 5.0];
        let mut p = MilpProblem::new();
        for j in 0..4 {
            p.add_binary(format!("b{j}"), "b", -v[j]);
        }
        p.add_constraint((0..4).map(|j| (j, w[j])).collect(), Sense::Le, 5.0);
        let sol = solve_milp(&p, SolverConfig::default()).unwrap();
        let mut best = 0.0f64;
        for mask in 0u32..16 {
            let (mut ww, mut vv) = (0.0, 0.0);
            for j in 0..4 {
                if mask >> j & 1 == 1 {
                    ww += w[j];
                    vv += v[j];
                }
            }
            if ww <= 5.0 {
                best = best.max(vv);
            }
        }
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective + best).abs() < 1e-9);
        assert!((sol.objective + 7.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_binary_program() {
        let mut p = MilpProblem::new();
        let a = p.add_binary("a".into(), "b", 1.0);
        let b = p.add_binary("b".into(), "b", 1.0);
        p.add_constraint(vec![(a, 2.0), (b, 2.0)], Sense::Eq, 1.0);
        let sol = solve_milp(&p, SolverConfig::default()).unwrap();
        assert_eq!(sol.status, MilpStatus::Infeasible);
        assert!(!sol.has_incumbent());
    }

    #[test]
    fn lazy_rows_are_enforced() {
        // min a + b with the lazily known requirement a + b >= 1.
        let mut p = MilpProblem::new();
        let a = p.add_binary("a".into(), "b", 1.0);
        let b = p.add_binary("b".into(), "b", 2.0);
        let mut solver = MilpSolver::new(&p, SolverConfig::default());
        solver.register_separation(move |x: &[f64]| {
            if x[a] + x[b] < 1.0 - 1e-6 {
                vec![Constraint::new(vec![(a, 1.0), (b, 1.0)], Sense::Ge, 1.0)]
            } else {
                Vec::new()
            }
        });
        let sol = solver.solve().unwrap();
        assert_eq!(sol.status, MilpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert_eq!(sol.cuts_added, 1);
    }

    #[test]
    fn node_limit_reports_status() {
        let mut p = MilpProblem::new();
        let vars: Vec<usize> = (0..6).map(|j| p.add_binary(format!("b{j}"), "b", -1.0)).collect();
        p.add_constraint(vars.iter().map(|&j| (j, 2.0)).collect(), Sense::Le, 5.0);
        let cfg = SolverConfig {
            node_limit: Some(1),
            ..SolverConfig::default()
        };
        let sol = solve_milp(&p, cfg).unwrap();
        assert_eq!(sol.status, MilpStatus::NodeLimit);
        assert!(sol.bound <= -2.0 + 1e-9);
    }
}
