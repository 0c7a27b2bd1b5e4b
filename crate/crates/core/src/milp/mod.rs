//! Mixed-binary linear programs and an exact branch-and-cut solver.
//!
//! Problems are always minimizations. Every row is stored as a sparse
//! coefficient list with a sense and right-hand side; variables carry bounds,
//! an integrality flag and a group tag used by separation callbacks.

mod branch;
mod lp_format;
mod simplex;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::time::Duration;

pub use branch::{solve_milp, MilpSolver, Separator};
pub use lp_format::write_lp;
pub use simplex::{LpEngine, LpStatus};

use crate::error::{HubError, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    /// Free-form group tag (`"z"`, `"y"`, `"x"`, ...), shared by related variables.
    pub group: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub cost: f64,
}

/// A sparse linear row `Σ coef·var  (sense)  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Constraint { coefs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row; zero or negative when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => act - self.rhs,
            Sense::Ge => self.rhs - act,
            Sense::Eq => (act - self.rhs).abs(),
        }
    }

    /// Merges duplicate indices, drops zeros and sorts by variable index.
    pub fn normalized(mut self) -> Self {
        self.coefs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(self.coefs.len());
        for (j, a) in self.coefs {
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.coefs = merged;
        self
    }

    /// Hash of the normalized row, used to deduplicate separated cuts.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for &(j, a) in &self.coefs {
            j.hash(&mut h);
            a.to_bits().hash(&mut h);
        }
        self.sense.hash(&mut h);
        self.rhs.to_bits().hash(&mut h);
        h.finish()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MilpProblem {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_binary(&mut self, name: String, group: &'static str, cost: f64) -> usize {
        self.add_var(Variable {
            name,
            group,
            lower: 0.0,
            upper: 1.0,
            integer: true,
            cost,
        })
    }

    pub fn add_continuous(
        &mut self,
        name: String,
        group: &'static str,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> usize {
        self.add_var(Variable {
            name,
            group,
            lower,
            upper,
            integer: false,
            cost,
        })
    }

    pub fn add_var(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint::new(coefs, sense, rhs));
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, x)| v.cost * x).sum()
    }

    /// Indices of the variables tagged with `group`.
    pub fn group(&self, group: &str) -> Vec<usize> {
        (0..self.variables.len())
            .filter(|&j| self.variables[j].group == group)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                return Err(HubError::Model(format!(
                    "variable {j} ({}) has empty domain [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if v.integer && !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(HubError::Model(format!(
                    "integer variable {j} ({}) must have finite bounds",
                    v.name
                )));
            }
            if !v.cost.is_finite() {
                return Err(HubError::Model(format!("variable {j} has non-finite cost")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if let Some(&(j, _)) = c.coefs.iter().find(|(j, _)| *j >= n) {
                return Err(HubError::Model(format!(
                    "row {i} references undeclared variable {j}"
                )));
            }
            if !c.rhs.is_finite() || c.coefs.iter().any(|(_, a)| !a.is_finite()) {
                return Err(HubError::Model(format!("row {i} has non-finite data")));
            }
        }
        Ok(())
    }

    /// Largest bound or row violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper));
        let rows = self.constraints.iter().map(|c| c.violation(x));
        bounds.chain(rows).fold(0.0, f64::max)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BranchingRule {
    /// Most fractional variable, lowest index on ties.
    MostFractional,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    /// Relative optimality gap at which the search stops; zero proves optimality.
    pub gap_target: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub branching: BranchingRule,
    /// Minimum violation a separated row must have at the point that produced it.
    pub violation_tol: f64,
    /// Separation rounds allowed per node before branching anyway.
    pub max_cut_rounds: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feasibility_tol: 1e-6,
            integrality_tol: 1e-6,
            gap_target: 0.0,
            node_limit: None,
            time_limit: None,
            branching: BranchingRule::MostFractional,
            violation_tol: 1e-6,
            max_cut_rounds: 100,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    GapLimit,
    NodeLimit,
    TimeLimit,
    Unbounded,
    NumericFailure,
}

#[derive(Clone, Debug)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent values, empty when no incumbent was found.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Global lower bound at termination.
    pub bound: f64,
    pub nodes: usize,
    pub cuts_added: usize,
    /// Every row appended by separation, in order.
    pub cuts: Vec<Constraint>,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn gap(&self) -> f64 {
        if !self.has_incumbent() {
            return f64::INFINITY;
        }
        (self.objective - self.bound).max(0.0) / self.objective.abs().max(1.0)
    }
}
