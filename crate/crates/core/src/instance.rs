//! Problem data: costs, demands and failure probabilities, plus synthetic
//! instance generation and the canonical instance file format.
//!
//! Nodes are indexed `0..n` and every node is a potential hub. Matrices are
//! dense `n x n`, including diagonal entries for loops.

use std::fmt::Write as _;
use std::fs;
use std::ops::{Index, IndexMut};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{HubError, Result};
use crate::network::{edges, Arc, Edge};

/// Symmetry tolerance for `edge_setup` and `fail_prob`.
pub const SYMMETRY_TOL: f64 = 1e-12;

const FORMAT_TAG: &str = "hublf-instance/1";

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Matrix {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Matrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// A demand of `demand` units from `origin` to `destination`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Commodity {
    pub origin: usize,
    pub destination: usize,
    pub demand: f64,
}

/// Complete problem data for one hub network design instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub n: usize,
    /// Raw unit transportation cost between nodes.
    pub base_cost: Matrix,
    /// Unit cost of access (origin to hub) and delivery (hub to destination) arcs.
    pub access_cost: Matrix,
    /// Unit cost of inter-hub arcs, loops on the diagonal.
    pub interhub_cost: Matrix,
    pub hub_setup: Vec<f64>,
    /// Symmetric set-up cost of hub edges, loops on the diagonal.
    pub edge_setup: Matrix,
    /// Symmetric failure probability of hub edges, loops on the diagonal.
    pub fail_prob: Matrix,
    pub commodities: Vec<Commodity>,
    pub alpha: f64,
}

impl Instance {
    pub fn num_commodities(&self) -> usize {
        self.commodities.len()
    }

    /// Routing cost of commodity `r` through inter-hub arc `(k, l)`:
    /// `w_r (c̄[o,k] + c[k,l] + c̄[l,d])`.
    pub fn routing_cost(&self, r: usize, k: usize, l: usize) -> f64 {
        let c = &self.commodities[r];
        c.demand
            * (self.access_cost[(c.origin, k)]
                + self.interhub_cost[(k, l)]
                + self.access_cost[(l, c.destination)])
    }

    pub fn arc_cost(&self, r: usize, arc: Arc) -> f64 {
        self.routing_cost(r, arc.0, arc.1)
    }

    pub fn prob(&self, e: Edge) -> f64 {
        self.fail_prob[(e.0, e.1)]
    }

    pub fn edge_cost(&self, e: Edge) -> f64 {
        self.edge_setup[(e.0, e.1)]
    }

    /// `Σ_r w_r c̄[o_r, d_r]`, the cost of serving every commodity directly.
    pub fn direct_delivery_cost(&self) -> f64 {
        self.commodities
            .iter()
            .map(|c| c.demand * self.access_cost[(c.origin, c.destination)])
            .sum()
    }

    /// Distinct failure probabilities over all edges, ascending.
    pub fn distinct_probabilities(&self, tol: f64) -> Vec<f64> {
        let mut values: Vec<f64> = edges(self.n).map(|e| self.prob(e)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() <= tol);
        values
    }

    /// Keeps a seeded random subset of at most `count` commodities, preserving order.
    pub fn retain_commodities(&mut self, count: usize, seed: u64) {
        if self.commodities.len() <= count {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..self.commodities.len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(count);
        idx.sort_unstable();
        self.commodities = idx.into_iter().map(|i| self.commodities[i]).collect();
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(HubError::InvalidInstance("instance has no nodes".into()));
        }
        for (name, m) in [
            ("base_cost", &self.base_cost),
            ("access_cost", &self.access_cost),
            ("interhub_cost", &self.interhub_cost),
            ("edge_setup", &self.edge_setup),
            ("fail_prob", &self.fail_prob),
        ] {
            if m.dim() != n {
                return Err(HubError::validation(
                    name,
                    format!("expected {n}x{n} matrix, got {0}x{0}", m.dim()),
                ));
            }
            if let Some(v) = m.values().iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(HubError::validation(
                    name,
                    format!("entries must be finite and non-negative, found {v}"),
                ));
            }
        }
        if self.hub_setup.len() != n {
            return Err(HubError::validation(
                "hub_setup",
                format!("expected {n} entries, got {}", self.hub_setup.len()),
            ));
        }
        if let Some(v) = self.hub_setup.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(HubError::validation(
                "hub_setup",
                format!("entries must be finite and non-negative, found {v}"),
            ));
        }
        if !self.edge_setup.is_symmetric(SYMMETRY_TOL) {
            return Err(HubError::validation("edge_setup", "matrix is not symmetric"));
        }
        if !self.fail_prob.is_symmetric(SYMMETRY_TOL) {
            return Err(HubError::validation("fail_prob", "matrix is not symmetric"));
        }
        if let Some(p) = self.fail_prob.values().iter().find(|p| **p > 1.0) {
            return Err(HubError::validation(
                "fail_prob",
                format!("probability {p} outside [0, 1]"),
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(HubError::validation(
                "alpha",
                format!("discount factor {} outside [0, 1]", self.alpha),
            ));
        }
        for (r, c) in self.commodities.iter().enumerate() {
            if c.origin >= n || c.destination >= n {
                return Err(HubError::validation(
                    format!("commodities[{r}]"),
                    format!("node index out of range for n = {n}"),
                ));
            }
            if !c.demand.is_finite() || c.demand < 0.0 {
                return Err(HubError::validation(
                    format!("commodities[{r}].w"),
                    format!("demand must be finite and non-negative, found {}", c.demand),
                ));
            }
        }
        Ok(())
    }

    /// Canonical text serialization; every real is written with 17 significant digits.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"format\": \"{FORMAT_TAG}\",");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"alpha\": {},", real(self.alpha));
        for (name, m) in [
            ("base_cost", &self.base_cost),
            ("access_cost", &self.access_cost),
            ("interhub_cost", &self.interhub_cost),
        ] {
            write_matrix(&mut out, name, m);
        }
        let _ = writeln!(out, "  \"hub_setup\": [{}],", join_reals(&self.hub_setup));
        write_matrix(&mut out, "edge_setup", &self.edge_setup);
        write_matrix(&mut out, "fail_prob", &self.fail_prob);
        out.push_str("  \"commodities\": [");
        for (i, c) in self.commodities.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = write!(
                out,
                "    [{}, {}, {}]",
                c.origin,
                c.destination,
                real(c.demand)
            );
        }
        if !self.commodities.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("]\n}\n");
        out
    }

    pub fn from_canonical_str(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| HubError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        raw.into_instance()
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_string().as_bytes()))
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn join_reals(xs: &[f64]) -> String {
    xs.iter().map(|x| real(*x)).collect::<Vec<_>>().join(", ")
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix) {
    let _ = write!(out, "  \"{name}\": [");
    for i in 0..m.dim() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "    [{}]", join_reals(m.row(i)));
    }
    out.push_str("\n  ],\n");
}

#[derive(Deserialize)]
struct RawInstance {
    #[serde(default)]
    format: Option<String>,
    n: usize,
    alpha: f64,
    base_cost: Vec<Vec<f64>>,
    #[serde(default)]
    access_cost: Option<Vec<Vec<f64>>>,
    interhub_cost: Vec<Vec<f64>>,
    hub_setup: Vec<f64>,
    edge_setup: Vec<Vec<f64>>,
    fail_prob: Vec<Vec<f64>>,
    commodities: Vec<Vec<f64>>,
}

impl RawInstance {
    fn into_instance(self) -> Result<Instance> {
        if let Some(tag) = &self.format {
            if tag != FORMAT_TAG {
                return Err(HubError::validation(
                    "format",
                    format!("unsupported format tag {tag:?}, expected {FORMAT_TAG:?}"),
                ));
            }
        }
        let n = self.n;
        let matrix = |name: &str, rows: &[Vec<f64>]| -> Result<Matrix> {
            if rows.len() != n {
                return Err(HubError::validation(
                    name,
                    format!("expected {n} rows, got {}", rows.len()),
                ));
            }
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(HubError::validation(
                    format!("{name}[{i}]"),
                    format!("expected {n} columns, got {}", r.len()),
                ));
            }
            Ok(Matrix::from_rows(rows).expect("checked square"))
        };
        let base_cost = matrix("base_cost", &self.base_cost)?;
        let access_cost = match &self.access_cost {
            Some(rows) => matrix("access_cost", rows)?,
            None => base_cost.clone(),
        };
        let interhub_cost = matrix("interhub_cost", &self.interhub_cost)?;
        let edge_setup = matrix("edge_setup", &self.edge_setup)?;
        let fail_prob = matrix("fail_prob", &self.fail_prob)?;

        const FIELDS: [&str; 3] = ["o", "d", "w"];
        let mut commodities = Vec::with_capacity(self.commodities.len());
        for (r, triple) in self.commodities.iter().enumerate() {
            if triple.len() < 3 {
                let missing = FIELDS[triple.len()];
                let what = if missing == "w" { " (demand)" } else { "" };
                return Err(HubError::validation(
                    format!("commodities[{r}]"),
                    format!("missing field `{missing}`{what}; expected [o, d, w]"),
                ));
            }
            if triple.len() > 3 {
                return Err(HubError::validation(
                    format!("commodities[{r}]"),
                    format!("expected [o, d, w], got {} values", triple.len()),
                ));
            }
            let node = |v: f64, field: &str| -> Result<usize> {
                if v.fract() != 0.0 || v < 0.0 {
                    return Err(HubError::validation(
                        format!("commodities[{r}].{field}"),
                        format!("node index must be a non-negative integer, found {v}"),
                    ));
                }
                Ok(v as usize)
            };
            commodities.push(Commodity {
                origin: node(triple[0], "o")?,
                destination: node(triple[1], "d")?,
                demand: triple[2],
            });
        }
        let inst = Instance {
            n,
            base_cost,
            access_cost,
            interhub_cost,
            hub_setup: self.hub_setup,
            edge_setup,
            fail_prob,
            commodities,
            alpha: self.alpha,
        };
        inst.validate()?;
        Ok(inst)
    }
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, inst.to_canonical_string())?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    Instance::from_canonical_str(&fs::read_to_string(path)?)
}

/// Failure probability law for synthetic instances.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbabilityScenario {
    /// Each edge independently `Uniform[0, rho]`.
    Random { rho: f64, seed: u64 },
    /// Each edge drawn uniformly from a finite set of values.
    Clustered { values: Vec<f64>, seed: u64 },
    /// Every edge fails with probability `rho`.
    Same { rho: f64 },
}

impl ProbabilityScenario {
    pub fn random(rho: f64, seed: u64) -> Self {
        ProbabilityScenario::Random { rho, seed }
    }

    /// Clustered law with the default cluster values `{0.1, 0.2, 0.3}`.
    pub fn clustered(seed: u64) -> Self {
        ProbabilityScenario::Clustered {
            values: vec![0.1, 0.2, 0.3],
            seed,
        }
    }

    pub fn same(rho: f64) -> Self {
        ProbabilityScenario::Same { rho }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ProbabilityScenario::Random { .. } => "RP",
            ProbabilityScenario::Clustered { .. } => "CP",
            ProbabilityScenario::Same { .. } => "SP",
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        match self {
            ProbabilityScenario::Random { rho, .. } | ProbabilityScenario::Same { rho } => {
                if !in_unit(*rho) {
                    return Err(HubError::validation("rho", format!("{rho} outside [0, 1]")));
                }
            }
            ProbabilityScenario::Clustered { values, .. } => {
                if values.is_empty() {
                    return Err(HubError::validation(
                        "cluster_values",
                        "at least one value required",
                    ));
                }
                if let Some(v) = values.iter().find(|v| !in_unit(**v)) {
                    return Err(HubError::validation(
                        "cluster_values",
                        format!("{v} outside [0, 1]"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, n: usize) -> Matrix {
        let mut p = Matrix::zeros(n);
        let set = |p: &mut Matrix, k: usize, l: usize, v: f64| {
            p[(k, l)] = v;
            p[(l, k)] = v;
        };
        match self {
            ProbabilityScenario::Same { rho } => {
                for e in edges(n) {
                    set(&mut p, e.0, e.1, *rho);
                }
            }
            ProbabilityScenario::Random { rho, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for e in edges(n) {
                    let v = rng.gen::<f64>() * rho;
                    set(&mut p, e.0, e.1, v);
                }
            }
            ProbabilityScenario::Clustered { values, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for e in edges(n) {
                    let v = values[rng.gen_range(0..values.len())];
                    set(&mut p, e.0, e.1, v);
                }
            }
        }
        p
    }
}

/// How hub edge set-up costs are obtained for synthetic instances.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeSetupRule {
    /// Flow-normalized cost rule `100 (c/W) / MAXW`.
    Formula,
    /// Explicit symmetric matrix, e.g. taken from a data file.
    Provided(Matrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostScalingParams {
    /// Discount factor on inter-hub arcs.
    pub alpha: f64,
    /// Set-up cost assigned to every potential hub.
    pub hub_setup_default: f64,
    pub edge_setup_rule: EdgeSetupRule,
}

impl Default for CostScalingParams {
    fn default() -> Self {
        CostScalingParams {
            alpha: 0.5,
            hub_setup_default: 100.0,
            edge_setup_rule: EdgeSetupRule::Formula,
        }
    }
}

/// Generates a random instance: nodes uniform in the unit square, Euclidean
/// base costs, gravity demand for every ordered pair, inter-hub costs
/// `α(a_k + c'_kl + d_l)` with handling costs set to each node's nearest
/// neighbour distance.
pub fn synthesize_instance(
    n: usize,
    geometry_seed: u64,
    scenario: &ProbabilityScenario,
    params: &CostScalingParams,
) -> Result<Instance> {
    if n < 2 {
        return Err(HubError::InvalidInstance(format!(
            "synthetic instances need at least 2 nodes, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(HubError::validation("alpha", "must lie in [0, 1]"));
    }
    scenario.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(geometry_seed);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    // Uniform(0.1, 1]
    let mass: Vec<f64> = (0..n).map(|_| 1.0 - 0.9 * rng.gen::<f64>()).collect();

    let base_cost = Matrix::from_fn(n, |i, j| {
        let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
        dx.hypot(dy)
    });
    let handling: Vec<f64> = (0..n)
        .map(|k| {
            (0..n)
                .filter(|&j| j != k)
                .map(|j| base_cost[(k, j)].min(base_cost[(j, k)]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let alpha = params.alpha;
    let interhub_cost = Matrix::from_fn(n, |k, l| {
        let cost = if k == l {
            handling[k] + handling[k]
        } else {
            handling[k] + base_cost[(k, l)] + handling[l]
        };
        alpha * cost
    });

    let mut commodities = Vec::with_capacity(n * (n - 1));
    for o in 0..n {
        for d in 0..n {
            if o != d {
                commodities.push(Commodity {
                    origin: o,
                    destination: d,
                    demand: (1000.0 * mass[o] * mass[d]).round(),
                });
            }
        }
    }

    let edge_setup = match &params.edge_setup_rule {
        EdgeSetupRule::Formula => flow_normalized_setup(n, &interhub_cost, &commodities),
        EdgeSetupRule::Provided(m) => {
            if m.dim() != n || !m.is_symmetric(SYMMETRY_TOL) {
                return Err(HubError::validation(
                    "edge_setup",
                    "provided matrix must be symmetric and n x n",
                ));
            }
            m.clone()
        }
    };

    let inst = Instance {
        n,
        access_cost: base_cost.clone(),
        base_cost,
        interhub_cost,
        hub_setup: vec![params.hub_setup_default; n],
        edge_setup,
        fail_prob: scenario.draw(n),
        commodities,
        alpha,
    };
    inst.validate()?;
    Ok(inst)
}

/// `h_kl = 100 (c_kl / W_kl) / MAXW` for proper edges and
/// `h_kk = 100 (c_kk / W̄) / MAXW` for loops, where `W` is the demand matrix
/// scaled to unit sum, `W̄` its mean over all `n²` entries and
/// `MAXW = max{c_ij / W_ij : W_ij > 0}`.
fn flow_normalized_setup(n: usize, cost: &Matrix, commodities: &[Commodity]) -> Matrix {
    let mut flow = Matrix::zeros(n);
    for c in commodities {
        flow[(c.origin, c.destination)] += c.demand;
    }
    let total: f64 = flow.values().iter().sum();
    if total <= 0.0 {
        return Matrix::zeros(n);
    }
    let w = Matrix::from_fn(n, |i, j| flow[(i, j)] / total);
    let mean = 1.0 / (n * n) as f64;
    let maxw = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| w[(i, j)] > 0.0)
        .map(|(i, j)| cost[(i, j)] / w[(i, j)])
        .fold(0.0, f64::max);
    if maxw <= 0.0 {
        return Matrix::zeros(n);
    }
    let mut h = Matrix::zeros(n);
    for e in edges(n) {
        let (k, l) = (e.0, e.1);
        let value = if k == l {
            100.0 * (cost[(k, k)] / mean) / maxw
        } else {
            let pair = 0.5 * (w[(k, l)] + w[(l, k)]);
            let denom = if pair > 0.0 { pair } else { mean };
            let c = 0.5 * (cost[(k, l)] + cost[(l, k)]);
            100.0 * (c / denom) / maxw
        };
        h[(k, l)] = value;
        h[(l, k)] = value;
    }
    h
}
