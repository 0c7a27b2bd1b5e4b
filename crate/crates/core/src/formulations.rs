//! MILP encodings of the three hub network design models and decoding of
//! solver output into a [`DesignSolution`].
//!
//! * `M0`: unprotected design, each commodity uses one hub arc.
//! * `M1`: every commodity also reserves a backup hub arc on a different
//!   edge; the expected routing cost is linearized with auxiliary `P`
//!   variables, or with per-cluster `ξ` variables when failure
//!   probabilities take few distinct values.
//! * `M2`: the backbone must be λ-connected; cutset rows are separated lazily.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{HubError, Result};
use crate::instance::{Instance, Matrix};
use crate::milp::{Constraint, MilpProblem, MilpSolution, MilpSolver, MilpStatus, Sense, SolverConfig};
use crate::network::{arcs, edges, Arc, Edge};
use crate::separation::{separate, SeparationResult};

const SOLUTION_FORMAT: &str = "hublf-solution/1";

/// Two probabilities closer than this belong to the same cluster.
pub const CLUSTER_TOL: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    M0,
    M1,
    M1Clustered,
    M2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: ModelVariant,
    /// Required edge connectivity of the backbone (`M2` only).
    pub lambda: usize,
    /// Backup cost inflation: a failed arc costs `(1 + β)` times its nominal cost (`M2` only).
    pub beta: f64,
    /// Keep only the cheaper orientation of every proper edge per commodity.
    pub apply_orientation_reduction: bool,
    /// Hub-degree rows `x_kk + Σ_l (x_kl + x_lk) ≤ z_k` for original and backup arcs.
    pub apply_hub_degree_rows: bool,
    /// Per-commodity aggregate bound `Σ P ≤ max p`.
    pub apply_p_bound: bool,
    /// Leave the backup arc's own edge out of the `P` linearization sum.
    pub tight_linearization: bool,
    /// Backup mass rows: the probability mass carried by the backup
    /// variables equals the failure probability of the original arc.
    #[serde(default)]
    pub apply_backup_mass: bool,
    /// Largest number of distinct probabilities accepted by the clustered encoding.
    pub max_clusters: usize,
}

impl ModelSpec {
    fn base(variant: ModelVariant) -> Self {
        ModelSpec {
            variant,
            lambda: 2,
            beta: 0.0,
            apply_orientation_reduction: true,
            apply_hub_degree_rows: true,
            apply_p_bound: true,
            tight_linearization: false,
            apply_backup_mass: true,
            max_clusters: 16,
        }
    }

    pub fn m0() -> Self {
        Self::base(ModelVariant::M0)
    }

    pub fn m1() -> Self {
        Self::base(ModelVariant::M1)
    }

    pub fn m1_clustered() -> Self {
        Self::base(ModelVariant::M1Clustered)
    }

    pub fn m2(lambda: usize, beta: f64) -> Self {
        ModelSpec {
            lambda,
            beta,
            ..Self::base(ModelVariant::M2)
        }
    }

    pub fn with_orientation_reduction(mut self, on: bool) -> Self {
        self.apply_orientation_reduction = on;
        self
    }

    /// Short label such as `M0`, `M1`, `M1c` or `M2_3`.
    pub fn label(&self) -> String {
        match self.variant {
            ModelVariant::M0 => "M0".into(),
            ModelVariant::M1 => "M1".into(),
            ModelVariant::M1Clustered => "M1c".into(),
            ModelVariant::M2 => format!("M2_{}", self.lambda),
        }
    }

    pub fn has_backup(&self) -> bool {
        matches!(self.variant, ModelVariant::M1 | ModelVariant::M1Clustered)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == ModelVariant::M2 && self.lambda < 2 {
            return Err(HubError::validation("lambda", format!("must be at least 2, got {}", self.lambda)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(HubError::validation("beta", format!("must be finite and non-negative, got {}", self.beta)));
        }
        Ok(())
    }
}

/// A built model together with the variable index maps needed to read it back.
#[derive(Clone, Debug)]
pub struct HubModel {
    pub problem: MilpProblem,
    pub spec: ModelSpec,
    pub n: usize,
    pub num_commodities: usize,
    pub z: Vec<usize>,
    /// Indexed by [`Edge::index`].
    pub y: Vec<usize>,
    /// `x[r][arc.index(n)]`, `None` where the orientation was removed.
    pub x: Vec<Vec<Option<usize>>>,
    pub xbar: Vec<Vec<Option<usize>>>,
    /// Linearization variables `P^r_kl` (`M1` only).
    pub p: Vec<Vec<Option<usize>>>,
    /// `ξ^r_kls` indexed `[r][arc][s]` (`M1` clustered, `K ≥ 2`).
    pub xi: Vec<Vec<Vec<usize>>>,
    /// Distinct probability values, ascending (`M1` clustered only).
    pub clusters: Vec<f64>,
}

impl HubModel {
    pub fn y_var(&self, e: Edge) -> usize {
        self.y[e.index(self.n)]
    }

    /// `(z̄, ȳ)` read from a full variable vector, `ȳ` as a symmetric matrix.
    pub fn support_point(&self, values: &[f64]) -> (Vec<f64>, Matrix) {
        let z = self.z.iter().map(|&j| values[j]).collect();
        let mut y = Matrix::zeros(self.n);
        for e in edges(self.n) {
            let v = values[self.y_var(e)];
            y[(e.0, e.1)] = v;
            y[(e.1, e.0)] = v;
        }
        (z, y)
    }

    /// Converts a separation result into a model row.
    pub fn cut_row(&self, res: &SeparationResult) -> Constraint {
        let (yc, zc, rhs) = res.row(self.spec.lambda);
        let mut coefs: Vec<(usize, f64)> = yc.into_iter().map(|(e, a)| (self.y_var(e), a)).collect();
        coefs.extend(zc.into_iter().map(|(k, a)| (self.z[k], a)));
        Constraint::new(coefs, Sense::Ge, rhs).normalized()
    }

    /// Lazy λ-cutset separation at an LP point.
    pub fn separate_point(&self, values: &[f64], tol: f64) -> Vec<Constraint> {
        let (z, y) = self.support_point(values);
        separate(&z, &y, self.spec.lambda, tol)
            .iter()
            .map(|res| self.cut_row(res))
            .collect()
    }

    /// Solves the model, attaching cutset separation for `M2`.
    pub fn solve(&self, config: SolverConfig) -> Result<MilpSolution> {
        let tol = config.violation_tol;
        let mut solver = MilpSolver::new(&self.problem, config);
        if self.spec.variant == ModelVariant::M2 {
            solver.register_separation(move |x: &[f64]| self.separate_point(x, tol));
        }
        solver.solve()
    }

    /// Full variable vector encoding `design`, with auxiliaries at their minimal values.
    pub fn design_point(&self, inst: &Instance, design: &DesignSolution) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.problem.num_vars()];
        for &k in &design.hubs {
            v[self.z[k]] = 1.0;
        }
        for &e in &design.edges {
            v[self.y_var(e)] = 1.0;
        }
        let n = self.n;
        for route in &design.routes {
            let r = route.commodity;
            let xo = self.x[r][route.original.index(n)].ok_or_else(|| {
                HubError::Model(format!("arc {:?} of commodity {r} is not in the model", route.original))
            })?;
            v[xo] = 1.0;
            if let (Some(b), true) = (route.backup, self.spec.has_backup()) {
                let xb = self.xbar[r][b.index(n)]
                    .ok_or_else(|| HubError::Model(format!("backup arc {b:?} of commodity {r} is not in the model")))?;
                v[xb] = 1.0;
                let po = inst.prob(route.original.edge());
                if let Some(pv) = self.p.get(r).and_then(|row| row[b.index(n)]) {
                    v[pv] = po;
                }
                if let Some(row) = self.xi.get(r) {
                    if !row.is_empty() {
                        let s = cluster_of(&self.clusters, po);
                        v[row[b.index(n)][s]] = 1.0;
                    }
                }
            }
        }
        Ok(v)
    }
}

fn cluster_of(clusters: &[f64], p: f64) -> usize {
    clusters
        .iter()
        .position(|&c| (c - p).abs() <= CLUSTER_TOL)
        .expect("probability belongs to a cluster")
}

/// Arcs kept for commodity `r`: every loop and, per proper edge, both
/// orientations or only the cheaper one (ties keep `(min, max)`).
fn commodity_arcs(inst: &Instance, r: usize, reduce: bool) -> Vec<Arc> {
    let n = inst.n;
    arcs(n)
        .filter(|a| {
            if !reduce || a.0 == a.1 {
                return true;
            }
            let fwd = inst.arc_cost(r, *a);
            let rev = inst.arc_cost(r, a.reversed());
            if a.0 < a.1 {
                fwd <= rev
            } else {
                fwd < rev
            }
        })
        .collect()
}

fn check_commodities(inst: &Instance) -> Result<()> {
    if let Some((r, c)) = inst.commodities.iter().enumerate().find(|(_, c)| c.origin == c.destination) {
        return Err(HubError::Model(format!(
            "commodity {r} has identical origin and destination {}",
            c.origin
        )));
    }
    Ok(())
}

/// Design variables `z`, `y` with the edge-to-hub linking rows.
fn design_core(inst: &Instance, problem: &mut MilpProblem) -> (Vec<usize>, Vec<usize>) {
    let n = inst.n;
    let z: Vec<usize> = (0..n)
        .map(|k| problem.add_binary(format!("z[{k}]"), "z", inst.hub_setup[k]))
        .collect();
    let y: Vec<usize> = edges(n)
        .map(|e| problem.add_binary(format!("y[{},{}]", e.0, e.1), "y", inst.edge_cost(e)))
        .collect();
    for e in edges(n) {
        let ye = y[e.index(n)];
        problem.add_constraint(vec![(ye, 1.0), (z[e.0], -1.0)], Sense::Le, 0.0);
        if !e.is_loop() {
            problem.add_constraint(vec![(ye, 1.0), (z[e.1], -1.0)], Sense::Le, 0.0);
        }
    }
    (z, y)
}

/// Adds one binary per kept arc for every commodity, plus the assignment row.
fn routing_vars(
    inst: &Instance,
    problem: &mut MilpProblem,
    reduce: bool,
    prefix: &'static str,
    cost: impl Fn(usize, Arc) -> f64,
) -> Vec<Vec<Option<usize>>> {
    let n = inst.n;
    let mut out = Vec::with_capacity(inst.num_commodities());
    for r in 0..inst.num_commodities() {
        let mut row = vec![None; n * n];
        let mut assign = Vec::new();
        for a in commodity_arcs(inst, r, reduce) {
            let j = problem.add_binary(format!("{prefix}[{r},{},{}]", a.0, a.1), prefix, cost(r, a));
            row[a.index(n)] = Some(j);
            assign.push((j, 1.0));
        }
        problem.add_constraint(assign, Sense::Eq, 1.0);
        out.push(row);
    }
    out
}

/// Per commodity and edge: `Σ_{families} (x_kl + x_lk) ≤ y_kl`.
fn edge_capacity_rows(inst: &Instance, problem: &mut MilpProblem, y: &[usize], families: &[&Vec<Vec<Option<usize>>>]) {
    let n = inst.n;
    for r in 0..inst.num_commodities() {
        for e in edges(n) {
            let mut coefs = Vec::new();
            for fam in families {
                for a in [Arc(e.0, e.1), Arc(e.1, e.0)] {
                    if let Some(j) = fam[r][a.index(n)] {
                        if !coefs.iter().any(|&(i, _)| i == j) {
                            coefs.push((j, 1.0));
                        }
                    }
                }
            }
            if coefs.is_empty() {
                continue;
            }
            coefs.push((y[e.index(n)], -1.0));
            problem.add_constraint(coefs, Sense::Le, 0.0);
        }
    }
}

/// `x_kk + Σ_{l≠k} (x_kl + x_lk) ≤ z_k` for every commodity and node.
fn hub_degree_rows(inst: &Instance, problem: &mut MilpProblem, z: &[usize], fam: &[Vec<Option<usize>>]) {
    let n = inst.n;
    for row in fam {
        for k in 0..n {
            let mut coefs = Vec::new();
            for a in arcs(n).filter(|a| a.0 == k || a.1 == k) {
                if let Some(j) = row[a.index(n)] {
                    coefs.push((j, 1.0));
                }
            }
            if coefs.is_empty() {
                continue;
            }
            coefs.push((z[k], -1.0));
            problem.add_constraint(coefs, Sense::Le, 0.0);
        }
    }
}

fn empty_model(inst: &Instance, spec: ModelSpec, problem: MilpProblem, z: Vec<usize>, y: Vec<usize>) -> HubModel {
    HubModel {
        problem,
        spec,
        n: inst.n,
        num_commodities: inst.num_commodities(),
        z,
        y,
        x: Vec::new(),
        xbar: Vec::new(),
        p: Vec::new(),
        xi: Vec::new(),
        clusters: Vec::new(),
    }
}

/// Unprotected model: one hub arc per commodity.
pub fn build_m0(inst: &Instance) -> Result<HubModel> {
    build_m0_with(inst, &ModelSpec::m0())
}

pub fn build_m0_with(inst: &Instance, spec: &ModelSpec) -> Result<HubModel> {
    inst.validate()?;
    check_commodities(inst)?;
    let mut problem = MilpProblem::new();
    let (z, y) = design_core(inst, &mut problem);
    let x = routing_vars(inst, &mut problem, spec.apply_orientation_reduction, "x", |r, a| inst.arc_cost(r, a));
    edge_capacity_rows(inst, &mut problem, &y, &[&x]);
    let mut model = empty_model(inst, ModelSpec { variant: ModelVariant::M0, ..spec.clone() }, problem, z, y);
    model.x = x;
    Ok(model)
}

/// Single-backup model with `P` linearization of the expected routing cost.
pub fn build_m1(inst: &Instance, spec: &ModelSpec) -> Result<HubModel> {
    spec.validate()?;
    inst.validate()?;
    check_commodities(inst)?;
    let n = inst.n;
    let reduce = spec.apply_orientation_reduction;
    let mut problem = MilpProblem::new();
    let (z, y) = design_core(inst, &mut problem);
    let x = routing_vars(inst, &mut problem, reduce, "x", |r, a| {
        (1.0 - inst.prob(a.edge())) * inst.arc_cost(r, a)
    });
    let xbar = routing_vars(inst, &mut problem, reduce, "xb", |_, _| 0.0);
    edge_capacity_rows(inst, &mut problem, &y, &[&x, &xbar]);
    if spec.apply_hub_degree_rows {
        hub_degree_rows(inst, &mut problem, &z, &x);
        hub_degree_rows(inst, &mut problem, &z, &xbar);
    }
    let pmax = edges(n).map(|e| inst.prob(e)).fold(0.0, f64::max);
    let mut p = Vec::with_capacity(inst.num_commodities());
    for r in 0..inst.num_commodities() {
        let mut row = vec![None; n * n];
        let mut total = Vec::new();
        for a in commodity_arcs(inst, r, reduce) {
            let pv = problem.add_continuous(
                format!("P[{r},{},{}]", a.0, a.1),
                "P",
                0.0,
                f64::INFINITY,
                inst.arc_cost(r, a),
            );
            row[a.index(n)] = Some(pv);
            total.push((pv, 1.0));
            // P_a ≥ Σ_b p_b x_b + x̄_a − 1
            let mut coefs = vec![(pv, 1.0)];
            for b in arcs(n) {
                if spec.tight_linearization && b.edge() == a.edge() {
                    continue;
                }
                let pb = inst.prob(b.edge());
                if let Some(xb) = x[r][b.index(n)] {
                    if pb != 0.0 {
                        coefs.push((xb, -pb));
                    }
                }
            }
            coefs.push((xbar[r][a.index(n)].expect("backup arc exists"), -1.0));
            problem.add_constraint(coefs, Sense::Ge, -1.0);
        }
        if spec.apply_backup_mass {
            // Σ_a P_a ≥ Σ_b p_b x_b and P_a ≤ p̄ x̄_a: exactly one backup
            // carries the original arc's probability.
            let kept = commodity_arcs(inst, r, reduce);
            let pbar = kept.iter().map(|a| inst.prob(a.edge())).fold(0.0, f64::max);
            let mut mass = total.clone();
            for &b in &kept {
                let pb = inst.prob(b.edge());
                if pb != 0.0 {
                    mass.push((x[r][b.index(n)].expect("kept arc"), -pb));
                }
            }
            problem.add_constraint(mass, Sense::Ge, 0.0);
            for &a in &kept {
                let pv = row[a.index(n)].expect("kept arc");
                let xba = xbar[r][a.index(n)].expect("kept arc");
                problem.add_constraint(vec![(pv, 1.0), (xba, -pbar)], Sense::Le, 0.0);
            }
        }
        if spec.apply_p_bound {
            problem.add_constraint(total, Sense::Le, pmax);
        }
        p.push(row);
    }
    let mut model = empty_model(inst, ModelSpec { variant: ModelVariant::M1, ..spec.clone() }, problem, z, y);
    model.x = x;
    model.xbar = xbar;
    model.p = p;
    Ok(model)
}

/// Single-backup model for probabilities taking `K` distinct values: the
/// linearization uses one `ξ` per arc and cluster, or none at all when `K = 1`.
pub fn build_m1_clustered(inst: &Instance, spec: &ModelSpec) -> Result<HubModel> {
    spec.validate()?;
    inst.validate()?;
    check_commodities(inst)?;
    let n = inst.n;
    let clusters = inst.distinct_probabilities(CLUSTER_TOL);
    if clusters.len() > spec.max_clusters {
        return Err(HubError::Model(format!(
            "failure probabilities take {} distinct values, more than the clustered encoding accepts ({}); use the M1 model instead",
            clusters.len(),
            spec.max_clusters
        )));
    }
    let k_count = clusters.len();
    let rho = |a: Arc| clusters[cluster_of(&clusters, inst.prob(a.edge()))];
    let reduce = spec.apply_orientation_reduction;
    let mut problem = MilpProblem::new();
    let (z, y) = design_core(inst, &mut problem);
    let x = routing_vars(inst, &mut problem, reduce, "x", |r, a| (1.0 - rho(a)) * inst.arc_cost(r, a));
    let single = clusters[0];
    let xbar = routing_vars(inst, &mut problem, reduce, "xb", |r, a| {
        if k_count == 1 {
            single * inst.arc_cost(r, a)
        } else {
            0.0
        }
    });
    edge_capacity_rows(inst, &mut problem, &y, &[&x, &xbar]);
    if spec.apply_hub_degree_rows {
        hub_degree_rows(inst, &mut problem, &z, &x);
        hub_degree_rows(inst, &mut problem, &z, &xbar);
    }
    let mut xi = Vec::new();
    if k_count > 1 {
        for r in 0..inst.num_commodities() {
            let kept = commodity_arcs(inst, r, reduce);
            let mut row = vec![Vec::new(); n * n];
            for &a in &kept {
                let xba = xbar[r][a.index(n)].expect("backup arc exists");
                let mut vars = Vec::with_capacity(k_count);
                for (s, &rho_s) in clusters.iter().enumerate() {
                    let v = problem.add_continuous(
                        format!("xi[{r},{},{},{s}]", a.0, a.1),
                        "xi",
                        0.0,
                        f64::INFINITY,
                        rho_s * inst.arc_cost(r, a),
                    );
                    // ξ_as ≥ Σ_{b ∈ A_s} x_b + x̄_a − 1
                    let mut coefs = vec![(v, 1.0), (xba, -1.0)];
                    for &b in &kept {
                        if cluster_of(&clusters, inst.prob(b.edge())) == s {
                            coefs.push((x[r][b.index(n)].expect("kept arc"), -1.0));
                        }
                    }
                    problem.add_constraint(coefs, Sense::Ge, -1.0);
                    vars.push(v);
                }
                let mut coupling: Vec<(usize, f64)> = vars.iter().map(|&v| (v, 1.0)).collect();
                coupling.push((xba, -1.0));
                problem.add_constraint(coupling, Sense::Eq, 0.0);
                row[a.index(n)] = vars;
            }
            if spec.apply_backup_mass {
                // Σ_a ξ_as ≥ Σ_{b ∈ A_s} x_b for every cluster s.
                for s in 0..k_count {
                    let mut coefs: Vec<(usize, f64)> = kept.iter().map(|a| (row[a.index(n)][s], 1.0)).collect();
                    for &b in &kept {
                        if cluster_of(&clusters, inst.prob(b.edge())) == s {
                            coefs.push((x[r][b.index(n)].expect("kept arc"), -1.0));
                        }
                    }
                    problem.add_constraint(coefs, Sense::Ge, 0.0);
                }
            }
            xi.push(row);
        }
    }
    let mut model = empty_model(
        inst,
        ModelSpec {
            variant: ModelVariant::M1Clustered,
            ..spec.clone()
        },
        problem,
        z,
        y,
    );
    model.x = x;
    model.xbar = xbar;
    model.xi = xi;
    model.clusters = clusters;
    Ok(model)
}

/// λ-connected model. Only singleton cutset rows are built; the remaining
/// cutset rows are added by [`HubModel::solve`] through separation.
pub fn build_m2(inst: &Instance, spec: &ModelSpec) -> Result<HubModel> {
    let spec = ModelSpec {
        variant: ModelVariant::M2,
        ..spec.clone()
    };
    spec.validate()?;
    inst.validate()?;
    check_commodities(inst)?;
    let n = inst.n;
    if n < spec.lambda {
        return Err(HubError::InfeasibleByConstruction(format!(
            "a {}-connected backbone needs at least {} nodes, instance has {n}",
            spec.lambda, spec.lambda
        )));
    }
    let mut problem = MilpProblem::new();
    let (z, y) = design_core(inst, &mut problem);
    let beta = spec.beta;
    let x = routing_vars(inst, &mut problem, spec.apply_orientation_reduction, "x", |r, a| {
        (1.0 + beta * inst.prob(a.edge())) * inst.arc_cost(r, a)
    });
    edge_capacity_rows(inst, &mut problem, &y, &[&x]);
    let lam = spec.lambda as f64;
    for k in 0..n {
        // y(δ(k)) + y_kk ≥ λ z_k
        let mut coefs: Vec<(usize, f64)> = (0..n).map(|l| (y[Edge::new(k, l).index(n)], 1.0)).collect();
        coefs.push((z[k], -lam));
        problem.add_constraint(coefs, Sense::Ge, 0.0);
    }
    let mut model = empty_model(inst, spec, problem, z, y);
    model.x = x;
    Ok(model)
}

/// Dispatches on `spec.variant`.
pub fn build_model(inst: &Instance, spec: &ModelSpec) -> Result<HubModel> {
    match spec.variant {
        ModelVariant::M0 => build_m0_with(inst, spec),
        ModelVariant::M1 => build_m1(inst, spec),
        ModelVariant::M1Clustered => build_m1_clustered(inst, spec),
        ModelVariant::M2 => build_m2(inst, spec),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Routing {
    pub commodity: usize,
    pub original: Arc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backup: Option<Arc>,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub hub_setup: f64,
    pub edge_setup: f64,
    /// Expected routing cost under the model's cost law.
    pub routing: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn setup(&self) -> f64 {
        self.hub_setup + self.edge_setup
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: usize,
    pub cuts: usize,
    pub bound: f64,
    pub gap: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub format: String,
    /// Content hash of the instance the design was computed for.
    pub instance_hash: String,
    pub spec: ModelSpec,
    pub status: MilpStatus,
    pub hubs: Vec<usize>,
    /// Activated hub edges, loops included, sorted.
    pub edges: Vec<Edge>,
    pub routes: Vec<Routing>,
    pub cost: CostBreakdown,
    #[serde(default)]
    pub stats: SolveStats,
}

impl DesignSolution {
    pub fn objective(&self) -> f64 {
        self.cost.total
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn num_loops(&self) -> usize {
        self.edges.iter().filter(|e| e.is_loop()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sol: DesignSolution = serde_json::from_str(text).map_err(|e| HubError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if sol.format != SOLUTION_FORMAT {
            return Err(HubError::validation(
                "format",
                format!("expected `{SOLUTION_FORMAT}`, found `{}`", sol.format),
            ));
        }
        Ok(sol)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Fails unless the solution was computed for `inst`.
    pub fn check_instance(&self, inst: &Instance) -> Result<()> {
        let found = inst.content_hash();
        if found != self.instance_hash {
            return Err(HubError::InstanceMismatch {
                expected: self.instance_hash.clone(),
                found,
            });
        }
        Ok(())
    }
}

/// Expected routing cost of one commodity under `spec`'s cost law.
pub fn route_cost(inst: &Instance, spec: &ModelSpec, route: &Routing) -> f64 {
    let r = route.commodity;
    let orig = inst.arc_cost(r, route.original);
    let p = inst.prob(route.original.edge());
    match spec.variant {
        ModelVariant::M0 => orig,
        ModelVariant::M2 => (1.0 + spec.beta * p) * orig,
        ModelVariant::M1 | ModelVariant::M1Clustered => {
            let backup = route.backup.map(|b| inst.arc_cost(r, b)).unwrap_or(0.0);
            (1.0 - p) * orig + p * backup
        }
    }
}

/// Cost decomposition of a design computed from first principles.
pub fn evaluate_design(inst: &Instance, spec: &ModelSpec, hubs: &[usize], design_edges: &[Edge], routes: &[Routing]) -> CostBreakdown {
    let hub_setup: f64 = hubs.iter().map(|&k| inst.hub_setup[k]).sum();
    let edge_setup: f64 = design_edges.iter().map(|&e| inst.edge_cost(e)).sum();
    let routing: f64 = routes.iter().map(|rt| route_cost(inst, spec, rt)).sum();
    CostBreakdown {
        hub_setup,
        edge_setup,
        routing,
        total: hub_setup + edge_setup + routing,
    }
}

fn round_binary(v: f64, tol: f64, what: &str) -> Result<bool> {
    if (v - v.round()).abs() > tol || !(-tol..=1.0 + tol).contains(&v) {
        return Err(HubError::decode("integrality", format!("{what} = {v} is not binary")));
    }
    Ok(v.round() == 1.0)
}

fn single_arc(n: usize, row: &[Option<usize>], values: &[f64], tol: f64, what: &str) -> Result<Arc> {
    let mut chosen = Vec::new();
    for a in arcs(n) {
        if let Some(j) = row[a.index(n)] {
            if round_binary(values[j], tol, what)? {
                chosen.push(a);
            }
        }
    }
    match chosen.as_slice() {
        [a] => Ok(*a),
        _ => Err(HubError::decode(
            "assignment",
            format!("{what} selects {} arcs instead of one", chosen.len()),
        )),
    }
}

/// Reads a design from solver output, checks every structural invariant and
/// recomputes the objective independently of the solver.
pub fn decode(inst: &Instance, model: &HubModel, sol: &MilpSolution) -> Result<DesignSolution> {
    if !sol.has_incumbent() {
        return Err(HubError::decode("incumbent", format!("solver finished with status {:?} and no solution", sol.status)));
    }
    let v = &sol.values;
    let n = inst.n;
    let tol = 1e-6;
    let mut hubs = Vec::new();
    for k in 0..n {
        if round_binary(v[model.z[k]], tol, &format!("z[{k}]"))? {
            hubs.push(k);
        }
    }
    let mut design_edges = Vec::new();
    for e in edges(n) {
        if round_binary(v[model.y_var(e)], tol, &format!("y[{},{}]", e.0, e.1))? {
            if !(hubs.contains(&e.0) && hubs.contains(&e.1)) {
                return Err(HubError::decode(
                    "edge-hub linking",
                    format!("edge {{{},{}}} is active but an endpoint is not a hub", e.0, e.1),
                ));
            }
            design_edges.push(e);
        }
    }
    let mut routes = Vec::with_capacity(inst.num_commodities());
    for r in 0..inst.num_commodities() {
        let original = single_arc(n, &model.x[r], v, tol, &format!("original route of commodity {r}"))?;
        let backup = if model.spec.has_backup() {
            Some(single_arc(n, &model.xbar[r], v, tol, &format!("backup route of commodity {r}"))?)
        } else {
            None
        };
        for a in std::iter::once(original).chain(backup) {
            if design_edges.binary_search(&a.edge()).is_err() {
                return Err(HubError::decode(
                    "arc-edge linking",
                    format!("commodity {r} uses arc ({},{}) on an inactive edge", a.0, a.1),
                ));
            }
        }
        if let Some(b) = backup {
            if b.edge() == original.edge() {
                return Err(HubError::decode(
                    "backup non-coincidence",
                    format!(
                        "commodity {r} uses edge {{{},{}}} for both original and backup",
                        original.edge().0,
                        original.edge().1
                    ),
                ));
            }
        }
        routes.push(Routing {
            commodity: r,
            original,
            backup,
        });
    }
    let cost = evaluate_design(inst, &model.spec, &hubs, &design_edges, &routes);
    let scale = sol.objective.abs().max(1.0);
    if (cost.total - sol.objective).abs() > 1e-5 * scale {
        return Err(HubError::decode(
            "objective",
            format!(
                "recomputed objective {} differs from solver objective {}",
                cost.total, sol.objective
            ),
        ));
    }
    Ok(DesignSolution {
        format: SOLUTION_FORMAT.into(),
        instance_hash: inst.content_hash(),
        spec: model.spec.clone(),
        status: sol.status,
        hubs,
        edges: design_edges,
        routes,
        cost,
        stats: SolveStats {
            nodes: sol.nodes,
            cuts: sol.cuts_added,
            bound: sol.bound,
            gap: sol.gap(),
            wall_seconds: 0.0,
        },
    })
}

/// Builds, solves and decodes in one call.
pub fn solve_design(inst: &Instance, spec: &ModelSpec, config: SolverConfig) -> Result<DesignSolution> {
    let start = Instant::now();
    let model = build_model(inst, spec)?;
    let sol = model.solve(config)?;
    let mut design = decode(inst, &model, &sol)?;
    design.stats.wall_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "{}: status {:?}, objective {:.6}, {} nodes, {} cuts",
        spec.label(),
        sol.status,
        design.cost.total,
        sol.nodes,
        sol.cuts_added
    );
    Ok(design)
}

/// Builds a design document directly from its parts (used by oracles and tests).
pub fn assemble_design(inst: &Instance, spec: &ModelSpec, mut hubs: Vec<usize>, mut design_edges: Vec<Edge>, routes: Vec<Routing>) -> DesignSolution {
    hubs.sort_unstable();
    design_edges.sort_unstable();
    let cost = evaluate_design(inst, spec, &hubs, &design_edges, &routes);
    DesignSolution {
        format: SOLUTION_FORMAT.into(),
        instance_hash: inst.content_hash(),
        spec: spec.clone(),
        status: MilpStatus::Optimal,
        hubs,
        edges: design_edges,
        routes,
        cost,
        stats: SolveStats::default(),
    }
}
