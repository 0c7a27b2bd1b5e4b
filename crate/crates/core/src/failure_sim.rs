//! Monte-Carlo evaluation of a design under random hub edge failures.
//!
//! Only activated hub edges can fail. Four failure mechanisms are offered:
//! independent edge failures (`Fs1`), whole-hub failures (`Fs2`), edge
//! failures that raise the failure probability of adjacent loops (`Fs3`),
//! and edge failures that cascade to hubs losing most of their inter-hub
//! edges (`Fs4`).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::shortest_route;
use crate::error::{HubError, Result};
use crate::formulations::DesignSolution;
use crate::instance::Instance;
use crate::network::Edge;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureScenario {
    Fs1,
    Fs2,
    Fs3,
    Fs4,
}

impl FailureScenario {
    pub const ALL: [FailureScenario; 4] = [Self::Fs1, Self::Fs2, Self::Fs3, Self::Fs4];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Fs1 => "FS1",
            Self::Fs2 => "FS2",
            Self::Fs3 => "FS3",
            Self::Fs4 => "FS4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.tag().eq_ignore_ascii_case(s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureScenarioConfig {
    pub kind: FailureScenario,
    pub trials: usize,
    /// Fraction of failed inter-hub edges at which a hub fails entirely (`Fs4`).
    pub gamma: f64,
    /// Multiplier applied to a loop's failure probability after an adjacent edge fails (`Fs3`).
    pub loop_inflation: f64,
    pub seed: u64,
}

impl FailureScenarioConfig {
    pub fn new(kind: FailureScenario, seed: u64) -> Self {
        FailureScenarioConfig {
            kind,
            trials: 10_000,
            gamma: 0.75,
            loop_inflation: 1.5,
            seed,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HubError::validation("trials", "at least one trial is required"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(HubError::validation("gamma", format!("{} outside (0, 1]", self.gamma)));
        }
        if !(self.loop_inflation >= 0.0 && self.loop_inflation.is_finite()) {
            return Err(HubError::validation("loop_inflation", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Independent random stream for one trial.
    pub fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

/// Draws one failure realization and returns the surviving hub edges, sorted.
pub fn draw_after_failure(sol: &DesignSolution, inst: &Instance, config: &FailureScenarioConfig, rng: &mut impl Rng) -> Vec<Edge> {
    let edges = &sol.edges;
    let mut alive = vec![true; edges.len()];
    fn fails(p: f64, rng: &mut impl Rng) -> bool {
        rng.gen::<f64>() < p
    }
    match config.kind {
        FailureScenario::Fs1 => {
            for (i, &e) in edges.iter().enumerate() {
                alive[i] = !fails(inst.prob(e), rng);
            }
        }
        FailureScenario::Fs2 => {
            for &k in &sol.hubs {
                if fails(inst.fail_prob[(k, k)], rng) {
                    for (i, &e) in edges.iter().enumerate() {
                        if e.touches(k) {
                            alive[i] = false;
                        }
                    }
                }
            }
        }
        FailureScenario::Fs3 => {
            let mut hit = vec![false; inst.n];
            for (i, &e) in edges.iter().enumerate() {
                if !e.is_loop() && fails(inst.prob(e), rng) {
                    alive[i] = false;
                    hit[e.0] = true;
                    hit[e.1] = true;
                }
            }
            for (i, &e) in edges.iter().enumerate() {
                if e.is_loop() {
                    let mut p = inst.prob(e);
                    if hit[e.0] {
                        p = (p * config.loop_inflation).min(1.0);
                    }
                    alive[i] = !fails(p, rng);
                }
            }
        }
        FailureScenario::Fs4 => {
            for (i, &e) in edges.iter().enumerate() {
                alive[i] = !fails(inst.prob(e), rng);
            }
            let mut collapsed = Vec::new();
            for &k in &sol.hubs {
                let incident: Vec<usize> = (0..edges.len())
                    .filter(|&i| !edges[i].is_loop() && edges[i].touches(k))
                    .collect();
                if incident.is_empty() {
                    continue;
                }
                let failed = incident.iter().filter(|&&i| !alive[i]).count();
                if failed as f64 >= config.gamma * incident.len() as f64 {
                    collapsed.push(k);
                }
            }
            for k in collapsed {
                for (i, &e) in edges.iter().enumerate() {
                    if e.touches(k) {
                        alive[i] = false;
                    }
                }
            }
        }
    }
    edges.iter().zip(&alive).filter(|(_, &a)| a).map(|(&e, _)| e).collect()
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub routable: bool,
    /// Total routing cost when every commodity is routable, else 0.
    pub cost: f64,
    pub rerouted: usize,
}

/// Routes every commodity over the surviving backbone: on its original arc
/// when that edge survived, otherwise on the cheapest remaining path.
pub fn evaluate_trial(sol: &DesignSolution, inst: &Instance, surviving: &[Edge]) -> TrialOutcome {
    let mut cost = 0.0;
    let mut rerouted = 0;
    for route in &sol.routes {
        let r = route.commodity;
        if surviving.binary_search(&route.original.edge()).is_ok() {
            cost += inst.arc_cost(r, route.original);
            continue;
        }
        rerouted += 1;
        match shortest_route(inst, r, &sol.hubs, surviving) {
            Some(path) => cost += path.cost,
            None => {
                return TrialOutcome {
                    routable: false,
                    cost: 0.0,
                    rerouted,
                }
            }
        }
    }
    TrialOutcome {
        routable: true,
        cost,
        rerouted,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub kind: FailureScenario,
    pub trials: usize,
    pub successes: usize,
    /// Fraction of trials in which every commodity stayed routable.
    pub tau_f: f64,
    /// Mean routing cost over successful trials; 0 when there were none.
    pub mean_routing_cost: f64,
    pub mean_failed_edges: f64,
    /// `histogram[j]` counts trials in which exactly `j` hub edges failed.
    pub failed_edges_histogram: Vec<usize>,
}

impl ScenarioReport {
    pub fn non_routable_fraction(&self) -> f64 {
        1.0 - self.tau_f
    }
}

/// Runs `config.trials` independent trials. Trials execute in parallel; the
/// reduction runs in trial order, so results are bitwise reproducible.
pub fn simulate(sol: &DesignSolution, inst: &Instance, config: &FailureScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let total = sol.edges.len();
    let outcomes: Vec<(TrialOutcome, usize)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = config.trial_rng(t);
            let surviving = draw_after_failure(sol, inst, config, &mut rng);
            (evaluate_trial(sol, inst, &surviving), total - surviving.len())
        })
        .collect();
    let mut histogram = vec![0usize; total + 1];
    let mut successes = 0usize;
    let mut cost_sum = 0.0;
    let mut failed_sum = 0usize;
    for (outcome, failed) in &outcomes {
        histogram[*failed] += 1;
        failed_sum += failed;
        if outcome.routable {
            successes += 1;
            cost_sum += outcome.cost;
        }
    }
    let trials = config.trials;
    Ok(ScenarioReport {
        kind: config.kind,
        trials,
        successes,
        tau_f: successes as f64 / trials as f64,
        mean_routing_cost: if successes > 0 { cost_sum / successes as f64 } else { 0.0 },
        mean_failed_edges: failed_sum as f64 / trials as f64,
        failed_edges_histogram: histogram,
    })
}

/// `Φ(q) = setup + τ R + (1 − τ)(1 + q) D` for each `q`, where `D` is the
/// cost of serving every commodity directly.
pub fn phi_of_q(setup: f64, tau_f: f64, mean_routing_cost: f64, direct_cost: f64, q_grid: &[f64]) -> Vec<(f64, f64)> {
    let routed = if tau_f > 0.0 { tau_f * mean_routing_cost } else { 0.0 };
    q_grid
        .iter()
        .map(|&q| (q, setup + routed + (1.0 - tau_f) * (1.0 + q) * direct_cost))
        .collect()
}

/// `{0, 0.05, …, 1}`.
pub fn default_q_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSimulation {
    pub model: String,
    pub setup_cost: f64,
    pub direct_cost: f64,
    pub scenarios: Vec<ScenarioReport>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub instance_hash: String,
    pub q_grid: Vec<f64>,
    pub models: Vec<ModelSimulation>,
}

impl SimulationReport {
    pub fn new(instance_hash: String, q_grid: Vec<f64>) -> Self {
        SimulationReport {
            instance_hash,
            q_grid,
            models: Vec::new(),
        }
    }

    /// Simulates `sol` under every scenario in `configs` and appends the results.
    pub fn add_design(&mut self, sol: &DesignSolution, inst: &Instance, configs: &[FailureScenarioConfig]) -> Result<()> {
        sol.check_instance(inst)?;
        let scenarios = configs
            .iter()
            .map(|cfg| simulate(sol, inst, cfg))
            .collect::<Result<Vec<_>>>()?;
        self.models.push(ModelSimulation {
            model: sol.spec.label(),
            setup_cost: sol.cost.setup(),
            direct_cost: inst.direct_delivery_cost(),
            scenarios,
        });
        Ok(())
    }

    /// One row per model, scenario and `q` sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "model,scenario,trials,tau_f,non_routable,mean_routing_cost,mean_failed_edges,q,phi\n",
        );
        for m in &self.models {
            for s in &m.scenarios {
                let curve = phi_of_q(m.setup_cost, s.tau_f, s.mean_routing_cost, m.direct_cost, &self.q_grid);
                for (q, phi) in curve {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        m.model,
                        s.kind.tag(),
                        s.trials,
                        s.tau_f,
                        s.non_routable_fraction(),
                        s.mean_routing_cost,
                        s.mean_failed_edges,
                        q,
                        phi
                    );
                }
            }
        }
        out
    }
}
