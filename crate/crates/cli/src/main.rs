//! Command-line front end: generate instances, solve models, simulate
//! failures and tabulate design metrics.
//!
//! Exit codes: 0 success (solve: proven optimal), 1 error, 2 usage error,
//! 3 search stopped at a limit, 4 model infeasible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hublf::analysis::{network_metrics, price_of_robustness};
use hublf::failure_sim::{default_q_grid, FailureScenario, FailureScenarioConfig, SimulationReport};
use hublf::formulations::{solve_design, DesignSolution, ModelSpec, ModelVariant};
use hublf::instance::{load_instance, save_instance, synthesize_instance, CostScalingParams, ProbabilityScenario};
use hublf::milp::{MilpStatus, SolverConfig};
use hublf::HubError;

const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "hublf", version, about = "Hub network design under inter-hub link failures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance file.
    Generate(GenerateArgs),
    /// Solve one model on an instance and write the design.
    Solve(SolveArgs),
    /// Monte-Carlo failure simulation of one or more designs; writes CSV.
    Simulate(SimulateArgs),
    /// Network metrics and price of robustness of a set of designs; writes CSV.
    Report(ReportArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ScenarioFlag {
    /// Independent Uniform[0, rho] probabilities.
    Rp,
    /// Probabilities drawn from {0.1, 0.2, 0.3}.
    Cp,
    /// Every edge fails with probability rho.
    Sp,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "sp")]
    scenario: ScenarioFlag,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 100.0)]
    hub_setup: f64,
    /// Keep a random subset of this many commodities.
    #[arg(long)]
    commodities: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelFlag {
    M0,
    M1,
    M1c,
    M2,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    model: ModelFlag,
    #[arg(long, default_value_t = 2)]
    lambda: usize,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Keep both orientations of every hub edge.
    #[arg(long)]
    no_reduction: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Design files produced by `solve`.
    #[arg(long, required = true, num_args = 1..)]
    solutions: Vec<PathBuf>,
    /// Failure scenarios: fs1, fs2, fs3, fs4 or all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    scenarios: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.75)]
    gamma: f64,
    #[arg(long, default_value_t = 1.5)]
    loop_inflation: f64,
    /// Comma-separated surcharge factors; defaults to 0, 0.05, ..., 1.
    #[arg(long, value_delimiter = ',')]
    q_grid: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Design files; an M0 design among them is the robustness baseline.
    #[arg(long, num_args = 1..)]
    solutions: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Simulate(a) => simulate(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            log::error!("{err:#}");
            let code = match err.downcast_ref::<HubError>() {
                Some(HubError::InfeasibleByConstruction(_)) => EXIT_INFEASIBLE,
                Some(HubError::Validation { .. }) => EXIT_USAGE,
                _ => EXIT_ERROR,
            };
            ExitCode::from(code)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn generate(a: GenerateArgs) -> anyhow::Result<u8> {
    let scenario = match a.scenario {
        ScenarioFlag::Rp => ProbabilityScenario::random(a.rho, a.seed.wrapping_add(1)),
        ScenarioFlag::Cp => ProbabilityScenario::clustered(a.seed.wrapping_add(1)),
        ScenarioFlag::Sp => ProbabilityScenario::same(a.rho),
    };
    let params = CostScalingParams {
        alpha: a.alpha,
        hub_setup_default: a.hub_setup,
        ..CostScalingParams::default()
    };
    let mut inst = synthesize_instance(a.n, a.seed, &scenario, &params)?;
    if let Some(count) = a.commodities {
        inst.retain_commodities(count, a.seed);
    }
    save_instance(&inst, &a.out)?;
    log::info!(
        "n={} commodities={} scenario={} alpha={} hub_setup={} hash={}",
        inst.n,
        inst.num_commodities(),
        scenario.tag(),
        inst.alpha,
        a.hub_setup,
        inst.content_hash()
    );
    Ok(0)
}

fn solve(a: SolveArgs) -> anyhow::Result<u8> {
    let inst = load_instance(&a.instance).with_context(|| format!("cannot load {}", a.instance.display()))?;
    let spec = match a.model {
        ModelFlag::M0 => ModelSpec::m0(),
        ModelFlag::M1 => ModelSpec::m1(),
        ModelFlag::M1c => ModelSpec::m1_clustered(),
        ModelFlag::M2 => ModelSpec::m2(a.lambda, a.beta),
    }
    .with_orientation_reduction(!a.no_reduction);
    let mut config = SolverConfig::default();
    if let Some(secs) = a.time_limit {
        if !(secs > 0.0 && secs.is_finite()) {
            bail!(HubError::Validation {
                field: "time-limit".into(),
                message: format!("must be a positive number of seconds, got {secs}"),
            });
        }
        config.time_limit = Some(Duration::from_secs_f64(secs));
    }
    config.node_limit = a.node_limit;
    let design = match solve_design(&inst, &spec, config) {
        Ok(d) => d,
        Err(HubError::Decode { constraint, .. }) if constraint == "incumbent" => {
            log::error!("{}: no feasible design found", spec.label());
            return Ok(EXIT_LIMIT);
        }
        Err(e) => return Err(e.into()),
    };
    design.save(&a.out)?;
    let s = &design.stats;
    log::info!(
        "{} objective={:.6} nodes={} cuts={} gap={:.3e} wall={:.3}s hubs={:?}",
        spec.label(),
        design.objective(),
        s.nodes,
        s.cuts,
        s.gap,
        s.wall_seconds,
        design.hubs
    );
    Ok(match design.status {
        MilpStatus::Optimal => 0,
        MilpStatus::Infeasible => EXIT_INFEASIBLE,
        MilpStatus::GapLimit | MilpStatus::NodeLimit | MilpStatus::TimeLimit => EXIT_LIMIT,
        MilpStatus::Unbounded | MilpStatus::NumericFailure => EXIT_ERROR,
    })
}

fn simulate(a: SimulateArgs) -> anyhow::Result<u8> {
    let inst = load_instance(&a.instance).with_context(|| format!("cannot load {}", a.instance.display()))?;
    let mut kinds = Vec::new();
    for s in &a.scenarios {
        if s.eq_ignore_ascii_case("all") {
            kinds.extend(FailureScenario::ALL);
        } else {
            match FailureScenario::parse(s) {
                Some(k) => kinds.push(k),
                None => bail!(HubError::Validation {
                    field: "scenarios".into(),
                    message: format!("unknown scenario `{s}`"),
                }),
            }
        }
    }
    let configs: Vec<FailureScenarioConfig> = kinds
        .into_iter()
        .map(|kind| FailureScenarioConfig {
            gamma: a.gamma,
            loop_inflation: a.loop_inflation,
            ..FailureScenarioConfig::new(kind, a.seed).with_trials(a.trials)
        })
        .collect();
    let mut report = SimulationReport::new(inst.content_hash(), a.q_grid.unwrap_or_else(default_q_grid));
    for path in &a.solutions {
        let sol = DesignSolution::load(path).with_context(|| format!("cannot load {}", path.display()))?;
        report
            .add_design(&sol, &inst, &configs)
            .with_context(|| format!("simulating {}", path.display()))?;
        for s in &report.models.last().expect("just added").scenarios {
            log::info!("{} {}: tau_f={:.4}", sol.spec.label(), s.kind.tag(), s.tau_f);
        }
    }
    write_file(&a.out, &report.to_csv())?;
    Ok(0)
}

fn report(a: ReportArgs) -> anyhow::Result<u8> {
    if a.solutions.is_empty() {
        bail!(HubError::Validation {
            field: "solutions".into(),
            message: "at least one design file is required".into(),
        });
    }
    let designs = a
        .solutions
        .iter()
        .map(|p| DesignSolution::load(p).with_context(|| format!("cannot load {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let baseline = designs.iter().find(|d| d.spec.variant == ModelVariant::M0);
    let mut out = String::from(
        "model,hubs,links,loops,i1,i2,hub_setup,edge_setup,routing,total,routing_share,hub_share,link_share,price_of_robustness\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for d in &designs {
        let m = network_metrics(d);
        let por = match baseline {
            Some(b) => price_of_robustness(b, d)?,
            None => None,
        };
        let c = &d.cost;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            d.spec.label(),
            m.num_hubs,
            m.num_links,
            m.num_loops,
            opt(m.i1),
            opt(m.i2),
            c.hub_setup,
            c.edge_setup,
            c.routing,
            c.total,
            m.routing_share,
            m.hub_share,
            m.link_share,
            opt(por)
        );
    }
    write_file(&a.out, &out)?;
    Ok(0)
}
