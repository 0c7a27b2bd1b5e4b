//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hublf::analysis::{lambda_audit, network_metrics, setup_deviation};
use hublf::failure_sim::{default_q_grid, phi_of_q, simulate, FailureScenario, FailureScenarioConfig};
use hublf::formulations::{build_m1, build_m1_clustered, build_m2, decode, solve_design, DesignSolution, ModelSpec};
use hublf::instance::{synthesize_instance, CostScalingParams, Instance, Matrix, ProbabilityScenario};
use hublf::milp::{solve_milp, MilpStatus, SolverConfig};
use hublf::network::{edges, Arc, Edge};
use hublf::oracle::{oracle_m0, oracle_m1, oracle_m2};
use hublf::separation::{exists_violation_exhaustive, gomory_hu, max_flow, separate, SupportGraph};

const ALPHAS: [f64; 3] = [0.2, 0.5, 0.8];

/// Outcome of one criterion: failures collected as human-readable lines.
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// The small corpus: 25 instances with n in {3, 4, 5} and at most 12 commodities.
fn corpus(i: usize, scenario: &ProbabilityScenario) -> Instance {
    let n = 3 + i % 3;
    let params = CostScalingParams {
        alpha: ALPHAS[(i / 3) % 3],
        ..CostScalingParams::default()
    };
    let mut inst = synthesize_instance(n, 1000 + i as u64, scenario, &params).unwrap();
    inst.retain_commodities(12, 77 + i as u64);
    inst
}

fn rp(i: usize) -> ProbabilityScenario {
    ProbabilityScenario::random(0.3, 500 + i as u64)
}

fn exact() -> SolverConfig {
    SolverConfig::default()
}

fn criterion_1() -> Check {
    let mut c = Check::new();
    for i in 0..25 {
        let inst = corpus(i, &rp(i));
        let oracle = oracle_m0(&inst).unwrap().0;
        let sol = solve_design(&inst, &ModelSpec::m0(), exact()).unwrap();
        c.expect(sol.status == MilpStatus::Optimal && close(sol.objective(), oracle, 1e-6), || {
            format!("instance {i}: milp {} vs oracle {oracle}", sol.objective())
        });
    }
    c
}

fn criterion_2() -> Check {
    let mut c = Check::new();
    for i in 0..25 {
        let scenarios = [rp(i), ProbabilityScenario::clustered(600 + i as u64), ProbabilityScenario::same(0.1)];
        for sc in &scenarios {
            let inst = corpus(i, sc);
            let oracle = oracle_m1(&inst).unwrap().0;
            let full = solve_design(&inst, &ModelSpec::m1().with_orientation_reduction(false), exact()).unwrap();
            let reduced = solve_design(&inst, &ModelSpec::m1().with_orientation_reduction(true), exact()).unwrap();
            c.expect(close(full.objective(), oracle, 1e-6), || {
                format!("instance {i} {}: milp {} vs oracle {oracle}", sc.tag(), full.objective())
            });
            c.expect(close(reduced.objective(), full.objective(), 1e-6), || {
                format!("instance {i} {}: reduced {} vs full {}", sc.tag(), reduced.objective(), full.objective())
            });
        }
    }
    c
}

/// Solves M2 keeping the separated rows; returns the decoded design and the cut rows.
fn solve_m2(inst: &Instance, lambda: usize, beta: f64) -> (DesignSolution, hublf::milp::MilpSolution, hublf::formulations::HubModel) {
    let model = build_m2(inst, &ModelSpec::m2(lambda, beta)).unwrap();
    let sol = model.solve(exact()).unwrap();
    let design = decode(inst, &model, &sol).unwrap();
    (design, sol, model)
}

fn criterion_3(m2_designs: &mut Vec<(usize, usize, DesignSolution)>) -> Check {
    let mut c = Check::new();
    let mut cuts_checked = 0usize;
    for i in 0..25 {
        let inst = corpus(i, &rp(i));
        let mut lambdas = vec![2, 3];
        if inst.n == 5 {
            lambdas.push(4);
        }
        for &lambda in &lambdas {
            for beta in [0.5, 1.0] {
                let (oracle, oracle_design) = oracle_m2(&inst, lambda, beta).unwrap();
                let (design, sol, model) = solve_m2(&inst, lambda, beta);
                c.expect(close(design.objective(), oracle, 1e-6), || {
                    format!("instance {i} λ={lambda} β={beta}: milp {} vs oracle {oracle}", design.objective())
                });
                let point = model.design_point(&inst, &oracle_design).unwrap();
                for cut in &sol.cuts {
                    cuts_checked += 1;
                    let v = cut.violation(&point);
                    c.expect(v <= 1e-9, || format!("instance {i} λ={lambda}: cut violated by oracle design ({v})"));
                }
                m2_designs.push((inst.n, lambda, design));
            }
        }
    }
    c.notes.push(format!("{cuts_checked} separated rows audited"));
    c
}

fn criterion_4() -> Check {
    let mut c = Check::new();
    for i in 0..25 {
        for sc in [ProbabilityScenario::clustered(700 + i as u64), ProbabilityScenario::same(0.3)] {
            let inst = corpus(i, &sc);
            let m1 = solve_design(&inst, &ModelSpec::m1(), exact()).unwrap();
            let model = build_m1_clustered(&inst, &ModelSpec::m1_clustered()).unwrap();
            let sol = model.solve(exact()).unwrap();
            let clustered = decode(&inst, &model, &sol).unwrap();
            c.expect(close(clustered.objective(), m1.objective(), 1e-6), || {
                format!(
                    "instance {i} {} (K={}): clustered {} vs M1 {}",
                    sc.tag(),
                    model.clusters.len(),
                    clustered.objective(),
                    m1.objective()
                )
            });
        }
    }
    c
}

fn criterion_5(m2_designs: &[(usize, usize, DesignSolution)]) -> Check {
    let mut c = Check::new();
    for (n, lambda, design) in m2_designs {
        let violations = lambda_audit(*n, design, *lambda);
        c.expect(violations.is_empty(), || format!("λ={lambda} design {:?}: {violations:?}", design.edges));
    }
    c.notes.push(format!("{} designs audited", m2_designs.len()));
    c
}

fn criterion_6() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for g_idx in 0..50 {
        let n = rng.gen_range(2..=7);
        let mut g = SupportGraph::new(n);
        for k in 0..n {
            for l in k + 1..n {
                if rng.gen_bool(0.6) {
                    // Multiples of 1/4 add up exactly in binary floating point.
                    g.add_edge(k, l, rng.gen_range(1..=12) as f64 / 4.0);
                }
            }
        }
        let tree = gomory_hu(&g);
        let mut min_direct = f64::INFINITY;
        for u in 0..n {
            for v in u + 1..n {
                let direct = max_flow(&g, u, v).0;
                min_direct = min_direct.min(direct);
                let t = tree.pair_value(u, v);
                c.expect(t == direct, || format!("graph {g_idx}: pair ({u},{v}) tree {t} vs flow {direct}"));
            }
        }
        c.expect(tree.global_min_cut() == min_direct, || {
            format!("graph {g_idx}: global cut {} vs {min_direct}", tree.global_min_cut())
        });
    }
    c
}

fn criterion_7() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violated = 0;
    for p_idx in 0..100 {
        let n = rng.gen_range(2..=8);
        let lambda = rng.gen_range(2..=4);
        let z: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.7) { 1.0 } else { 0.0 }).collect();
        let density = rng.gen_range(0.2..0.9);
        let mut y = Matrix::zeros(n);
        for e in edges(n) {
            let open = z[e.0] == 1.0 && z[e.1] == 1.0 && rng.gen_bool(density);
            if open {
                y[(e.0, e.1)] = 1.0;
                y[(e.1, e.0)] = 1.0;
            }
        }
        let heuristic = !separate(&z, &y, lambda, 1e-6).is_empty();
        let exhaustive = exists_violation_exhaustive(&z, &y, lambda, 1e-6);
        violated += exhaustive as usize;
        c.expect(heuristic == exhaustive, || {
            format!("point {p_idx}: separate {heuristic}, exhaustive {exhaustive} (n={n}, λ={lambda})")
        });
    }
    c.notes.push(format!("{violated}/100 points violated"));
    c
}

fn n8_instance(seed: u64, scenario: &ProbabilityScenario, commodities: usize) -> Instance {
    let mut inst = synthesize_instance(8, seed, scenario, &CostScalingParams::default()).unwrap();
    inst.retain_commodities(commodities, seed + 1);
    inst
}

const N8_COMMODITIES: usize = 16;

/// Objective ordering and `#H ≥ λ` hold per instance. The set-up cost
/// deviation trend is asserted on its mean over the instances, the form in
/// which the trend is reported; per-instance inversions are listed as notes.
fn criterion_8(m2_designs: &mut Vec<(usize, usize, DesignSolution)>) -> Check {
    let mut c = Check::new();
    let count = 10;
    let mut mean_dev = [0.0f64; 3];
    for s in 0..count as u64 {
        let inst = n8_instance(800 + s, &ProbabilityScenario::random(0.3, 900 + s), N8_COMMODITIES);
        let m0 = solve_design(&inst, &ModelSpec::m0(), exact()).unwrap();
        let mut prev_obj = f64::NEG_INFINITY;
        let mut devs = Vec::new();
        for lambda in 2..=4 {
            let d = solve_design(&inst, &ModelSpec::m2(lambda, 1.0), exact()).unwrap();
            c.expect(d.status == MilpStatus::Optimal, || format!("instance {s} λ={lambda}: status {:?}", d.status));
            let obj = d.objective();
            c.expect(obj >= prev_obj - 1e-6, || format!("instance {s}: objective drops to {obj} at λ={lambda}"));
            let dev = setup_deviation(m0.cost.setup(), d.cost.setup()).unwrap();
            mean_dev[lambda - 2] += dev / count as f64;
            devs.push(dev);
            let hubs = network_metrics(&d).num_hubs;
            c.expect(hubs >= lambda, || format!("instance {s}: {hubs} hubs at λ={lambda}"));
            prev_obj = obj;
            m2_designs.push((inst.n, lambda, d));
        }
        if devs.windows(2).any(|w| w[1] < w[0]) {
            c.notes.push(format!("instance {s}: per-instance set-up deviation not monotone {devs:.2?}"));
        }
    }
    c.notes.push(format!("mean set-up deviation vs M0 for λ=2,3,4: {mean_dev:.2?} %"));
    c.expect(mean_dev.windows(2).all(|w| w[1] >= w[0]), || {
        format!("mean set-up deviation not non-decreasing: {mean_dev:.2?}")
    });
    c
}

fn criterion_9() -> Check {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in 0..100 {
        let n = rng.gen_range(3..=5);
        let params = CostScalingParams {
            alpha: ALPHAS[t % 3],
            ..CostScalingParams::default()
        };
        let mut inst = synthesize_instance(n, 9000 + t as u64, &ProbabilityScenario::random(0.5, t as u64), &params).unwrap();
        inst.retain_commodities(6, t as u64);
        let spec = ModelSpec::m1().with_orientation_reduction(false);
        let mut model = build_m1(&inst, &spec).unwrap();

        // Random design with at least two hubs and two hub edges, then random arc pairs.
        let hubs: Vec<usize> = loop {
            let h: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
            if h.len() >= 2 {
                break h;
            }
        };
        let candidates: Vec<Edge> = edges(n).filter(|e| hubs.contains(&e.0) && hubs.contains(&e.1)).collect();
        let chosen: Vec<Edge> = loop {
            let e: Vec<Edge> = candidates.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            if e.len() >= 2 {
                break e;
            }
        };
        let orient = |e: Edge, rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Arc(e.0, e.1) } else { Arc(e.1, e.0) };
        let mut expected = 0.0;
        let mut fixed = vec![0.0; model.problem.num_vars()];
        for &k in &hubs {
            fixed[model.z[k]] = 1.0;
        }
        for &e in &chosen {
            fixed[model.y_var(e)] = 1.0;
        }
        for r in 0..inst.num_commodities() {
            let i = rng.gen_range(0..chosen.len());
            let mut j = rng.gen_range(0..chosen.len() - 1);
            if j >= i {
                j += 1;
            }
            let (a, b) = (orient(chosen[i], &mut rng), orient(chosen[j], &mut rng));
            fixed[model.x[r][a.index(n)].unwrap()] = 1.0;
            fixed[model.xbar[r][b.index(n)].unwrap()] = 1.0;
            let p = inst.prob(a.edge());
            expected += (1.0 - p) * inst.arc_cost(r, a) + p * inst.arc_cost(r, b);
        }
        let setup: f64 = hubs.iter().map(|&k| inst.hub_setup[k]).sum::<f64>()
            + chosen.iter().map(|&e| inst.edge_cost(e)).sum::<f64>();
        for (j, var) in model.problem.variables.iter_mut().enumerate() {
            if var.integer {
                var.lower = fixed[j];
                var.upper = fixed[j];
            }
        }
        let sol = solve_milp(&model.problem, exact()).unwrap();
        let routing = sol.objective - setup;
        c.expect(sol.status == MilpStatus::Optimal && close(routing, expected, 1e-9), || {
            format!("point {t}: linearized {routing} vs closed form {expected} (diff {:e})", routing - expected)
        });
    }
    c
}

fn criterion_10() -> Check {
    let mut c = Check::new();
    let grid = default_q_grid();
    let base = synthesize_instance(6, 10, &ProbabilityScenario::same(0.0), &CostScalingParams::default()).unwrap();
    let design = solve_design(&base, &ModelSpec::m2(3, 1.0), exact()).unwrap();
    for kind in FailureScenario::ALL {
        let rep = simulate(&design, &base, &FailureScenarioConfig::new(kind, 1)).unwrap();
        c.expect(rep.tau_f == 1.0, || format!("p=0 {}: tau {}", kind.tag(), rep.tau_f));
    }

    let mut certain = base.clone();
    certain.fail_prob = Matrix::filled(certain.n, 1.0);
    let mut design1 = design.clone();
    design1.instance_hash = certain.content_hash();
    let rep = simulate(&design1, &certain, &FailureScenarioConfig::new(FailureScenario::Fs1, 2)).unwrap();
    c.expect(rep.tau_f == 0.0, || format!("p=1 FS1: tau {}", rep.tau_f));
    let direct = certain.direct_delivery_cost();
    for (q, phi) in phi_of_q(design1.cost.setup(), rep.tau_f, rep.mean_routing_cost, direct, &grid) {
        let want = design1.cost.setup() + (1.0 + q) * direct;
        c.expect(phi == want, || format!("p=1 Φ({q}) = {phi}, want {want}"));
    }

    let rho = 0.3;
    let mut sp = base.clone();
    sp.fail_prob = Matrix::filled(sp.n, rho);
    let mut design2 = design.clone();
    design2.instance_hash = sp.content_hash();
    let trials = 10_000;
    let started = Instant::now();
    let rep = simulate(&design2, &sp, &FailureScenarioConfig::new(FailureScenario::Fs1, 3).with_trials(trials)).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let m = design2.edges.len() as f64;
    let sigma = (m * rho * (1.0 - rho) / trials as f64).sqrt();
    let dev = (rep.mean_failed_edges - rho * m).abs();
    c.expect(dev <= 4.0 * sigma, || format!("FS1 mean failed {} vs {} (σ {sigma})", rep.mean_failed_edges, rho * m));
    c.expect(secs < 10.0, || format!("FS1 took {secs:.2}s"));
    c.notes.push(format!("FS1 mean failed {:.4} vs {:.4}, {secs:.2}s", rep.mean_failed_edges, rho * m));
    c
}

fn criterion_11(m2_designs: &mut Vec<(usize, usize, DesignSolution)>) -> Check {
    let mut c = Check::new();
    let trials = 10_000;
    let mut ties = 0;
    for s in 0..5u64 {
        let inst = n8_instance(1100 + s, &ProbabilityScenario::same(0.3), N8_COMMODITIES);
        let specs = [ModelSpec::m0(), ModelSpec::m1(), ModelSpec::m2(2, 1.0), ModelSpec::m2(3, 1.0), ModelSpec::m2(4, 1.0)];
        let mut rate = Vec::new();
        for spec in &specs {
            let d = solve_design(&inst, spec, exact()).unwrap();
            let cfg = FailureScenarioConfig::new(FailureScenario::Fs1, 11 + s).with_trials(trials);
            rate.push(simulate(&d, &inst, &cfg).unwrap().non_routable_fraction());
            if spec.lambda >= 2 && spec.variant == hublf::formulations::ModelVariant::M2 {
                m2_designs.push((inst.n, spec.lambda, d));
            }
        }
        // (better, worse) index pairs: M1 ≤ M0, M2_4 ≤ M2_3 ≤ M2_2.
        for (better, worse) in [(1, 0), (4, 3), (3, 2)] {
            let (a, b) = (rate[better], rate[worse]);
            let sigma = ((a * (1.0 - a) + b * (1.0 - b)) / trials as f64).sqrt();
            if b - a >= 3.0 * sigma && b > a {
                continue;
            }
            if (a - b).abs() < 3.0 * sigma || a == b {
                ties += 1;
                continue;
            }
            c.failures.push(format!(
                "instance {s}: {} non-routable {a} exceeds {} at {b} by more than 3σ",
                specs[better].label(),
                specs[worse].label()
            ));
        }
        c.notes.push(format!(
            "instance {s}: M0 {:.4} M1 {:.4} M2_2 {:.4} M2_3 {:.4} M2_4 {:.4}",
            rate[0], rate[1], rate[2], rate[3], rate[4]
        ));
    }
    c.notes.push(format!("{ties} comparisons within 3σ recorded as ties"));
    c
}

fn main() -> ExitCode {
    let mut m2_designs = Vec::new();
    let mut all_ok = true;
    let mut report = |id: usize, name: &str, run: &mut dyn FnMut() -> Check| {
        let started = Instant::now();
        let check = run();
        let ok = check.failures.is_empty();
        all_ok &= ok;
        println!(
            "criterion {id:>2} {:<34} {} ({:.1}s)",
            name,
            if ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        for note in &check.notes {
            println!("    {note}");
        }
        for f in check.failures.iter().take(10) {
            println!("    failure: {f}");
        }
    };
    report(1, "oracle agreement, unprotected", &mut criterion_1);
    report(2, "oracle agreement, single backup", &mut criterion_2);
    report(3, "oracle agreement, λ-connected", &mut || criterion_3(&mut m2_designs));
    report(4, "clustered reformulation", &mut criterion_4);
    report(6, "Gomory-Hu tree correctness", &mut criterion_6);
    report(7, "separation exactness", &mut criterion_7);
    report(8, "monotonicity in λ", &mut || criterion_8(&mut m2_designs));
    report(9, "linearization exactness", &mut criterion_9);
    report(10, "simulation sanity", &mut criterion_10);
    report(11, "robustness ordering", &mut || criterion_11(&mut m2_designs));
    report(5, "λ-connectivity audit", &mut || criterion_5(&m2_designs));
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
