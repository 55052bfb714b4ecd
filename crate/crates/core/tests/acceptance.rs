//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and fails
//! if any criterion fails.
//!
//! Criteria 3-5 need an external MILP solver (see `common::milp_solver`);
//! criterion 5 additionally needs the Cordeau files a2-16, b2-16, b2-20,
//! b3-18 and b4-16 in `EVDARP_BENCHMARK_DIR`.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use evdarp::event_graph::{arc_count_closed_form, node_count_closed_form};
use evdarp::instance::{parse_cordeau, tighten_time_windows};
use evdarp::solve::{parse_assignment, Schedule};
use evdarp::{
    build_model, import_solution, minimal_schedule, oracle_solve, validate_solution, write_mps, Error,
    EventGraph, Instance, ModelVariant, ObjectiveKind, ObjectiveSpec, Solution, Stop, Tour,
    ViolationKind,
};

const AGREE: f64 = 1e-6;
const BOUND_SLACK: f64 = 1e-9;
const BENCH_TOL: f64 = 0.05;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Report {
    lines: Vec<(usize, &'static str, Verdict)>,
}

impl Report {
    fn record(&mut self, id: usize, name: &'static str, v: Verdict) {
        let (tag, detail) = match &v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => ("FAIL", d),
            Verdict::Skip(d) => ("SKIP", d),
        };
        // straight to the handle so the line shows without --nocapture
        let _ = writeln!(std::io::stdout().lock(), "criterion {id} [{tag}] {name}: {detail}");
        self.lines.push((id, name, v));
    }
}

fn objective_for(kind: ObjectiveKind, n: usize) -> (ObjectiveSpec, bool) {
    (ObjectiveSpec::new(kind, n), kind.penalizes_denial())
}

fn oracle_value(inst: &Instance, kind: ObjectiveKind) -> Option<Solution> {
    let (obj, denial) = objective_for(kind, inst.n());
    match oracle_solve(inst, &obj, denial, 6) {
        Ok(s) => Some(s),
        Err(Error::Infeasible(_)) => None,
        Err(e) => panic!("oracle failed: {e}"),
    }
}

fn graph_counts() -> Verdict {
    let start = Instant::now();
    for n in 1..=10usize {
        for q in 1..=3u32 {
            let (bv, ba) = common::brute_counts(&vec![1; n], q);
            let (cv, ca) = (node_count_closed_form(n as u64, q as u64), arc_count_closed_form(n as u64, q as u64));
            let g = EventGraph::build(&common::unit_line(n, q));
            if bv as u64 != cv || ba as u64 != ca || g.nodes().len() != bv || g.arcs().len() != ba {
                return Verdict::Fail(format!(
                    "n={n} Q={q}: brute ({bv}, {ba}), closed form ({cv}, {ca}), built ({}, {})",
                    g.nodes().len(),
                    g.arcs().len()
                ));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        return Verdict::Fail(format!("30 cases agree but took {secs:.1}s"));
    }
    Verdict::Pass(format!("30 (n, Q) cases agree exactly in {secs:.2}s"))
}

fn example_one_graph() -> Verdict {
    let g = EventGraph::build(&common::example_one());
    let expected: BTreeSet<String> = [
        "(0,0,0)->(1+,0,0)",
        "(0,0,0)->(2+,0,0)",
        "(0,0,0)->(3+,0,0)",
        "(1+,0,0)->(1-,0,0)",
        "(2+,0,0)->(2-,0,0)",
        "(3+,0,0)->(3-,0,0)",
        "(2+,1,0)->(1-,2,0)",
        "(2+,1,0)->(2-,1,0)",
        "(1+,2,0)->(1-,2,0)",
        "(1+,2,0)->(2-,1,0)",
        "(1-,0,0)->(0,0,0)",
        "(2-,0,0)->(0,0,0)",
        "(3-,0,0)->(0,0,0)",
        "(1-,0,0)->(2+,0,0)",
        "(1-,0,0)->(3+,0,0)",
        "(2-,0,0)->(1+,0,0)",
        "(2-,0,0)->(3+,0,0)",
        "(3-,0,0)->(1+,0,0)",
        "(3-,0,0)->(2+,0,0)",
        "(1+,0,0)->(2+,1,0)",
        "(2+,0,0)->(1+,2,0)",
        "(2-,1,0)->(1-,0,0)",
        "(1-,2,0)->(2-,0,0)",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let got: BTreeSet<String> = g.arcs().iter().map(|a| format!("{}->{}", g.node(a.tail), g.node(a.head))).collect();
    if g.nodes().len() != 11 || g.arcs().len() != 23 || got != expected {
        let missing: Vec<_> = expected.difference(&got).collect();
        let extra: Vec<_> = got.difference(&expected).collect();
        return Verdict::Fail(format!(
            "{} nodes, {} arcs; missing {missing:?}; extra {extra:?}",
            g.nodes().len(),
            g.arcs().len()
        ));
    }
    Verdict::Pass("11 nodes, 23 arcs, arc set identical".into())
}

/// Outcome of one exported model.
struct MilpRun {
    instance: usize,
    variant: ModelVariant,
    kind: ObjectiveKind,
    value: Option<f64>,
    problem: Option<String>,
}

fn solve_all(
    solver: &[String],
    dir: &Path,
    instances: &[(String, Instance)],
    graphs: &[Arc<EventGraph>],
) -> Vec<MilpRun> {
    let mut jobs = Vec::new();
    let mut paths: Vec<PathBuf> = Vec::new();
    for (k, (name, inst)) in instances.iter().enumerate() {
        for variant in [ModelVariant::Model2, ModelVariant::Model3] {
            for kind in ObjectiveKind::ALL {
                let (obj, denial) = objective_for(kind, inst.n());
                let model = build_model(graphs[k].clone(), variant, obj, denial).unwrap();
                let path = dir.join(format!("{}.mps", model.file_stem(name)));
                std::fs::write(&path, write_mps(&model, name)).unwrap();
                paths.push(path);
                jobs.push((k, model));
            }
        }
    }
    let outputs = common::run_solver(solver, &paths);
    jobs.into_iter()
        .zip(outputs)
        .map(|((k, model), out)| {
            let text = std::fs::read_to_string(&out).unwrap();
            let (assignment, claimed) = parse_assignment(&text).unwrap();
            let mut run = MilpRun { instance: k, variant: model.variant(), kind: model.objective().kind, value: claimed, problem: None };
            if claimed.is_some() {
                match import_solution(&model, &assignment, claimed) {
                    Ok(outcome) => {
                        let report = validate_solution(model.instance(), &outcome.solution);
                        if !report.ok {
                            run.problem = Some(format!("decoded solution invalid: {:?}", report.violations));
                        } else if let Some(d) = outcome.discrepancy {
                            run.problem = Some(format!("claimed objective off by {d}"));
                        }
                    }
                    Err(e) => run.problem = Some(format!("import failed: {e}")),
                }
            }
            run
        })
        .collect()
}

fn agree(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (None, None) => Some(0.0),
        (Some(x), Some(y)) if (x - y).abs() <= AGREE => Some((x - y).abs()),
        _ => None,
    }
}

fn oracle_vs_milp(runs: &[MilpRun], oracle: &[Vec<Option<Solution>>]) -> Verdict {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut infeasible = 0;
    for r in runs {
        let k = ObjectiveKind::ALL.iter().position(|&x| x == r.kind).unwrap();
        let o = oracle[r.instance][k].as_ref().map(|s| s.objective.unwrap().total);
        if o.is_none() {
            infeasible += 1;
        }
        match agree(o, r.value) {
            Some(d) => worst = worst.max(d),
            None => bad.push(format!("instance {} {} {}: oracle {o:?}, MILP {:?}", r.instance, r.variant, r.kind, r.value)),
        }
        if let Some(p) = &r.problem {
            bad.push(format!("instance {} {} {}: {p}", r.instance, r.variant, r.kind));
        }
    }
    if bad.is_empty() {
        Verdict::Pass(format!(
            "{} models agree with the oracle (max |diff| {worst:.2e}, {infeasible} jointly infeasible); decoded solutions validate",
            runs.len()
        ))
    } else {
        Verdict::Fail(format!("{} disagreements, first: {}", bad.len(), bad[0]))
    }
}

fn model2_vs_model3(runs: &[MilpRun]) -> Verdict {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut bad = Vec::new();
    for a in runs.iter().filter(|r| r.variant == ModelVariant::Model2) {
        let b = runs
            .iter()
            .find(|r| r.variant == ModelVariant::Model3 && r.instance == a.instance && r.kind == a.kind)
            .unwrap();
        pairs += 1;
        match agree(a.value, b.value) {
            Some(d) => worst = worst.max(d),
            None => bad.push(format!("instance {} {}: {:?} vs {:?}", a.instance, a.kind, a.value, b.value)),
        }
    }
    if bad.is_empty() {
        Verdict::Pass(format!("{pairs} model pairs agree (max |diff| {worst:.2e})"))
    } else {
        Verdict::Fail(format!("{} disagreements, first: {}", bad.len(), bad[0]))
    }
}

fn benchmarks(solver: Option<&[String]>, dir: &Path) -> Verdict {
    let Some(solver) = solver else {
        return Verdict::Skip("no external MILP solver".into());
    };
    let Ok(bench) = std::env::var("EVDARP_BENCHMARK_DIR") else {
        return Verdict::Skip("EVDARP_BENCHMARK_DIR not set".into());
    };
    let targets = [("a2-16", 294.2), ("b2-16", 309.4), ("b2-20", 332.6), ("b3-18", 301.6), ("b4-16", 297.0)];
    let mut paths = Vec::new();
    let mut models = Vec::new();
    for (name, _) in targets {
        let file = [name.to_string(), format!("{name}.txt")]
            .into_iter()
            .map(|f| Path::new(&bench).join(f))
            .find(|p| p.exists());
        let Some(file) = file else {
            return Verdict::Skip(format!("{name} not found in {bench}"));
        };
        let inst = tighten_time_windows(&parse_cordeau(&std::fs::read_to_string(file).unwrap()).unwrap()).unwrap();
        let g = Arc::new(EventGraph::build(&inst));
        let model = build_model(g, ModelVariant::Model3, ObjectiveSpec::new(ObjectiveKind::Cost, inst.n()), false).unwrap();
        let path = dir.join(format!("{}.mps", model.file_stem(name)));
        std::fs::write(&path, write_mps(&model, name)).unwrap();
        paths.push(path);
        models.push(model);
    }
    let outs = common::run_solver(solver, &paths);
    let mut lines = Vec::new();
    let mut failed = false;
    for ((name, want), out) in targets.iter().zip(outs) {
        let (_, claimed) = parse_assignment(&std::fs::read_to_string(out).unwrap()).unwrap();
        let ok = claimed.is_some_and(|v| (v - want).abs() <= BENCH_TOL);
        failed |= !ok;
        lines.push(format!("{name} {claimed:?} (want {want})"));
    }
    if failed {
        Verdict::Fail(lines.join(", "))
    } else {
        Verdict::Pass(lines.join(", "))
    }
}

fn tiny(count: usize) -> Vec<Instance> {
    (0..count as u64)
        .map(|k| {
            let cfg = evdarp::GeneratorConfig::new(1 + (k as usize % 4), if k % 2 == 0 { 3 } else { 6 }, 5000 + k);
            evdarp::instance::generate_synthetic(&cfg).unwrap()
        })
        .collect()
}

fn mutation_base() -> (Instance, Solution) {
    for seed in 1.. {
        let mut cfg = evdarp::GeneratorConfig::new(4, 3, 7000 + seed);
        cfg.fleet_size = Some(2);
        let inst = evdarp::instance::generate_synthetic(&cfg).unwrap();
        if let Some(sol) = oracle_value(&inst, ObjectiveKind::CostExcess) {
            return (inst, sol);
        }
    }
    unreachable!()
}

fn validator_soundness() -> Verdict {
    let mut invalid = Vec::new();
    for (k, inst) in tiny(100).iter().enumerate() {
        let sol = oracle_value(inst, ObjectiveKind::CostExcess)
            .or_else(|| oracle_value(inst, ObjectiveKind::RequestCostExcess))
            .unwrap();
        let r = validate_solution(inst, &sol);
        if !r.ok {
            invalid.push(format!("instance {k}: {:?}", r.violations));
        }
    }
    if !invalid.is_empty() {
        return Verdict::Fail(format!("{} oracle solutions rejected, first: {}", invalid.len(), invalid[0]));
    }

    let (inst, sol) = mutation_base();
    let n = inst.n() as u32;
    let mut missed = Vec::new();
    let check = |kind: ViolationKind, mutated: &Solution, missed: &mut Vec<ViolationKind>| {
        if !validate_solution(&inst, mutated).has(kind) {
            missed.push(kind);
        }
    };

    // everybody on board at once: load 4 on a 3-seat vehicle
    let mut stops: Vec<Stop> = (1..=n).map(Stop::pickup).collect();
    stops.extend((1..=n).map(Stop::dropoff));
    let times = vec![0.0; stops.len()];
    let crowded = Solution {
        tours: vec![Tour::new(stops)],
        schedules: vec![Schedule { start: times, excess: Default::default(), makespan: 0.0 }],
        accepted: (1..=n).collect(),
        objective: None,
    };
    check(ViolationKind::Capacity, &crowded, &mut missed);

    let mut unpaired = sol.clone();
    unpaired.tours[0].stops.pop();
    unpaired.schedules[0].start.pop();
    check(ViolationKind::Pairing, &unpaired, &mut missed);

    let mut swapped = sol.clone();
    let first = swapped.tours[0].stops[0].request;
    let d = swapped.tours[0].stops.iter().position(|s| *s == Stop::dropoff(first)).unwrap();
    swapped.tours[0].stops.swap(0, d);
    check(ViolationKind::Precedence, &swapped, &mut missed);

    let mut early = sol.clone();
    let e = inst.request(first).pickup.window.earliest;
    early.schedules[0].start[0] = e - 1.0;
    let report = validate_solution(&inst, &early);
    let magnitude = report.violations.iter().find(|v| v.kind == ViolationKind::Window).map(|v| v.magnitude);
    if !magnitude.is_some_and(|m| (m - 1.0).abs() < 1e-9) {
        missed.push(ViolationKind::Window);
    }

    let mut long_ride = sol.clone();
    let r = inst.request(first);
    long_ride.schedules[0].start[d] = long_ride.schedules[0].start[0] + r.service + r.max_ride + 5.0;
    check(ViolationKind::RideTime, &long_ride, &mut missed);

    let mut late = sol.clone();
    let last = late.schedules[0].start.len() - 1;
    late.schedules[0].start[last] = inst.depot.window.latest + 1.0;
    check(ViolationKind::Duration, &late, &mut missed);

    let singles: Vec<(Tour, Vec<f64>)> = (1..=n)
        .map(|i| {
            let t = Tour::new(vec![Stop::pickup(i), Stop::dropoff(i)]);
            let s = minimal_schedule(&t, &inst).unwrap();
            (t, s.start)
        })
        .collect();
    let spread = Solution::from_tours(&inst, singles).unwrap();
    check(ViolationKind::Fleet, &spread, &mut missed);

    if missed.is_empty() {
        Verdict::Pass("100 oracle solutions valid; all 7 mutation classes detected".into())
    } else {
        Verdict::Fail(format!("undetected mutations: {missed:?}"))
    }
}

fn component_bounds(oracle: &[Vec<Option<Solution>>]) -> Verdict {
    let idx = |k: ObjectiveKind| ObjectiveKind::ALL.iter().position(|&x| x == k).unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, sols) in oracle.iter().enumerate() {
        let (Some(c), Some(e), Some(ce)) = (&sols[idx(ObjectiveKind::Cost)], &sols[idx(ObjectiveKind::Excess)], &sols[idx(ObjectiveKind::CostExcess)])
        else {
            continue;
        };
        let (c, e, ce) = (c.objective.unwrap(), e.objective.unwrap(), ce.objective.unwrap());
        checked += 1;
        if c.f_c > ce.f_c + BOUND_SLACK {
            bad.push(format!("instance {k}: cost optimum {} > {}", c.f_c, ce.f_c));
        }
        if e.f_e > ce.f_e + BOUND_SLACK {
            bad.push(format!("instance {k}: excess optimum {} > {}", e.f_e, ce.f_e));
        }
    }
    if checked == 0 {
        return Verdict::Fail("no feasible instance".into());
    }
    if bad.is_empty() {
        Verdict::Pass(format!("{checked} instances satisfy both bounds"))
    } else {
        Verdict::Fail(bad.join("; "))
    }
}

fn max_feasible_acceptance(inst: &Instance) -> usize {
    let n = inst.n() as u32;
    let mut best = 0;
    for mask in 1u32..(1 << n) {
        let ids: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        if ids.len() <= best {
            continue;
        }
        let sub = inst.restrict(&ids).unwrap();
        if oracle_value(&sub, ObjectiveKind::Cost).is_some() {
            best = ids.len();
        }
    }
    best
}

fn denial_monotonicity() -> Verdict {
    let gammas = [0.01, 1.0, 60.0, 1e6];
    let mut bad = Vec::new();
    let mut denied_somewhere = 0;
    for (k, inst) in common::denial_instances(20).iter().enumerate() {
        let counts: Vec<usize> = gammas
            .iter()
            .map(|&gamma| {
                let obj = ObjectiveSpec { gamma, ..ObjectiveSpec::new(ObjectiveKind::RequestCostExcess, inst.n()) };
                oracle_solve(inst, &obj, true, 6).unwrap().accepted.len()
            })
            .collect();
        if counts.windows(2).any(|w| w[1] < w[0]) {
            bad.push(format!("instance {k}: accepted {counts:?}"));
        }
        let best = max_feasible_acceptance(inst);
        if counts[3] != best {
            bad.push(format!("instance {k}: {} accepted at gamma 1e6, {best} feasible", counts[3]));
        }
        if counts[3] < inst.n() {
            denied_somewhere += 1;
        }
    }
    if bad.is_empty() {
        Verdict::Pass(format!("20 instances monotone, maximal at 1e6 ({denied_somewhere} cannot serve everyone)"))
    } else {
        Verdict::Fail(bad.join("; "))
    }
}

#[test]
fn acceptance() {
    let mut report = Report { lines: Vec::new() };
    report.record(1, "graph counts vs closed forms", graph_counts());
    report.record(2, "example graph reconstruction", example_one_graph());

    let instances = common::cross_check_instances();
    let graphs: Vec<Arc<EventGraph>> = instances.iter().map(|(_, i)| Arc::new(EventGraph::build(i))).collect();
    let oracle: Vec<Vec<Option<Solution>>> = instances
        .iter()
        .map(|(_, inst)| ObjectiveKind::ALL.iter().map(|&k| oracle_value(inst, k)).collect())
        .collect();

    let solver = common::milp_solver();
    let dir = tempfile::tempdir().unwrap();
    match &solver {
        Some(cmd) => {
            let runs = solve_all(cmd, dir.path(), &instances, &graphs);
            report.record(3, "oracle equals MILP optimum", oracle_vs_milp(&runs, &oracle));
            report.record(4, "model2 equals model3 optimum", model2_vs_model3(&runs));
        }
        None => {
            report.record(3, "oracle equals MILP optimum", Verdict::Skip("no external MILP solver".into()));
            report.record(4, "model2 equals model3 optimum", Verdict::Skip("no external MILP solver".into()));
        }
    }
    report.record(5, "benchmark reproduction", benchmarks(solver.as_deref(), dir.path()));
    report.record(6, "validator soundness", validator_soundness());
    report.record(7, "weighted-sum component bounds", component_bounds(&oracle));
    report.record(8, "denial monotonicity", denial_monotonicity());

    let failed: Vec<usize> = report.lines.iter().filter(|l| matches!(l.2, Verdict::Fail(_))).map(|l| l.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
