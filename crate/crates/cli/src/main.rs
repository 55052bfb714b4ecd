mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use evdarp::instance::{generate_synthetic, parse_cordeau, tighten_time_windows};
use evdarp::solve::parse_assignment;
use evdarp::{
    build_model, evaluate_objective, import_solution, oracle_solve, validate_solution, write_lp, write_mps, Error,
    EventGraph, GeneratorConfig, Instance, ModelMapping, ModelVariant, ObjectiveKind, ObjectiveSpec, Solution,
    ValidationReport,
};
use log::{info, warn};
use manifest::{sibling, timed, RunManifest};

#[derive(Parser)]
#[command(name = "evdarp", version, about = "Event-graph dial-a-ride models, oracle and validator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a benchmark or instance file and write normalized instance JSON.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Classify requests and tighten the trivial window of each.
        #[arg(long)]
        tighten: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Event graph size report and optional DOT drawing.
    Graph {
        instance: PathBuf,
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Write a MILP model as MPS (or LP when the output ends in .lp) plus a mapping sidecar.
    Model {
        instance: PathBuf,
        #[arg(long, default_value = "model3")]
        variant: ModelVariant,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve exactly with the oracle, or decode a solver assignment.
    Solve {
        instance: PathBuf,
        #[arg(long, conflicts_with = "import", required_unless_present = "import")]
        oracle: bool,
        #[arg(long, default_value_t = evdarp::solve::DEFAULT_ORACLE_LIMIT)]
        limit: usize,
        /// `name value` assignment written by an external solver.
        #[arg(long, requires = "mapping")]
        import: Option<PathBuf>,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Synthetic instance from the seeded generator.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = ["3", "6"])]
        q: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Percent change of each objective component from solution A to B.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum InputFormat {
    Cordeau,
    Json,
}

#[derive(Args)]
struct ObjectiveArgs {
    #[arg(long, default_value = "cost")]
    objective: ObjectiveKind,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Let requests go unserved; required by `rce`.
    #[arg(long)]
    allow_denial: bool,
}

impl ObjectiveArgs {
    fn spec(&self, n: usize) -> ObjectiveSpec {
        let d = ObjectiveSpec::new(self.objective, n);
        ObjectiveSpec {
            kind: self.objective,
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            gamma: self.gamma.unwrap_or(d.gamma),
        }
    }

    fn record(&self, m: &mut RunManifest, spec: &ObjectiveSpec) {
        m.arg("objective", self.objective.to_string()).arg("allow_denial", self.allow_denial);
        m.arg("alpha", self.alpha).arg("beta", self.beta).arg("gamma", self.gamma);
        m.detail("weights", format!("alpha={} beta={} gamma={}", spec.alpha, spec.beta, spec.gamma));
    }
}

/// Exit 1: the run worked but the answer is "no" (infeasible, invalid).
#[derive(Debug)]
struct Rejected(String);

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Rejected>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible(_) | Error::InvalidSolution(_)) => 1,
        _ => 2,
    }
}

fn load_instance(m: &mut RunManifest, path: &Path, format: Option<InputFormat>) -> Result<Instance> {
    let start = Instant::now();
    let text = m.read_input(path)?;
    let format = format.unwrap_or(if text.trim_start().starts_with('{') { InputFormat::Json } else { InputFormat::Cordeau });
    let inst = match format {
        InputFormat::Json => Instance::from_json(&text),
        InputFormat::Cordeau => parse_cordeau(&text),
    };
    m.timings.parse = Some(start.elapsed().as_secs_f64());
    inst.with_context(|| format!("reading {}", path.display()))
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn print_report(report: &ValidationReport) {
    if report.ok {
        println!("validation: ok");
        return;
    }
    println!("validation: {} violation(s)", report.violations.len());
    for v in &report.violations {
        println!("  {}: {} (magnitude {})", v.kind, v.detail, v.magnitude);
    }
}

fn convert(input: &Path, format: Option<InputFormat>, tighten: bool, output: &Path) -> Result<()> {
    let mut m = RunManifest::new("convert");
    m.arg("input", input.display().to_string()).arg("tighten", tighten);
    m.arg("format", format.map(|f| if f == InputFormat::Json { "json" } else { "cordeau" }));
    let mut inst = load_instance(&mut m, input, format)?;
    if tighten {
        inst = timed(&mut m.timings.build, || tighten_time_windows(&inst))?;
    }
    m.detail("requests", inst.n()).detail("fleet_size", inst.fleet_size).detail("capacity", inst.capacity);
    m.write_output(output, &(inst.to_json() + "\n"))?;
    m.finish(output)?;
    println!("requests: {}", inst.n());
    Ok(())
}

fn graph(instance: &Path, stats: bool, dot: Option<&Path>) -> Result<()> {
    let mut m = RunManifest::new("graph");
    m.arg("instance", instance.display().to_string()).arg("stats", stats);
    m.arg("dot", dot.map(|p| p.display().to_string()));
    let inst = load_instance(&mut m, instance, None)?;
    let g = timed(&mut m.timings.build, || EventGraph::build(&inst));
    let s = g.stats();
    if stats || dot.is_none() {
        println!("nodes: {}, arcs: {}", s.nodes, s.arcs);
        print!("{s}");
    }
    if let Some(path) = dot {
        m.detail("stats", &s);
        let text = timed(&mut m.timings.emit, || g.to_dot());
        m.write_output(path, &text)?;
        m.finish(path)?;
    }
    Ok(())
}

fn model(instance: &Path, variant: ModelVariant, obj: &ObjectiveArgs, output: &Path) -> Result<()> {
    let mut m = RunManifest::new("model");
    m.arg("instance", instance.display().to_string()).arg("variant", variant.to_string());
    let inst = load_instance(&mut m, instance, None)?;
    let spec = obj.spec(inst.n());
    obj.record(&mut m, &spec);
    if spec.kind.penalizes_denial() && !obj.allow_denial {
        bail!(Error::Model("objective rce charges denied requests; pass --allow-denial to enable them".into()));
    }
    let g = timed(&mut m.timings.build, || Arc::new(EventGraph::build(&inst)));
    let model = timed(&mut m.timings.build, || build_model(g, variant, spec, obj.allow_denial))?;
    let name = instance_name(instance);
    let is_lp = output.extension().is_some_and(|e| e == "lp");
    let text = timed(&mut m.timings.emit, || if is_lp { write_lp(&model, &name) } else { write_mps(&model, &name) });
    m.write_output(output, &text)?;
    let mapping = sibling(output, "mapping.json");
    m.write_output(&mapping, &(serde_json::to_string_pretty(&model.mapping())? + "\n"))?;
    m.detail("census", model.census()).detail("objective_offset", model.objective_offset());
    m.finish(output)?;
    let c = model.census();
    println!("columns: {}, binaries: {}, rows: {}", c.columns, c.binaries, c.rows);
    Ok(())
}

fn solve(
    instance: &Path,
    limit: usize,
    import: Option<&Path>,
    mapping: Option<&Path>,
    obj: &ObjectiveArgs,
    output: &Path,
) -> Result<()> {
    let mut m = RunManifest::new("solve");
    m.arg("instance", instance.display().to_string());
    let inst = load_instance(&mut m, instance, None)?;
    let (sol, spec) = match (import, mapping) {
        (Some(assignment), Some(mapping)) => {
            m.arg("import", assignment.display().to_string()).arg("mapping", mapping.display().to_string());
            let map: ModelMapping = serde_json::from_str(&m.read_input(mapping)?)
                .with_context(|| format!("reading {}", mapping.display()))?;
            let text = m.read_input(assignment)?;
            let (values, claimed) = parse_assignment(&text).with_context(|| format!("reading {}", assignment.display()))?;
            let g = Arc::new(EventGraph::build(&inst));
            let model = timed(&mut m.timings.build, || build_model(g, map.variant, map.objective, map.allow_denial))?;
            if model.mapping() != map {
                bail!(Error::Import(format!("{} does not describe this instance", mapping.display())));
            }
            let out = timed(&mut m.timings.solve, || import_solution(&model, &values, claimed))?;
            if let Some(gap) = out.discrepancy {
                warn!("solver objective {:?} differs from recomputed {} by {gap}", out.claimed, out.recomputed.total);
                m.detail("objective_discrepancy", gap);
            }
            m.detail("claimed_objective", out.claimed);
            (out.solution, map.objective)
        }
        _ => {
            let spec = obj.spec(inst.n());
            obj.record(&mut m, &spec);
            m.arg("oracle", true).arg("limit", limit);
            let sol = timed(&mut m.timings.solve, || oracle_solve(&inst, &spec, obj.allow_denial, limit))?;
            (sol, spec)
        }
    };
    let mut sol = sol;
    let values = evaluate_objective(&inst, &sol, &spec)?;
    sol.objective = Some(values);
    let report = validate_solution(&inst, &sol);
    m.detail("objective", values).detail("validation", &report);
    m.write_output(output, &(sol.to_json() + "\n"))?;
    m.finish(output)?;
    println!(
        "objective {}: {} (f_c {}, f_e {}, f_emax {}, denied {})",
        spec.kind, values.total, values.f_c, values.f_e, values.f_emax, values.f_n
    );
    println!("tours: {}", sol.tours.len());
    print_report(&report);
    if !report.ok {
        return Err(Rejected("solution failed validation".into()).into());
    }
    Ok(())
}

fn generate(n: usize, q: u32, seed: u64, output: &Path) -> Result<()> {
    let mut m = RunManifest::new("generate");
    m.arg("n", n).arg("q", q).arg("seed", seed);
    m.seed = Some(seed);
    let inst = timed(&mut m.timings.build, || generate_synthetic(&GeneratorConfig::new(n, q, seed)))?;
    m.detail("fleet_size", inst.fleet_size).detail("capacity", inst.capacity);
    m.write_output(output, &(inst.to_json() + "\n"))?;
    m.finish(output)?;
    info!("wrote {n} requests, fleet {}", inst.fleet_size);
    println!("fleet_size: {}", inst.fleet_size);
    Ok(())
}

/// Signed percent change `100 (b - a) / a`, rounded; `None` when `a` is zero
/// and `b` is not.
fn percent_change(a: f64, b: f64) -> Option<i64> {
    if a.abs() < 1e-12 {
        return (b.abs() < 1e-12).then_some(0);
    }
    Some((100.0 * (b - a) / a).round() as i64)
}

fn compare(instance: &Path, a: &Path, b: &Path, output: Option<&Path>) -> Result<()> {
    let mut m = RunManifest::new("compare");
    m.arg("instance", instance.display().to_string());
    m.arg("a", a.display().to_string()).arg("b", b.display().to_string());
    let inst = load_instance(&mut m, instance, None)?;
    let spec = ObjectiveSpec::new(ObjectiveKind::CostExcess, inst.n());
    let mut rows = Vec::new();
    let mut sides = Vec::new();
    for path in [a, b] {
        let sol = Solution::from_json(&m.read_input(path)?, &inst).with_context(|| format!("reading {}", path.display()))?;
        let v = evaluate_objective(&inst, &sol, &spec)?;
        sides.push([v.f_c, v.f_e, v.f_emax, sol.accepted.len() as f64 / inst.n().max(1) as f64]);
    }
    println!("{:<8} {:>12} {:>12} {:>8}", "", "A", "B", "delta%");
    for (k, label) in ["f_c", "f_e", "f_emax", "a.r."].into_iter().enumerate() {
        let (x, y) = (sides[0][k], sides[1][k]);
        let delta = percent_change(x, y);
        let shown = delta.map_or_else(|| "n/a".to_string(), |d| d.to_string());
        println!("{label:<8} {x:>12.4} {y:>12.4} {shown:>8}");
        rows.push(serde_json::json!({"component": label, "a": x, "b": y, "delta_percent": delta}));
    }
    if let Some(path) = output {
        m.write_output(path, &(serde_json::to_string_pretty(&rows)? + "\n"))?;
        m.finish(path)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert { input, format, tighten, output } => convert(&input, format, tighten, &output),
        Command::Graph { instance, stats, dot } => graph(&instance, stats, dot.as_deref()),
        Command::Model { instance, variant, objective, output } => model(&instance, variant, &objective, &output),
        Command::Solve { instance, oracle: _, limit, import, mapping, objective, output } => {
            solve(&instance, limit, import.as_deref(), mapping.as_deref(), &objective, &output)
        }
        Command::Generate { n, q, seed, output } => {
            generate(n, q.parse().map_err(|_| anyhow!("q must be 3 or 6"))?, seed, &output)
        }
        Command::Compare { instance, a, b, output } => compare(&instance, &a, &b, output.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
