use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use deconflict_core::bench::{run_bench, BenchConfig, Manifest};
use deconflict_core::geometry::is_feasible;
use deconflict_core::instance::{instance_file_name, read_instance, write_instance};
use deconflict_core::model::{build_m1, build_m2, export_model, model_file_name, Formulation, ModelFormat};
use deconflict_core::plot::plot_svg;
use deconflict_core::solver::{BranchingRule, SolveResult, SolveStatus};
use deconflict_core::terms::compute_bigm_all;
use deconflict_core::{
    gen_cp, gen_rcp, oracle_verify, solve, CpConfig, HeadingVector, Instance, OracleConfig, RcpConfig, SolverConfig,
};

/// Exit status for an infeasible instance or a solution that fails verification.
const EXIT_FAILED: u8 = 1;
/// Exit status for bad arguments or unreadable inputs.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "deconflict",
    version,
    about = "Aircraft conflict resolution by heading deviations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write circle (cp) or randomised circle (rcp) instances.
    Generate(GenerateArgs),
    /// Check a deviation vector with the closed form and the simulation oracle.
    Check(CheckArgs),
    /// Export the original (m1) or separable (m2) model.
    BuildModel(BuildModelArgs),
    /// Solve an instance to global optimality.
    Solve(SolveArgs),
    /// Solve every entry of a manifest and write a CSV report.
    Bench(BenchArgs),
    /// Draw trajectories as SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cp,
    Rcp,
}

#[derive(Args)]
struct GenerateArgs {
    family: Family,
    #[arg(short, long)]
    n: usize,
    /// First RCP seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive RCP seeds.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    speed: Option<f64>,
    /// Safety distance.
    #[arg(short, long)]
    d: Option<f64>,
    /// Deviation bound in radians.
    #[arg(long)]
    theta_bound: Option<f64>,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

/// A deviation vector given inline or through a solve result file.
#[derive(Args)]
struct ThetaArgs {
    /// Comma-separated deviations in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "solution")]
    theta: Option<String>,
    /// JSON result written by `solve`.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    #[command(flatten)]
    theta: ThetaArgs,
    /// Oracle tolerance; defaults to 1e-4 d.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    M1,
    M2,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::M1 => Formulation::M1,
            FormulationArg::M2 => Formulation::M2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Ampl,
    Json,
}

#[derive(Args)]
struct BuildModelArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = FormulationArg::M2)]
    formulation: FormulationArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Ampl)]
    format: FormatArg,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    /// Time limit in seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1e-6)]
    abs_gap: f64,
    #[arg(long, default_value_t = 1e-6)]
    rel_gap: f64,
    #[arg(long, default_value_t = 1e-6)]
    feas_tol: f64,
    /// `widest` or `widest-undecided`.
    #[arg(long, default_value = "widest")]
    branching: String,
    #[arg(long, default_value_t = 16)]
    multistart: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "DECONFLICT_WORKERS", default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    node_limit: Option<u64>,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            time_limit_s: self.time_limit,
            abs_gap: self.abs_gap,
            rel_gap: self.rel_gap,
            feas_tol: self.feas_tol,
            branching: self.branching.parse::<BranchingRule>()?,
            multistart: self.multistart,
            seed: self.seed,
            workers: self.workers,
            node_limit: self.node_limit,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the full result as JSON.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    manifest: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = FormulationArg::M2)]
    formulation: FormulationArg,
    /// CSV report; printed to stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Per-n summary CSV.
    #[arg(long)]
    aggregate: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    instance: PathBuf,
    #[command(flatten)]
    theta: ThetaArgs,
    #[arg(short, long)]
    out: PathBuf,
}

/// Failure that maps to a specific exit status.
#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Check(a) => check(a),
        Command::BuildModel(a) => build_model(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Plot(a) => plot(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Failed>() => {
            eprintln!("{e}");
            ExitCode::from(EXIT_FAILED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load(path: &Path) -> Result<Instance> {
    read_instance(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut cp = CpConfig::with_n(a.n);
    if let Some(r) = a.radius {
        cp.radius = r;
    }
    if let Some(s) = a.speed {
        cp.speed = s;
    }
    if let Some(d) = a.d {
        cp.d = d;
    }
    if let Some(t) = a.theta_bound {
        cp.theta_bound = t;
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let instances = match a.family {
        Family::Cp => vec![gen_cp(&cp)?],
        Family::Rcp => (a.seed..a.seed + a.count)
            .map(|seed| {
                gen_rcp(&RcpConfig {
                    cp,
                    seed,
                    ..RcpConfig::default()
                })
            })
            .collect::<std::result::Result<_, _>>()?,
    };
    for inst in instances {
        let path = a.out.join(instance_file_name(&inst));
        write_instance(&inst, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn theta_for(inst: &Instance, args: &ThetaArgs) -> Result<HeadingVector> {
    let theta = match (&args.theta, &args.solution) {
        (Some(text), _) => HeadingVector(
            text.split(',')
                .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad deviation `{t}`")))
                .collect::<Result<_>>()?,
        ),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let res: SolveResult =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            match res.theta {
                Some(t) => t,
                None => bail!("{} holds no solution (status {})", path.display(), res.status),
            }
        }
        (None, None) => inst.zero_heading(),
    };
    theta.check_bounds(inst)?;
    Ok(theta)
}

fn check(a: CheckArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let theta = theta_for(&inst, &a.theta)?;
    let report = is_feasible(&inst, &theta)?;
    let mut cfg = OracleConfig::for_instance(&inst, &theta)?;
    if let Some(tol) = a.tolerance {
        cfg.tolerance = tol;
    }
    let oracle = oracle_verify(&inst, &theta, &cfg)?;
    println!("objective {:.9e}", theta.objective());
    println!("closed-form: {}", if report.feasible { "feasible" } else { "conflict" });
    for v in &report.violations {
        println!(
            "  conflict {}-{}: miss distance {:.6} at t = {:.6}",
            v.i + 1,
            v.j + 1,
            v.miss_distance,
            v.t_min
        );
    }
    println!(
        "oracle: {} (min distance {:.6}, tolerance {:.3e})",
        if oracle.pass { "pass" } else { "fail" },
        oracle.min_distance(),
        cfg.tolerance
    );
    if report.feasible && oracle.pass {
        Ok(())
    } else {
        Err(Failed("verification failed".into()).into())
    }
}

fn build_model(a: BuildModelArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let model = match Formulation::from(a.formulation) {
        Formulation::M1 => build_m1(&inst),
        Formulation::M2 => build_m2(&inst, &compute_bigm_all(&inst))?,
    };
    let format = match a.format {
        FormatArg::Ampl => ModelFormat::Ampl,
        FormatArg::Json => ModelFormat::Json,
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let path = a.out.join(model_file_name(&model, format));
    write(&path, &export_model(&model, format)?)?;
    println!("{}", path.display());
    Ok(())
}

fn solve_cmd(a: SolveArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let res = solve(&inst, &a.solver.config()?)?;
    println!("instance {}", res.instance_id);
    println!("status   {}", res.status);
    match res.primal {
        Some(p) => println!("primal   {p:.9e}"),
        None => println!("primal   -"),
    }
    println!("dual     {:.9e}", res.dual);
    println!("nodes    {}", res.nodes);
    println!("time     {:.3}s", res.time_s);
    if let Some(theta) = &res.theta {
        let list: Vec<String> = theta.0.iter().map(|t| format!("{t:.9}")).collect();
        println!("theta    {}", list.join(","));
    }
    if let Some(path) = &a.out {
        write(path, &format!("{}\n", serde_json::to_string_pretty(&res)?))?;
    }
    match res.status {
        SolveStatus::Optimal | SolveStatus::Feasible => Ok(()),
        SolveStatus::Infeasible | SolveStatus::Unknown => {
            Err(Failed(format!("no feasible solution ({})", res.status)).into())
        }
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let manifest = Manifest::read(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let cfg = BenchConfig {
        solver: a.solver.config()?,
        formulation: a.formulation.into(),
    };
    let report = run_bench(&manifest, &cfg);
    match &a.out {
        Some(path) => write(path, &report.to_csv())?,
        None => print!("{}", report.to_csv()),
    }
    if let Some(path) = &a.aggregate {
        write(path, &report.aggregate_csv())?;
    }
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", row.id, row.error.as_deref().unwrap_or_default());
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let inst = load(&a.instance)?;
    let theta = theta_for(&inst, &a.theta)?;
    write(&a.out, &plot_svg(&inst, &theta)?)?;
    Ok(())
}
