//! `mdest` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 solver failure,
//! 4 invariant violation.

mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdest::mdgeom::json::read_domain;
use mdest::mdgrid::io::write_bundle;
use mdest::mdsolve::{build_projection_caches, SolverOptions};
use mdest::pipeline::{compare_matching_nonmatching, perturbation_sweep, PipelineOptions, RunResult};
use mdest::report::{deviation_csv, detail_json, indicator_csv, majorant_csv};
use mdest::scenarios::{scenario_by_name, ReferenceKind, Scenario, SCENARIO_NAMES};
use mdest::Error;

#[derive(Parser, Debug)]
#[command(name = "mdest", version, about = "Guaranteed error majorants for mixed-dimensional Darcy flow on non-matching grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve, reconstruct and estimate for each mesh size.
    Run(RunArgs),
    /// Run matching and perturbed configurations and report deviations.
    Compare(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Bundled scenario name.
    #[arg(long, conflicts_with = "domain_spec")]
    scenario: Option<String>,
    /// JSON domain description.
    #[arg(long, value_name = "PATH")]
    domain_spec: Option<PathBuf>,
    /// Mesh sizes, positive and strictly decreasing.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    h: Vec<f64>,
    /// Add the two perturbed non-matching configurations.
    #[arg(long)]
    perturb: bool,
    /// Run the projection property checks and exit.
    #[arg(long)]
    check_projections: bool,
    /// Write transfer grids with parent tags (requires --out).
    #[arg(long, requires = "out")]
    dump_transfer: bool,
    /// Write every grid of every run (requires --out).
    #[arg(long, requires = "out")]
    mesh_out: bool,
    #[arg(long)]
    solver_tol: Option<f64>,
    #[arg(long)]
    dense_threshold: Option<usize>,
    /// Directory for report files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Format of the table printed on stdout.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum Failure {
    Config(String),
    Solver(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Invariant(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::SingularSystem(_) | Error::SingularMassMatrix { .. } => Failure::Solver(msg),
            Error::CoverageMismatch { .. }
            | Error::DegenerateClip { .. }
            | Error::OutOfDomain
            | Error::GridMismatch(_)
            | Error::InconsistentBundle(_)
            | Error::OutOfCell { .. }
            | Error::MissingReference => Failure::Invariant(msg),
            _ => Failure::Config(msg),
        }
    }
}

const USAGE: &str = "usage: mdest run --scenario <NAME> | --domain-spec <PATH> [--h LIST] [--perturb] [--out DIR]";

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("mdest: {}", f.message());
        return ExitCode::from(f.code());
    }
    let result = match &cli.command {
        Command::Run(a) => run(a, false),
        Command::Compare(a) => run(a, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mdest: {}", f.message());
            if matches!(f, Failure::Config(_)) {
                eprintln!("{USAGE}");
            }
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("MDEST_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("MDEST_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn check_sizes(h: &[f64]) -> Result<(), Failure> {
    if let Some(x) = h.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Failure::Config(format!("mesh size {x} is not positive")));
    }
    if h.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::Config("mesh sizes must be strictly decreasing".into()));
    }
    Ok(())
}

fn load_scenario(a: &RunArgs) -> Result<Scenario<f64>, Failure> {
    match (&a.scenario, &a.domain_spec) {
        (Some(name), None) => Ok(scenario_by_name(name)?),
        (None, Some(path)) => {
            let domain = read_domain::<f64>(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let has_fracture = (0..domain.n_subdomains()).any(|i| domain.subdomain(i).geometry.dim() == 1);
            Ok(Scenario {
                name: path.file_stem().and_then(|s| s.to_str()).unwrap_or("domain").to_string(),
                domain,
                mesh_sizes: vec![0.125, 0.0625, 0.03125],
                perturbations: if has_fracture { vec![1.0, -1.0] } else { Vec::new() },
                reference: ReferenceKind::None,
                analytic: None,
                fixture: "",
            })
        }
        _ => Err(Failure::Config(format!(
            "give either --scenario ({}) or --domain-spec",
            SCENARIO_NAMES.join(", ")
        ))),
    }
}

fn write(dir: &Path, file: String, text: &str) -> Result<(), Failure> {
    std::fs::write(dir.join(&file), text).map_err(|e| Failure::Config(format!("cannot write {file}: {e}")))
}

fn dump_grids(dir: &Path, sc: &Scenario<f64>, runs: &[RunResult<f64>], mesh: bool, transfer: bool) -> Result<(), Failure> {
    for r in runs {
        let tag = format!("{}_h{}_{}", sc.name, r.h, r.config.label());
        if mesh {
            write_bundle(&r.bundle, &dir.join(format!("{tag}_mesh.json")))?;
        }
        if transfer {
            let caches = build_projection_caches(&sc.domain, &r.bundle)?;
            let dumps: Vec<serde_json::Value> = caches
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "interface": c.interface,
                        "hi": c.transfer_hi.to_json(),
                        "lo": c.transfer_lo.to_json(),
                    })
                })
                .collect();
            let text = serde_json::to_string(&dumps).map_err(Error::from)?;
            write(dir, format!("{tag}_transfer.json"), &text)?;
        }
    }
    Ok(())
}

fn run(a: &RunArgs, compare: bool) -> Result<(), Failure> {
    if a.check_projections {
        return check_projections();
    }
    let sc = load_scenario(a)?;
    let sizes = if a.h.is_empty() { sc.mesh_sizes.clone() } else { a.h.clone() };
    check_sizes(&sizes)?;
    let mut opts = PipelineOptions::<f64>::default();
    let defaults = SolverOptions::<f64>::default();
    opts.solver.tol = a.solver_tol.unwrap_or(defaults.tol);
    opts.solver.dense_threshold = a.dense_threshold.unwrap_or(defaults.dense_threshold);
    if !opts.solver.tol.is_finite() || opts.solver.tol <= 0.0 {
        return Err(Failure::Config("--solver-tol must be positive".into()));
    }

    let runs = perturbation_sweep(&sc, &sizes, a.perturb || compare, &opts)?;
    let deviations = if compare { Some(compare_matching_nonmatching(&runs)?) } else { None };

    let majorant = majorant_csv(&runs)?;
    let detail = detail_json(&runs)?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
        write(dir, format!("{}_majorant.csv", sc.name), &majorant)?;
        write(dir, format!("{}_indicators.csv", sc.name), &indicator_csv(&runs)?)?;
        write(dir, format!("{}_detail.json", sc.name), &detail)?;
        if let Some(d) = &deviations {
            write(dir, format!("{}_deviation.csv", sc.name), &deviation_csv(&sc.name, d)?)?;
        }
        dump_grids(dir, &sc, &runs, a.mesh_out, a.dump_transfer)?;
    }

    match (a.format, &deviations) {
        (Format::Json, _) => println!("{detail}"),
        (Format::Csv, Some(d)) => print!("{}", deviation_csv(&sc.name, d)?),
        (Format::Csv, None) => print!("{majorant}"),
    }

    let surrogate = matches!(sc.reference, ReferenceKind::Surrogate { .. });
    let violations: Vec<String> = runs.iter().flat_map(|r| r.violations(surrogate)).collect();
    if violations.is_empty() {
        Ok(())
    } else {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        Err(Failure::Invariant(format!("{} invariant violation(s)", violations.len())))
    }
}

fn check_projections() -> Result<(), Failure> {
    let checks = selftest::run_checks(20240917)?;
    let mut ok = true;
    for c in &checks {
        let tag = if c.passed() { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: worst {:.2e} (tolerance {:.0e}, {} cases)", c.name, c.worst, c.tol, c.cases);
        ok &= c.passed();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Invariant("projection self-test failed".into()))
    }
}
