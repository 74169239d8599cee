use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pnhier::dynamics::{integrate, write_trajectory_csv, IntegratorConfig, Monitor};
use pnhier::hierarchy::{Hierarchy, HierarchySpec};
use pnhier::report::CatalogSummary;
use pnhier::systems::{self, min_n, SYSTEM_IDS};
use pnhier::verify::{hierarchy_table, verify, VerifyConfig};
use pnhier::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "pnhier", version, about = "Numerical checks for Poisson–Nijenhuis hierarchies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the identity suite on seeded sample points
    Verify(VerifyArgs),
    /// Hamiltonians at the probe point and the ladder defect matrix
    Hierarchy(HierarchyArgs),
    /// Integrate a hierarchy flow from the probe point and write CSV
    Integrate(IntegrateArgs),
    /// List the catalog
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    system: String,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Lowest hierarchy index (default: per system)
    #[arg(long, allow_negative_numbers = true)]
    min_index: Option<i32>,
    /// Comma-separated check families (default: all)
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HierarchyArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Also write the table as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Rkf45,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Hierarchy index k of the flow π₀♯dĥ_k
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    flow: i32,
    #[arg(long = "t-end", default_value_t = 10.0)]
    t_end: f64,
    /// Fixed step for rk4, initial step for rkf45
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
    method: MethodArg,
    /// Absolute and relative tolerance for rkf45
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Monitor h_0..h_depth
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Record every k-th step
    #[arg(long, default_value_t = 1)]
    every: usize,
    /// CSV destination (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogArgs {
    /// Show one system only
    #[arg(long)]
    system: Option<String>,
    /// Size used for boxes (default: smallest valid)
    #[arg(long)]
    n: Option<usize>,
    /// Also write the listing as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Lib(Error),
    Io(PathBuf, io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

/// Writes to stdout; a closed pipe is not an error.
fn say(text: &str) -> Result<(), Failure> {
    match io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Io("<stdout>".into(), e)),
        _ => Ok(()),
    }
}

fn emit(out: &Option<PathBuf>, json: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, json),
        None => say(json),
    }
}

fn run_verify(a: VerifyArgs) -> Result<bool, Failure> {
    let cfg = VerifyConfig {
        samples: a.samples,
        seed: a.seed,
        tol: a.tol,
        depth: a.depth,
        min_index: a.min_index,
        checks: a.checks,
        ..VerifyConfig::new(a.sys.system, a.sys.n)
    };
    let report = verify(&cfg)?;
    match &a.out {
        Some(p) => {
            write_file(p, &report.to_json())?;
            say(&report.to_text())?;
        }
        None => say(&report.to_json())?,
    }
    Ok(report.all_pass)
}

fn run_hierarchy(a: HierarchyArgs) -> Result<bool, Failure> {
    let t = hierarchy_table(&a.sys.system, a.sys.n, a.depth)?;
    say(&t.to_text())?;
    if let Some(p) = &a.out {
        write_file(p, &t.to_json())?;
    }
    Ok(true)
}

fn run_integrate(a: IntegrateArgs) -> Result<bool, Failure> {
    let e = systems::build(&a.sys.system, a.sys.n)?;
    let depth = a.depth.max(a.flow.unsigned_abs() as usize).max(1);
    let hier = Hierarchy::build(HierarchySpec::new(e.pn.clone(), depth).with_negative(e.min_index))?;
    let flow = hier.flow(a.flow)?;
    let cfg = match a.method {
        MethodArg::Rk4 => IntegratorConfig::rk4(a.dt, a.t_end),
        MethodArg::Rkf45 => IntegratorConfig {
            dt: a.dt,
            ..IntegratorConfig::rkf45(a.tol, a.tol, a.t_end)
        },
    }
    .recording_every(a.every);
    let mut monitors = (0..=a.depth as i32)
        .map(|i| Ok(Monitor::Scalar(format!("h_{i}"), hier.h(i)?)))
        .collect::<pnhier::Result<Vec<_>>>()?;
    if let Some(l) = &e.lax {
        monitors.push(Monitor::Spectrum("eig".into(), l.clone()));
    }
    let traj = integrate(&flow, &e.pn.chart, &e.probe, &cfg, &monitors)?;
    if let Some(t) = &traj.truncated {
        log::warn!("trajectory stopped at t = {} ({})", t.t, t.exclusion);
    }
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &e.pn.chart, &traj)?;
    emit(&a.out, &String::from_utf8_lossy(&buf))?;
    Ok(true)
}

fn run_catalog(a: CatalogArgs) -> Result<bool, Failure> {
    let ids: Vec<&str> = match &a.system {
        Some(s) => vec![s.as_str()],
        None => SYSTEM_IDS.to_vec(),
    };
    let mut listing = Vec::new();
    for id in ids {
        let n = a.n.unwrap_or_else(|| min_n(id));
        let s = CatalogSummary::of(&systems::build(id, n)?);
        say(&s.to_text())?;
        listing.push(s);
    }
    if let Some(p) = &a.out {
        let json = serde_json::to_string_pretty(&listing).expect("listing serializes") + "\n";
        write_file(p, &json)?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Verify(a) => run_verify(a),
        Cmd::Hierarchy(a) => run_hierarchy(a),
        Cmd::Integrate(a) => run_integrate(a),
        Cmd::Catalog(a) => run_catalog(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Io(p, e)) => {
            eprintln!("error: {}: {e}", p.display());
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                Error::Config(_) | Error::UnknownSystem(_) | Error::Range { .. } => EXIT_USAGE,
                _ => EXIT_FAIL,
            })
        }
    }
}
