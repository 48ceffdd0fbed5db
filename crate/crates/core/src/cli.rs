//! Command-line front end. Exit codes: 0 success, 2 usage error, 3 domain or
//! capacity error, 4 verification failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::asymptotics::{clt_target, darboux_expectation, mgf_normalized, MgfSource};
use crate::enumerate::{default_workers, enumerate_distribution_with, enumeration_cap, EnumOptions};
use crate::error::{LabError, Result};
use crate::fmt17;
use crate::manifest::RunManifest;
use crate::montecarlo::{run_simulation_with_budget, SimulationConfig, DEFAULT_OP_BUDGET};
use crate::perm::{PermStats, Permutation};
use crate::series::{h_series, h_series_with, SeriesOptions, DEFAULT_ORDER};
use crate::verify::{Level, Verifier};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ilis-lab", version, about = "Cycle ILIS statistics of random permutations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact distribution of s_n by visiting all of S_n
    Enumerate(EnumerateArgs),
    /// Coefficients of H(x, y) at a fixed y
    Series(SeriesArgs),
    /// Leading asymptotic of E(y^s_n) against series coefficients
    Asym(AsymArgs),
    /// Moment generating function of the normalized statistic
    Mgf(MgfArgs),
    /// Monte Carlo simulation of s_n
    Simulate(SimulateArgs),
    /// Statistics of a single permutation given in one-line form
    Stats(StatsArgs),
    /// Run the cross-validation matrix
    Verify(VerifyArgs),
}

#[derive(Debug, Args, serde::Serialize)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write JSON here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SeriesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Materialize H outside |y - 1| < e^-2 (no validity claimed there)
    #[arg(long)]
    pub allow_outside_window: bool,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct AsymArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 1.05])]
    pub y: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_values_t = [64, 256, 1024, 4096])]
    pub n: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct MgfArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.5, 0.5])]
    pub t: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_count,
        default_values_t = [1_000, 10_000, 100_000, 1_000_000, 10_000_000]
    )]
    pub n: Vec<u64>,
    #[arg(long, value_enum, default_value_t = MgfSource::Darboux)]
    #[serde(skip)]
    pub source: MgfSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    #[arg(long, value_parser = parse_count)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON report path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Rows "s_normalized,empirical_cdf,normal_cdf"
    #[arg(long)]
    pub cdf_csv: Option<PathBuf>,
    /// Largest n * samples accepted
    #[arg(long, default_value_t = DEFAULT_OP_BUDGET)]
    pub budget: u128,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct StatsArgs {
    /// Comma-separated one-line form, e.g. 1,3,5,4,7,6,2
    pub permutation: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Accepts plain integers and integral scientific notation such as `1e7`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("{s:?} is not a nonnegative integer")),
    }
}

fn emit(out: Option<&Path>, body: &str, manifest: RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            manifest.finish().write_sidecar(path)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn flags<T: serde::Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<i32> {
    let manifest = RunManifest::start("enumerate", flags(args), None);
    let opts = EnumOptions {
        cap: enumeration_cap(),
        workers: args.workers.unwrap_or_else(default_workers),
    };
    let dist = enumerate_distribution_with(args.n, opts)?;
    emit(args.out.as_deref(), &(dist.to_json()? + "\n"), manifest)?;
    Ok(EXIT_OK)
}

fn cmd_series(args: &SeriesArgs) -> Result<i32> {
    let manifest = RunManifest::start("series", flags(args), None);
    let opts = SeriesOptions {
        allow_outside_window: args.allow_outside_window,
    };
    let series = h_series_with(args.y, args.order, opts)?;
    emit(args.out.as_deref(), &series.to_csv(), manifest)?;
    Ok(EXIT_OK)
}

const GRID_HEADER: &str = "n,y_or_t,value,reference,abs_error\n";

fn grid_row(out: &mut String, n: u64, param: f64, value: f64, reference: f64) {
    let _ = writeln!(
        out,
        "{n},{},{},{},{}",
        fmt17(param),
        fmt17(value),
        fmt17(reference),
        fmt17((value - reference).abs())
    );
}

fn cmd_asym(args: &AsymArgs) -> Result<i32> {
    let manifest = RunManifest::start("asym", flags(args), None);
    let top = args.n.iter().copied().max().unwrap_or(1).max(1) as usize;
    let mut body = String::from(GRID_HEADER);
    for &y in &args.y {
        let series = h_series(y, top)?;
        for &n in &args.n {
            let value = darboux_expectation(y, n)?;
            grid_row(&mut body, n, y, value, series.coeff(n as usize));
        }
    }
    emit(args.out.as_deref(), &body, manifest)?;
    Ok(EXIT_OK)
}

fn cmd_mgf(args: &MgfArgs) -> Result<i32> {
    let mut fl = flags(args);
    fl["source"] = json!(format!("{:?}", args.source).to_lowercase());
    let manifest = RunManifest::start("mgf", fl, None);
    let mut body = String::from(GRID_HEADER);
    for &t in &args.t {
        for &n in &args.n {
            let value = mgf_normalized(n, t, args.source)?;
            grid_row(&mut body, n, t, value, clt_target(t));
        }
    }
    emit(args.out.as_deref(), &body, manifest)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let manifest = RunManifest::start("simulate", flags(args), Some(args.seed));
    let cfg = SimulationConfig {
        n: usize::try_from(args.n).map_err(|_| LabError::invalid("n too large"))?,
        samples: args.samples,
        seed: args.seed,
        workers: args.workers.unwrap_or_else(default_workers),
    };
    let report = run_simulation_with_budget(&cfg, args.budget)?;
    if let Some(path) = &args.cdf_csv {
        std::fs::write(path, report.cdf_csv()?)?;
        manifest.clone().finish().write_sidecar(path)?;
    }
    emit(args.out.as_deref(), &(report.to_json()? + "\n"), manifest)?;
    Ok(EXIT_OK)
}

fn cmd_stats(args: &StatsArgs) -> Result<i32> {
    let p: Permutation = args.permutation.parse()?;
    println!("{}", serde_json::to_string(&PermStats::of(&p))?);
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let verifier = Verifier::new(args.level, args.workers.unwrap_or_else(default_workers));
    let checks = verifier.run();
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(EXIT_OK)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(EXIT_VERIFY)
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Series(a) => cmd_series(a),
        Command::Asym(a) => cmd_asym(a),
        Command::Mgf(a) => cmd_mgf(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e7"), Ok(10_000_000));
        assert_eq!(parse_count("4096"), Ok(4096));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["ilis-lab", "enumerate"]), EXIT_USAGE);
        assert_eq!(run(["ilis-lab", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["ilis-lab", "verify", "--level", "medium"]), EXIT_USAGE);
    }

    #[test]
    fn domain_errors_exit_three() {
        assert_eq!(run(["ilis-lab", "stats", "1,1,2"]), EXIT_DOMAIN);
        assert_eq!(run(["ilis-lab", "series", "--y", "1.5"]), EXIT_DOMAIN);
        assert_eq!(run(["ilis-lab", "mgf", "--n", "8", "--t", "1"]), EXIT_DOMAIN);
    }
}
