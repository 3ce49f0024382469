use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use nctrace::determinants::DetMethod;
use nctrace::estimators::{Normalization, TailMode};
use nctrace_cli::{acceptance, exit, exit_code_for, Command, EstimatorSelection, RunConfig, SpectrumCache};

#[derive(Parser)]
#[command(name = "nctrace", version, about = "Dixmier traces, residues and determinants from global symbols")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the unitary dual up to a cutoff.
    Dual(RunArgs),
    /// Dixmier trace estimates (E1 sorted spectrum, E2 zeta limit, E3 symbol norm).
    Trace(RunArgs),
    /// Torus residue of the principal part against the Dixmier trace.
    Residue(RunArgs),
    /// Regularised determinants.
    Det(RunArgs),
    /// All estimators on one symbol, with pairwise gaps.
    Compare(RunArgs),
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// torus:n, su2, su2:sub or product:A,B
    #[arg(long)]
    group: String,
    /// e.g. bessel:-1, sub:-4, aniso:1,0,2:-2, scale:2,0*bessel:-2, cos:2,1*bessel:-1
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, value_enum, default_value_t = EstimatorSelection::All)]
    est: EstimatorSelection,
    /// Dual cutoff N on <xi> (or the subelliptic weight).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Checkpoints: N0,k (geometric) or auto[:k].
    #[arg(long)]
    cutoffs: Option<String>,
    #[arg(long, default_value = "index")]
    norm: Normalization,
    /// elliptic or subelliptic; defaults to subelliptic on su2:sub.
    #[arg(long)]
    mode: Option<String>,
    /// power_tail or hard_cutoff, for E2.
    #[arg(long, default_value = "power_tail")]
    tail: TailMode,
    /// Levels p_k = 1 + 2^-k for p -> 1 limits.
    #[arg(long = "p-schedule", default_value_t = 10)]
    p_schedule: usize,
    #[arg(long = "haar-res", default_value_t = 16)]
    haar_res: usize,
    #[arg(long = "sphere-res", default_value_t = 512)]
    sphere_res: usize,
    /// a11,a12,a22 of a quadratic form on torus:2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    form: Option<Vec<f64>>,
    /// re,im
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// series:M or product.
    #[arg(long, default_value = "product")]
    method: DetMethod,
    /// Accepted relative residue gap.
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    /// Write the JSON report here ("-" for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the alpha sequences as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Bypass the spectrum cache.
    #[arg(long)]
    no_cache: bool,
}

fn parse_lambda(s: &str) -> Result<[f64; 2]> {
    let bad = || nctrace::Error::Config(format!("--lambda expects re,im, got '{s}'"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok([re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?])
}

fn config(command: Command, a: &RunArgs) -> Result<RunConfig> {
    let mut c = RunConfig::new(command, &a.group);
    c.symbol = a.symbol.clone();
    c.estimators = a.est;
    c.cutoff = a.cutoff;
    c.cutoffs = a.cutoffs.clone();
    c.norm = a.norm;
    c.mode = a.mode.clone();
    c.tail = a.tail;
    c.p_levels = a.p_schedule;
    c.haar_res = a.haar_res;
    c.sphere_res = a.sphere_res;
    c.form = a.form.clone();
    if let Some(l) = &a.lambda {
        c.lambda = parse_lambda(l)?;
    }
    c.method = a.method;
    c.tolerance = a.tolerance;
    c.json = a.json.clone();
    c.csv = a.csv.clone();
    Ok(c)
}

fn execute(command: Command, a: &RunArgs) -> Result<u8> {
    let c = config(command, a)?;
    let cache = if a.no_cache {
        None
    } else {
        match SpectrumCache::from_env() {
            Ok(cache) => Some(cache),
            Err(e) => {
                eprintln!("warning: spectrum cache disabled: {e}");
                None
            }
        }
    };
    let report = nctrace_cli::run(&c, cache)?;
    match &c.json {
        Some(p) if p.as_os_str() == "-" => println!("{}", report.to_json()),
        Some(p) => {
            report.write_json(p)?;
            print!("{}", report.summary());
        }
        None => print!("{}", report.summary()),
    }
    if let Some(p) = &c.csv {
        report.write_csv_file(p)?;
    }
    for w in &report.runtime.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if report.failed { exit::NUMERIC } else { exit::OK })
}

fn selftest() -> Result<u8> {
    let stdout = std::io::stdout();
    let results = acceptance::run_all(&mut stdout.lock());
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(stdout.lock(), "{} of {} criteria passed", results.len() - failed, results.len())?;
    if failed == 0 {
        Ok(exit::OK)
    } else {
        Err(anyhow!(nctrace::Error::Numeric(format!("{failed} criteria failed"))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.cmd {
        Cmd::Dual(a) => execute(Command::Dual, a),
        Cmd::Trace(a) => execute(Command::Trace, a),
        Cmd::Residue(a) => execute(Command::Residue, a),
        Cmd::Det(a) => execute(Command::Det, a),
        Cmd::Compare(a) => execute(Command::Compare, a),
        Cmd::Selftest => selftest(),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
