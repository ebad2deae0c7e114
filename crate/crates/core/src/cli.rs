//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                                    |
//! |------|------------------------------------------------------------|
//! | 0    | success                                                    |
//! | 2    | invalid input (scenario, schedule, arguments, sample size) |
//! | 3    | numerical failure                                          |
//! | 4    | infeasible target                                          |
//! | 5    | empirical SER above the target Pe plus the 4σ margin       |

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::MacError;
use crate::io::{read_scenario, regions_to_csv, report_to_json, schedule_from_json, schedule_to_json, write_atomic};
use crate::region::{region_contains, region_for, sum_rate_gap, RateRegion, Scheme, DEFAULT_SAMPLES};
use crate::scheduler::{lambda1_and_point_b1, synth_schedule, validate_schedule, Scenario, Target};
use crate::sim::{run_schedule, MIN_SYMBOLS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_SER: i32 = 5;

/// Containment tolerance used by `compare`.
pub const CONTAINMENT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "macregion", version, about = "Rate regions of the two-user Gaussian MAC with uncoded PAM")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write region boundaries as CSV.
    Region {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated scheme names, or `all`.
        #[arg(long, default_value = "all")]
        schemes: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a schedule for a corner point or a b1-c1 mixture.
    Schedule {
        #[arg(long)]
        scenario: PathBuf,
        /// One of b, c, b1, c1 or theta=<0..1>.
        #[arg(long)]
        target: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo simulation of a schedule file.
    Simulate {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        symbols: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print sum rates, the sum-rate gap and the containment matrix.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<MacError> for Failure {
    fn from(e: MacError) -> Self {
        let code = match e {
            MacError::Numerical(_) => EXIT_NUMERICAL,
            MacError::Infeasible { .. } | MacError::NoSuperposition(_) => EXIT_INFEASIBLE,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_INVALID, message: format!("{}: {e}", path.display()) }
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, contents).map_err(|e| io_failure(path, e)),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| Failure { code: EXIT_INVALID, message: format!("stdout: {e}") }),
    }
}

fn load_scenario(path: &Path, stderr: &mut dyn Write) -> Result<Scenario, Failure> {
    let scenario = read_scenario(path).map_err(|e| match e {
        MacError::Parse(m) => Failure { code: EXIT_INVALID, message: m },
        other => Failure { code: EXIT_INVALID, message: other.to_string() },
    })?;
    if scenario.swapped() {
        let _ = writeln!(stderr, "warning: p2 > p1 in {}; users relabelled so user 1 is the stronger", path.display());
    }
    Ok(scenario)
}

fn parse_schemes(list: &str) -> Result<Vec<Scheme>, Failure> {
    if list.trim() == "all" {
        return Ok(Scheme::ALL.to_vec());
    }
    list.split(',').map(|s| s.parse::<Scheme>().map_err(Failure::from)).collect()
}

fn cmd_region(scenario: &Path, schemes: &str, samples: usize, out: &Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let scenario = load_scenario(scenario, stderr)?;
    let schemes = parse_schemes(schemes)?;
    let regions = schemes
        .iter()
        .map(|&s| region_for(s, &scenario, samples))
        .collect::<Result<Vec<_>, _>>()?;
    emit(out, stdout, &regions_to_csv(&regions))
}

fn cmd_schedule(scenario: &Path, target: &str, out: &Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let scenario = load_scenario(scenario, stderr)?;
    let target: Target = target.parse()?;
    let schedule = synth_schedule(target, &scenario)?;
    let report = validate_schedule(&schedule);
    if let Some(v) = report.first_violation() {
        return Err(Failure { code: EXIT_NUMERICAL, message: format!("synthesized schedule failed validation: {v}") });
    }
    emit(out, stdout, &schedule_to_json(&schedule, Some(target)))
}

fn cmd_simulate(schedule: &Path, symbols: u64, seed: u64, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<i32, Failure> {
    if symbols < MIN_SYMBOLS {
        return Err(Failure { code: EXIT_INVALID, message: format!("need at least {MIN_SYMBOLS} symbols, got {symbols}") });
    }
    let text = std::fs::read_to_string(schedule).map_err(|e| io_failure(schedule, e))?;
    let schedule = schedule_from_json(&text)?;
    if let Some(v) = validate_schedule(&schedule).first_violation() {
        return Err(Failure { code: EXIT_INVALID, message: format!("schedule failed validation: {v}") });
    }
    let report = run_schedule(&schedule, symbols, seed)?;
    emit(out, stdout, &report_to_json(&report))?;
    Ok(if report.complies(schedule.scenario().gap_params().target_pe()) { EXIT_OK } else { EXIT_SER })
}

/// Plain-text comparison table for a scenario.
pub fn compare_table(scenario: &Scenario, samples: usize) -> crate::error::Result<String> {
    let regions: Vec<RateRegion> =
        Scheme::ALL.iter().map(|&s| region_for(s, scenario, samples)).collect::<Result<_, _>>()?;
    let mut t = String::new();
    let gp = scenario.gap_params();
    t.push_str(&format!(
        "scenario: p1={} p2={} n0={} pe={:e} coding_gain_db={} (R1={}, R2={})\n",
        scenario.p1(),
        scenario.p2(),
        scenario.n0(),
        gp.target_pe(),
        gp.coding_gain_db(),
        scenario.r1()?,
        scenario.r2()?
    ));
    t.push_str("\nscheme              max_sum_rate\n");
    for r in &regions {
        t.push_str(&format!("{:<20}{:.6}\n", r.scheme().name(), r.max_sum_rate()));
    }
    t.push_str(&format!("\nsum_rate_gap        {:.6} bits\n", sum_rate_gap(scenario)?));
    let corner = lambda1_and_point_b1(scenario)?;
    if !corner.floor_consistent {
        t.push_str(&format!(
            "note: b1 ladder step {} + R2 differs from the sum-rate floor {} (powers off integer levels)\n",
            corner.step, corner.sum_rate_floor
        ));
    }
    t.push_str(&format!("\ncontainment (row contains column, tol {CONTAINMENT_TOL:e})\n"));
    let abbrev = ["gauss", "outer", "no_pc", "pc", "naive", "tdmapc"];
    t.push_str(&format!("{:<20}", ""));
    for a in abbrev {
        t.push_str(&format!("{a:>8}"));
    }
    t.push('\n');
    for outer in &regions {
        t.push_str(&format!("{:<20}", outer.scheme().name()));
        for inner in &regions {
            let mark = if region_contains(outer, inner, CONTAINMENT_TOL) { "yes" } else { "no" };
            t.push_str(&format!("{mark:>8}"));
        }
        t.push('\n');
    }
    Ok(t)
}

fn cmd_compare(scenario: &Path, samples: usize, out: &Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let scenario = load_scenario(scenario, stderr)?;
    let table = compare_table(&scenario, samples)?;
    emit(out, stdout, &table)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Region { scenario, schemes, samples, out } => {
            cmd_region(scenario, schemes, *samples, out, stdout, stderr).map(|_| EXIT_OK)
        }
        Command::Schedule { scenario, target, out } => cmd_schedule(scenario, target, out, stdout, stderr).map(|_| EXIT_OK),
        Command::Simulate { schedule, symbols, seed, out } => cmd_simulate(schedule, *symbols, *seed, out, stdout),
        Command::Compare { scenario, samples, out } => {
            cmd_compare(scenario, *samples, out, stdout, stderr).map(|_| EXIT_OK)
        }
    };
    match result {
        Ok(code) => {
            if code == EXIT_SER {
                let _ = writeln!(stderr, "empirical SER exceeds the target Pe beyond the 4-sigma margin");
            }
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Caps rayon's global pool at `MACREGION_THREADS` when that variable is set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("MACREGION_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
