//! `bellsim` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for invalid
//! configuration or data. Output goes to stdout unless `--out PATH` is given,
//! and is only written on success.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiment::{
    run_experiment_with, summary_json, write_csv, Execution, ExperimentConfig, SettingPair,
    Side,
};
use crate::inequality::{derivation_trace, wigner_counts, wigner_quantum, SettingTriple};
use crate::lhv::StrategyCensus;
use crate::optimize::{
    local_bound, maximize_violation, sweep_symmetric, write_sweep_csv, DEFAULT_GRID_STEP_DEG,
    DEFAULT_REFINE_TOLERANCE_DEG,
};
use crate::quantum::{Angle, Outcome, PairState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "bellsim", version, about = "Wigner-d'Espagnat Bell inequality simulator")]
pub struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Joint outcome probabilities and expected counts for two settings.
    Predict(PredictArgs),
    /// Evaluate N(a,c) + N(a⊥,b) >= N(b,c), quantum form or on a census.
    Inequality(InequalityArgs),
    /// Monte Carlo run; JSON summary, or the trial log as CSV.
    Simulate(SimulateArgs),
    /// Largest local margin over all instruction sets.
    Bound(TripleArgs),
    /// Quantum inequality along (a,b) = (b,c) = θ, (a,c) = 2θ.
    Sweep(SweepArgs),
    /// Search (θ₁, θ₂) for the largest quantum violation.
    Maximize(MaximizeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Side-A polarizer angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    angle_a: String,
    /// Side-B polarizer angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    angle_b: String,
    /// Number of emitted pairs for expected counts.
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long, default_value = "1")]
    visibility: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct TripleArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    #[arg(long, allow_hyphen_values = true)]
    c: String,
}

#[derive(Args, Debug)]
struct InequalityArgs {
    #[command(flatten)]
    triple: TripleArgs,
    /// Census JSON file; selects the count form.
    #[arg(long, value_name = "FILE")]
    census: Option<PathBuf>,
    /// Include every intermediate count of the derivation (count form only).
    #[arg(long, requires = "census")]
    trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Quantum,
    Lhv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OrderingArg {
    Spacelike,
    Timelike,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SideArg {
    A,
    B,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Experiment config JSON; replaces the source and setting flags.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["mode", "ordering", "first", "pairs", "angles", "census", "visibility"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    ordering: Option<OrderingArg>,
    /// First observer in time-like runs.
    #[arg(long, value_enum)]
    first: Option<SideArg>,
    /// Pairs per setting pair.
    #[arg(long)]
    pairs: Option<String>,
    /// Master seed; overrides the config file's seed.
    #[arg(long)]
    seed: Option<String>,
    /// `A,B` for one setting pair, or `a,b,c` for the pairs (a,c), (a,b), (b,c).
    #[arg(long, allow_hyphen_values = true, required_unless_present = "config")]
    angles: Option<String>,
    /// Census JSON file (lhv mode).
    #[arg(long, value_name = "FILE")]
    census: Option<PathBuf>,
    #[arg(long)]
    visibility: Option<String>,
    /// Disable parallel trial generation.
    #[arg(long)]
    serial: bool,
    /// Also write the trial log as CSV to this file.
    #[arg(long, value_name = "PATH")]
    log: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    min: String,
    #[arg(long, allow_hyphen_values = true)]
    max: String,
    #[arg(long)]
    step: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct MaximizeArgs {
    #[arg(long)]
    grid_step: Option<String>,
    #[arg(long)]
    tol: Option<String>,
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = execute(&cli.command).and_then(|text| match &cli.out {
        Some(path) => fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Predict(a) => predict(a),
        Command::Inequality(a) => inequality(a),
        Command::Simulate(a) => simulate(a),
        Command::Bound(a) => bound(a),
        Command::Sweep(a) => sweep(a),
        Command::Maximize(a) => maximize(a),
    }
}

fn number(flag: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("--{flag}: expected a finite number, got {text:?}")))
}

fn angle(flag: &str, text: &str) -> Result<Angle> {
    Angle::new(number(flag, text)?)
}

fn count(flag: &str, text: &str) -> Result<u64> {
    text.trim()
        .parse::<u64>()
        .map_err(|_| Error::Parse(format!("--{flag}: expected a nonnegative integer, got {text:?}")))
}

fn read_census(path: &Path) -> Result<StrategyCensus> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    StrategyCensus::from_json(&text)
}

fn triple(args: &TripleArgs) -> Result<SettingTriple> {
    SettingTriple::new(angle("a", &args.a)?, angle("b", &args.b)?, angle("c", &args.c)?)
}

/// Round to 12 decimals so values such as `0.49999999999999994` print as `0.5`.
fn tidy(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn to_json(value: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn outcome_key(a: Outcome, b: Outcome) -> String {
    format!("{a}{b}")
}

fn predict(args: &PredictArgs) -> Result<String> {
    let (a, b) = (angle("angle-a", &args.angle_a)?, angle("angle-b", &args.angle_b)?);
    let state = PairState::with_visibility(number("visibility", &args.visibility)?)?;
    let pairs = args.pairs.as_deref().map(|p| count("pairs", p)).transpose()?;
    let probs = state.joint_distribution(a, b);
    let counts = pairs.map(|n| state.predict_counts(a, b, n)).transpose()?;

    if args.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["outcome_a", "outcome_b", "probability", "count"])?;
        for (oa, ob, p) in probs.iter() {
            let c = counts.map(|c| tidy(c.get(oa, ob)).to_string()).unwrap_or_default();
            w.write_record([oa.to_string(), ob.to_string(), tidy(p).to_string(), c])?;
        }
        return String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .map_err(|e| Error::Io(e.to_string()));
    }

    let table = |d: &crate::quantum::JointDistribution| {
        Value::Object(
            d.iter()
                .map(|(oa, ob, v)| (outcome_key(oa, ob), json!(tidy(v))))
                .collect(),
        )
    };
    let mut out = json!({
        "angles_deg": {"a": a.degrees(), "b": b.degrees()},
        "angle_between_deg": tidy(a.axis_difference(b)),
        "visibility": state.visibility(),
        "probabilities": table(&probs),
        "marginals": {
            "a_transmit": state.marginal_probability(a, Outcome::Transmit),
            "b_transmit": state.marginal_probability(b, Outcome::Transmit),
        },
    });
    if let (Some(n), Some(c)) = (pairs, counts) {
        out["pairs"] = json!(n);
        out["counts"] = table(&c);
    }
    to_json(&out)
}

fn inequality(args: &InequalityArgs) -> Result<String> {
    let t = triple(&args.triple)?;
    match &args.census {
        None => {
            let r = wigner_quantum(&t);
            let mut v = serde_json::to_value(r)?;
            for key in ["lhs", "rhs", "margin"] {
                v[key] = json!(tidy(v[key].as_f64().unwrap_or_default()));
            }
            to_json(&v)
        }
        Some(path) => {
            let census = read_census(path)?;
            let mut v = serde_json::to_value(wigner_counts(&census, &t)?)?;
            v["pairs"] = json!(census.total());
            if args.trace {
                let trace = derivation_trace(&census, &t)?;
                v["trace"] = serde_json::to_value(trace)?;
                v["trace"]["steps"] = trace
                    .steps()
                    .iter()
                    .map(|(step, holds)| json!({"step": step, "holds": holds}))
                    .collect();
            }
            to_json(&v)
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<String> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => config_from_flags(args)?,
    };
    if let Some(seed) = &args.seed {
        config.seed = count("seed", seed)?;
    }
    let execution = if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let log = run_experiment_with(&config, execution)?;

    if let Some(path) = &args.log {
        let file = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_csv(&log, std::io::BufWriter::new(file))?;
    }
    match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&log, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
        }
        Format::Json => to_json(&summary_json(&log)?),
    }
}

fn config_from_flags(args: &SimulateArgs) -> Result<ExperimentConfig> {
    let list = args.angles.as_deref().unwrap_or_default();
    let angles = list
        .split(',')
        .map(|s| angle("angles", s))
        .collect::<Result<Vec<_>>>()?;
    let setting_pairs = match angles.as_slice() {
        &[a, b] => vec![SettingPair::new(a, b)],
        &[a, b, c] => SettingPair::wigner_pairs(&SettingTriple::new(a, b, c)?),
        _ => {
            return Err(Error::Parse(format!(
                "--angles: expected 2 or 3 comma-separated angles, got {list:?}"
            )))
        }
    };
    let pairs = match &args.pairs {
        Some(p) => count("pairs", p)?,
        None => 10_000,
    };
    let mut config = match (args.mode.unwrap_or(ModeArg::Quantum), &args.census) {
        (ModeArg::Quantum, None) => ExperimentConfig::quantum(setting_pairs, pairs, 0),
        (ModeArg::Lhv, Some(path)) => {
            ExperimentConfig::lhv(read_census(path)?, setting_pairs, pairs, 0)
        }
        (ModeArg::Lhv, None) => {
            return Err(Error::InvalidParameter("--mode lhv requires --census".into()))
        }
        (ModeArg::Quantum, Some(_)) => {
            return Err(Error::InvalidParameter("--census requires --mode lhv".into()))
        }
    };
    if let Some(v) = &args.visibility {
        if args.mode == Some(ModeArg::Lhv) {
            return Err(Error::InvalidParameter("--visibility applies to quantum mode".into()));
        }
        config = config.with_visibility(number("visibility", v)?);
    }
    if args.ordering == Some(OrderingArg::Timelike) {
        let first = match args.first {
            Some(SideArg::B) => Side::B,
            _ => Side::A,
        };
        config = config.timelike(first);
    } else if args.first.is_some() {
        return Err(Error::InvalidParameter("--first applies to time-like ordering".into()));
    }
    Ok(config)
}

fn bound(args: &TripleArgs) -> Result<String> {
    let t = triple(args)?;
    let mut v = serde_json::to_value(local_bound(&t)?)?;
    v["angles_deg"] = json!({"a": t.a.degrees(), "b": t.b.degrees(), "c": t.c.degrees()});
    to_json(&v)
}

fn sweep(args: &SweepArgs) -> Result<String> {
    let mut result = sweep_symmetric(
        number("min", &args.min)?,
        number("max", &args.max)?,
        number("step", &args.step)?,
    )?;
    for r in &mut result.rows {
        r.lhs = tidy(r.lhs);
        r.rhs = tidy(r.rhs);
        r.margin = tidy(r.margin);
    }
    match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&result, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
        }
        Format::Json => to_json(&serde_json::to_value(result)?),
    }
}

fn maximize(args: &MaximizeArgs) -> Result<String> {
    let grid_step = match &args.grid_step {
        Some(s) => number("grid-step", s)?,
        None => DEFAULT_GRID_STEP_DEG,
    };
    let tol = match &args.tol {
        Some(s) => number("tol", s)?,
        None => DEFAULT_REFINE_TOLERANCE_DEG,
    };
    let best = maximize_violation(grid_step, tol)?;
    let mut v = serde_json::to_value(best)?;
    v["grid_step_deg"] = json!(grid_step);
    v["refine_tolerance_deg"] = json!(tol);
    to_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("bellsim").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["predict", "--angle-a", "0", "--angle-b", "0", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["simulate", "--mode", "classical", "--angles", "0,0"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn invalid_data_exits_two_without_stdout() {
        let (code, out, err) = call(&["predict", "--angle-a", "zero", "--angle-b", "0"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(out.is_empty());
        assert!(err.contains("angle-a"));
        assert_eq!(call(&["predict", "--angle-a", "0", "--angle-b", "0", "--pairs", "0"]).0, EXIT_INVALID);
        assert_eq!(call(&["inequality", "--a", "0", "--b", "0", "--c", "60"]).0, EXIT_INVALID);
        assert_eq!(call(&["maximize", "--grid-step", "10"]).0, EXIT_INVALID);
        assert_eq!(call(&["simulate", "--angles", "0,1,2,3"]).0, EXIT_INVALID);
        assert_eq!(call(&["simulate", "--mode", "lhv", "--angles", "0,30"]).0, EXIT_INVALID);
    }

    #[test]
    fn tidy_rounding() {
        assert_eq!(tidy(0.49999999999999994), 0.5);
        assert_eq!(tidy(125.00000000000006), 125.0);
        assert_eq!(tidy(-1e-17).to_bits(), 0.0f64.to_bits());
    }
}
