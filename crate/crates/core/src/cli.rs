//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on invalid input (flags, files, domain
//! violations), 2 on internal runtime failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{optimize, trace_to_csv, AnnealParams};
use crate::audit::{validate_claims, AuditConfig};
use crate::compression::Scale;
use crate::configuration::Configuration;
use crate::error::Error;
use crate::generators::{
    circle_equispaced, grid_disc, random_disc, CircleConstruction, ConstructionParams,
    DEFAULT_DELTA, DEFAULT_EPSILON,
};
use crate::oracle::{decay_exponent, min_triangle_area, EvaluationReport, REPORT_CSV_HEADER};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "HEILBRONN_THREADS";

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CacheInconsistent { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "heilbronn",
    version,
    about = "Compression maps, induced balls and small-triangle experiments in the unit disc"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a configuration file.
    Generate(GenerateArgs),
    /// Compute the minimal triangle of a configuration file.
    Evaluate(EvaluateArgs),
    /// Generate and evaluate over a range of s; fit the decay exponent.
    Sweep(SweepArgs),
    /// Run the seeded identity, bound and ball-theorem audits.
    ValidateClaims(ValidateArgs),
    /// Anneal s points to enlarge the smallest triangle.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Paper,
    Random,
    Grid,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    #[arg(long, value_enum)]
    pub generator: GeneratorKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the derived scale of the induced-circle generator.
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Fail when the induced circle has gap >= 1 instead of rescaling.
    #[arg(long)]
    pub strict_gap: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub gen: GeneratorArgs,
    #[arg(long)]
    pub s: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write runtime_ms = 0 so reports are byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub gen: GeneratorArgs,
    /// `lo:hi:*k` (s - 1 multiplied by k), `lo:hi:+k`, `lo:hi` or a single s.
    #[arg(long)]
    pub s: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary path for CSV output; defaults to `<out>.summary.json`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Decider pairs.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Nesting trials and admissible points.
    #[arg(long, default_value_t = 1_000)]
    pub trials: usize,
    /// Points sampled per nesting trial.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Tuples for the involution, identity and bound checks.
    #[arg(long, default_value_t = 10_000)]
    pub identity_samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub iterations: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub initial_temp: Option<f64>,
    #[arg(long)]
    pub cooling: Option<f64>,
    #[arg(long)]
    pub step_scale: Option<f64>,
    /// Starting configuration file.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Best configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

/// Parses and runs; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|_| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Validation(format!("{THREADS_ENV}={value} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::ValidateClaims(a) => cmd_validate(a),
        Command::Optimize(a) => cmd_optimize(a),
    }
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let unwritable = |e: &dyn std::fmt::Display| {
        CliError::Validation(format!("cannot write {}: {e}", path.display()))
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| unwritable(&e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| unwritable(&e))?;
    tmp.persist(path).map_err(|e| unwritable(&e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn read_configuration(path: &Path) -> CliResult<Configuration> {
    Configuration::from_json(&read_input(path)?).map_err(|e| {
        CliError::Validation(format!("malformed configuration {}: {e}", path.display()))
    })
}

/// Rounds `s` up to the next admissible value for the generator; the
/// induced-circle generator needs `s - 3` even.
pub fn adjust_s(kind: GeneratorKind, s: usize) -> usize {
    match kind {
        GeneratorKind::Paper if s >= 3 && (s - 3) % 2 == 1 => s + 1,
        _ => s,
    }
}

/// Builds the configuration named by `gen` for exactly `s` points.
pub fn generate(gen: &GeneratorArgs, s: usize) -> crate::Result<Configuration> {
    match gen.generator {
        GeneratorKind::Paper => {
            let mut params = ConstructionParams::new(s, gen.epsilon, gen.delta)?;
            if let Some(m) = gen.m {
                params = params.with_scale(Scale::new(m)?);
            }
            let built = CircleConstruction::build(params)?;
            if gen.strict_gap && !built.gap_below_one() {
                return Err(Error::GapTooLarge { gap: built.gap });
            }
            built.configuration()
        }
        GeneratorKind::Random => random_disc(s, gen.seed),
        GeneratorKind::Grid => grid_disc(s),
        GeneratorKind::Circle => circle_equispaced(s, 1.0),
    }
}

fn generate_adjusted(gen: &GeneratorArgs, s: usize) -> CliResult<Configuration> {
    if s < 3 {
        return Err(CliError::Validation(format!(
            "s must be at least 3, got {s}"
        )));
    }
    let adjusted = adjust_s(gen.generator, s);
    if adjusted != s {
        eprintln!("note: s = {s} adjusted to {adjusted} (s - 3 must be even)");
    }
    Ok(generate(gen, adjusted)?)
}

fn evaluate(config: &Configuration, no_timing: bool) -> EvaluationReport {
    let mut report = min_triangle_area(config);
    if no_timing {
        report.runtime_ms = 0.0;
    }
    report
}

fn cmd_generate(a: GenerateArgs) -> CliResult<()> {
    let config = generate_adjusted(&a.gen, a.s)?;
    let text = match a.format {
        Format::Json => config.to_json(),
        Format::Csv => config.to_csv(),
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<()> {
    let config = read_configuration(&a.input)?;
    let report = evaluate(&config, a.no_timing);
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(a.out.as_deref(), &text)
}

/// Parses an s-range. Geometric steps multiply `s - 1`, so `9:513:*2`
/// yields 9, 17, 33, ..., 513.
pub fn parse_s_range(text: &str) -> CliResult<Vec<usize>> {
    let bad = |why: &str| CliError::Validation(format!("bad s-range {text:?}: {why}"));
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| bad("expected an integer"))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let (lo, hi, step) = match parts.as_slice() {
        [single] => (num(single)?, num(single)?, "+1"),
        [lo, hi] => (num(lo)?, num(hi)?, "+1"),
        [lo, hi, step] => (num(lo)?, num(hi)?, *step),
        _ => return Err(bad("expected lo:hi:*k or lo:hi:+k")),
    };
    if lo < 3 || lo > hi {
        return Err(bad("need 3 <= lo <= hi"));
    }
    let mut values = Vec::new();
    if let Some(k) = step.strip_prefix('*') {
        let k = num(k)?;
        if k < 2 {
            return Err(bad("geometric factor must be at least 2"));
        }
        let mut s = lo;
        while s <= hi {
            values.push(s);
            s = (s - 1) * k + 1;
        }
    } else if let Some(k) = step.strip_prefix('+') {
        let k = num(k)?;
        if k < 1 {
            return Err(bad("arithmetic step must be at least 1"));
        }
        values.extend((lo..=hi).step_by(k));
    } else {
        return Err(bad("step must start with * or +"));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub generator: GeneratorKind,
    pub s_values: Vec<usize>,
    /// Requested s values that were rounded up, as (requested, used).
    pub adjusted: Vec<(usize, usize)>,
    /// Slope of ln(min_area) against ln(s).
    pub decay_exponent: Option<f64>,
    /// Slope of the centre-triangle minimum, for the induced-circle generator.
    pub center_decay_exponent: Option<f64>,
    /// Why a fit was not produced.
    pub fit_notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub reports: Vec<EvaluationReport>,
    pub summary: SweepSummary,
}

pub const SWEEP_CSV_HEADER_EXTRA: &str = "center_min_area";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_CSV_HEADER},{SWEEP_CSV_HEADER_EXTRA}\n");
        for r in &self.reports {
            let center = r.center_min_area.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{center}\n", r.to_csv_row()));
        }
        out
    }
}

/// Evaluates the generator at each requested s (in parallel) and fits the
/// decay exponents.
pub fn sweep(
    gen: &GeneratorArgs,
    requested: &[usize],
    no_timing: bool,
) -> crate::Result<SweepResult> {
    let mut used = Vec::new();
    let mut adjusted = Vec::new();
    for &s in requested {
        let a = adjust_s(gen.generator, s);
        if a != s {
            adjusted.push((s, a));
        }
        if !used.contains(&a) {
            used.push(a);
        }
    }
    let reports: Vec<EvaluationReport> = used
        .par_iter()
        .map(|&s| generate(gen, s).map(|c| evaluate(&c, no_timing)))
        .collect::<crate::Result<_>>()?;

    let mut fit_notes = Vec::new();
    let mut fit = |label: &str, points: Vec<(usize, f64)>| match decay_exponent(&points) {
        Ok(slope) => Some(slope),
        Err(e) => {
            fit_notes.push(format!("{label}: {e}"));
            None
        }
    };
    let decay = fit(
        "min_area",
        reports.iter().map(|r| (r.s, r.min_area)).collect(),
    );
    let center_points: Vec<(usize, f64)> = reports
        .iter()
        .filter_map(|r| r.center_min_area.map(|c| (r.s, c)))
        .collect();
    let center_decay = if center_points.is_empty() {
        None
    } else {
        fit("center_min_area", center_points)
    };
    Ok(SweepResult {
        summary: SweepSummary {
            generator: gen.generator,
            s_values: used,
            adjusted,
            decay_exponent: decay,
            center_decay_exponent: center_decay,
            fit_notes,
        },
        reports,
    })
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    out.with_file_name(name)
}

fn cmd_sweep(a: SweepArgs) -> CliResult<()> {
    let requested = parse_s_range(&a.s)?;
    let result = sweep(&a.gen, &requested, a.no_timing)?;
    for (from, to) in &result.summary.adjusted {
        eprintln!("note: s = {from} adjusted to {to} (s - 3 must be even)");
    }
    let summary = serde_json::to_string_pretty(&result.summary).expect("summary serializes");
    match a.format {
        Format::Json => emit(
            a.out.as_deref(),
            &serde_json::to_string_pretty(&result).expect("sweep serializes"),
        ),
        Format::Csv => {
            emit(a.out.as_deref(), &result.to_csv())?;
            match a.summary.or_else(|| a.out.as_deref().map(summary_path)) {
                Some(p) => write_atomic(&p, &summary),
                None => {
                    eprintln!("{summary}");
                    Ok(())
                }
            }
        }
    }
}

fn cmd_validate(a: ValidateArgs) -> CliResult<()> {
    let config = AuditConfig {
        seed: a.seed,
        m: a.m,
        decider_samples: a.samples,
        nesting_trials: a.trials,
        nesting_points: a.points,
        admissible_samples: a.trials,
        identity_samples: a.identity_samples,
        ..AuditConfig::default()
    };
    let report = validate_claims(&config)?;
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => {
            let mut out = String::from("check,samples,passes,failures,pass_rate\n");
            for (name, rec) in report.records() {
                out.push_str(&format!(
                    "{name},{},{},{},{}\n",
                    rec.samples,
                    rec.passes,
                    rec.failures,
                    rec.pass_rate()
                ));
            }
            out
        }
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_optimize(a: OptimizeArgs) -> CliResult<()> {
    let mut params = AnnealParams::defaults_for(a.s, a.seed);
    if let Some(v) = a.iterations {
        params.iterations = v;
    }
    if let Some(v) = a.restarts {
        params.restarts = v;
    }
    if let Some(v) = a.initial_temp {
        params.initial_temp = v;
    }
    if let Some(v) = a.cooling {
        params.cooling = v;
    }
    if let Some(v) = a.step_scale {
        params.step_scale = v;
    }
    let init = a.input.as_deref().map(read_configuration).transpose()?;
    let mut outcome = optimize(a.s, &params, init.as_ref())?;
    if a.no_timing {
        outcome.report.runtime_ms = 0.0;
    }
    emit(a.out.as_deref(), &outcome.config.to_json())?;
    if let Some(p) = &a.report {
        write_atomic(p, &outcome.report.to_json())?;
    }
    if let Some(p) = &a.trace {
        write_atomic(p, &trace_to_csv(&outcome.trace))?;
    }
    Ok(())
}
