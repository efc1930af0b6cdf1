//! Command-line front end: exposes every computation as a reproducible
//! batch job with CSV/JSON output.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, malformed grid
//! or config), 1 on internal failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use polsim::{
    estimate_correlation_s1sq_s2, estimate_k, format_float17, joint_density_closed_form,
    joint_density_pair, k_expectation, k_expectation_closed_form, k_threshold, quasi_table_pair,
    records_to_csv, reference_state, sample_pair, sample_single, KSource, MeasurementKernel,
};

/// Environment variable holding the default worker thread count.
const THREADS_ENV: &str = "POLSIM_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "polsim",
    version,
    about = "Finite-resolution polarization measurement statistics: \
             distribution grids, signed quasi-probability tables, Bell-combination \
             sweeps, and reproducible Monte Carlo sampling",
    after_help = "The worker thread count defaults to the POLSIM_THREADS environment \
                  variable, then to the number of available cores; --threads overrides both. \
                  Every command is deterministic given its full flag set: --emit-config prints \
                  the resolved job as JSON, and --config replays it byte-for-byte."
)]
struct Cli {
    /// Run a job from a JSON configuration file instead of subcommand flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print the resolved job configuration as JSON and exit without running.
    #[arg(long, global = true)]
    emit_config: bool,

    /// Worker thread count (default: POLSIM_THREADS, then all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Table output format (default csv).
    #[arg(long, global = true, value_enum, value_name = "FORMAT")]
    format: Option<OutputFormat>,

    /// Write the primary output to this file instead of standard output.
    /// For `sample`, routes the record CSV to the file and the JSON summary
    /// to standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sign-resolved single-photon outcome densities on a 1D grid
    /// (columns: s1m, p_plus, p_minus).
    SingleDist(SingleDistArgs),
    /// One sign channel of the pair outcome density on a 2D grid
    /// (columns: s1ma, s1mb, density).
    PairDist(PairDistArgs),
    /// The 36-entry signed pair table with the per-row Bell combination
    /// value (columns: s1a, s2a, s1b, s2b, probability, K).
    QuasiTable,
    /// Bell combination value across a range of resolutions
    /// (columns: delta_s, k_expectation).
    KSweep(KSweepArgs),
    /// The resolution at which the Bell combination crosses the local
    /// bound 2, as JSON.
    Threshold,
    /// Reproducible sequential sampling runs: record CSV plus a JSON
    /// estimator summary.
    Sample(SampleArgs),
}

#[derive(Args, Debug)]
struct SingleDistArgs {
    /// Measurement resolution δs (> 0).
    #[arg(long, value_name = "DELTA_S")]
    resolution: f64,
    /// Evaluation grid as min:max:step.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: GridSpec,
}

#[derive(Args, Debug)]
struct PairDistArgs {
    /// Measurement resolution δs (> 0).
    #[arg(long, value_name = "DELTA_S")]
    resolution: f64,
    /// Evaluation grid (per axis) as min:max:step.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: GridSpec,
    /// Sign channel: one of ++, +-, -+, -- (use --channel=-- for the
    /// hyphen-leading tokens).
    #[arg(long, value_parser = parse_channel, allow_hyphen_values = true)]
    channel: Channel,
}

#[derive(Args, Debug)]
struct KSweepArgs {
    /// Lowest resolution (> 0).
    #[arg(long, value_name = "DELTA_S")]
    from: f64,
    /// Highest resolution.
    #[arg(long, value_name = "DELTA_S")]
    to: f64,
    /// Number of evenly spaced sweep points (≥ 1).
    #[arg(long, value_name = "N")]
    points: usize,
    /// Evaluation mode (default closed).
    #[arg(long, value_enum, default_value_t = SweepMode::Closed)]
    mode: SweepMode,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Sequence to sample.
    #[arg(long, value_enum)]
    mode: SampleMode,
    /// Measurement resolution δs (> 0).
    #[arg(long, value_name = "DELTA_S")]
    resolution: f64,
    /// Number of records to draw (≥ 1).
    #[arg(long, value_name = "N")]
    samples: usize,
    /// Master random seed.
    #[arg(long, value_name = "SEED")]
    seed: u64,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum SweepMode {
    /// Algebraic closed form.
    Closed,
    /// Independent numerical quadrature of the outcome densities.
    Quadrature,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum SampleMode {
    Single,
    Pair,
}

/// One sign channel of the pair sequence, named by the two precise signs.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
enum Channel {
    #[serde(rename = "++")]
    PlusPlus,
    #[serde(rename = "+-")]
    PlusMinus,
    #[serde(rename = "-+")]
    MinusPlus,
    #[serde(rename = "--")]
    MinusMinus,
}

impl Channel {
    fn signs(self) -> (i8, i8) {
        match self {
            Channel::PlusPlus => (1, 1),
            Channel::PlusMinus => (1, -1),
            Channel::MinusPlus => (-1, 1),
            Channel::MinusMinus => (-1, -1),
        }
    }
}

fn parse_channel(token: &str) -> Result<Channel, String> {
    match token {
        "++" => Ok(Channel::PlusPlus),
        "+-" => Ok(Channel::PlusMinus),
        "-+" => Ok(Channel::MinusPlus),
        "--" => Ok(Channel::MinusMinus),
        other => Err(format!("unknown channel '{other}' (expected ++, +-, -+, or --)")),
    }
}

/// Inclusive evaluation grid min:max:step.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
struct GridSpec {
    min: f64,
    max: f64,
    step: f64,
}

impl GridSpec {
    fn validate(&self) -> Result<(), String> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err("grid bounds and step must be finite".into());
        }
        if self.min >= self.max {
            return Err(format!("grid min {} must be below max {}", self.min, self.max));
        }
        if self.step <= 0.0 {
            return Err(format!("grid step {} must be positive", self.step));
        }
        Ok(())
    }

    fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.min + self.step * i as f64).collect()
    }
}

fn parse_grid(token: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = token.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid '{token}' must have the form min:max:step"));
    }
    let mut values = [0.0f64; 3];
    for (slot, raw) in values.iter_mut().zip(&parts) {
        *slot = raw
            .parse()
            .map_err(|_| format!("grid component '{raw}' is not a number"))?;
    }
    let grid = GridSpec { min: values[0], max: values[1], step: values[2] };
    grid.validate()?;
    Ok(grid)
}

/// The full, replayable description of one job.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
struct JobConfig {
    #[serde(flatten)]
    command: CommandConfig,
    format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum CommandConfig {
    SingleDist { resolution: f64, grid: GridSpec },
    PairDist { resolution: f64, grid: GridSpec, channel: Channel },
    QuasiTable,
    KSweep { from: f64, to: f64, points: usize, mode: SweepMode },
    Threshold,
    Sample { mode: SampleMode, resolution: f64, samples: usize, seed: u64 },
}

enum CliError {
    Usage(String),
    Internal(String),
}

impl From<polsim::Error> for CliError {
    fn from(e: polsim::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = resolve(cli.config, cli.command, cli.format, cli.output, cli.threads)?;
    validate(&config)?;
    if cli.emit_config {
        let rendered = serde_json::to_string_pretty(&config)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        println!("{rendered}");
        return Ok(());
    }
    let threads = resolve_threads(config.threads)?;
    if let Some(count) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    execute(&config)
}

fn resolve(
    config_path: Option<PathBuf>,
    command: Option<Command>,
    format: Option<OutputFormat>,
    output: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<JobConfig, CliError> {
    let mut config = match (config_path, command) {
        (Some(path), None) => {
            let raw = fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<JobConfig>(&raw)
                .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
        (None, Some(command)) => JobConfig {
            command: command_to_config(command),
            format: OutputFormat::Csv,
            output: None,
            threads: None,
        },
        (None, None) => {
            return Err(usage("provide a subcommand or --config PATH (see --help)"));
        }
        (Some(_), Some(_)) => {
            return Err(usage("choose either --config or a subcommand, not both"));
        }
    };
    // Explicit top-level flags override what the config file carries.
    if let Some(format) = format {
        config.format = format;
    }
    if let Some(output) = output {
        config.output = Some(output);
    }
    if let Some(threads) = threads {
        config.threads = Some(threads);
    }
    Ok(config)
}

fn command_to_config(command: Command) -> CommandConfig {
    match command {
        Command::SingleDist(a) => {
            CommandConfig::SingleDist { resolution: a.resolution, grid: a.grid }
        }
        Command::PairDist(a) => {
            CommandConfig::PairDist { resolution: a.resolution, grid: a.grid, channel: a.channel }
        }
        Command::QuasiTable => CommandConfig::QuasiTable,
        Command::KSweep(a) => {
            CommandConfig::KSweep { from: a.from, to: a.to, points: a.points, mode: a.mode }
        }
        Command::Threshold => CommandConfig::Threshold,
        Command::Sample(a) => CommandConfig::Sample {
            mode: a.mode,
            resolution: a.resolution,
            samples: a.samples,
            seed: a.seed,
        },
    }
}

fn check_resolution(resolution: f64) -> Result<(), CliError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(usage(format!("resolution {resolution} must be a positive number")));
    }
    Ok(())
}

fn validate(config: &JobConfig) -> Result<(), CliError> {
    match &config.command {
        CommandConfig::SingleDist { resolution, grid }
        | CommandConfig::PairDist { resolution, grid, .. } => {
            check_resolution(*resolution)?;
            grid.validate().map_err(usage)?;
        }
        CommandConfig::QuasiTable | CommandConfig::Threshold => {}
        CommandConfig::KSweep { from, to, points, .. } => {
            check_resolution(*from)?;
            if !(to.is_finite() && to >= from) {
                return Err(usage(format!("sweep end {to} must be at least the start {from}")));
            }
            if *points == 0 {
                return Err(usage("sweep needs at least one point"));
            }
            if *points == 1 && to != from {
                return Err(usage("a one-point sweep requires --from equal to --to"));
            }
        }
        CommandConfig::Sample { resolution, samples, .. } => {
            check_resolution(*resolution)?;
            if *samples < 2 {
                return Err(usage(
                    "sample count must be at least 2 so the estimator can report a standard error",
                ));
            }
        }
    }
    Ok(())
}

fn resolve_threads(configured: Option<usize>) -> Result<Option<usize>, CliError> {
    let count = match configured {
        Some(count) => Some(count),
        None => match std::env::var(THREADS_ENV) {
            Ok(raw) => Some(
                raw.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("invalid {THREADS_ENV} value '{raw}'")))?,
            ),
            Err(std::env::VarError::NotPresent) => None,
            Err(e) => return Err(usage(format!("unreadable {THREADS_ENV}: {e}"))),
        },
    };
    if count == Some(0) {
        return Err(usage("thread count must be at least 1"));
    }
    Ok(count)
}

/// A cell of a result table: integers print bare, continuous values print
/// with 17 significant digits.
#[derive(Clone, Copy)]
enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn csv(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float17(v),
        }
    }

    fn json(self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::Value::from(v),
            Cell::Float(v) => serde_json::Value::from(v),
        }
    }
}

struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Csv => {
                let mut out = String::new();
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| c.csv()).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                Ok(out)
            }
            OutputFormat::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        serde_json::Value::from(
                            row.iter().map(|c| c.json()).collect::<Vec<_>>(),
                        )
                    })
                    .collect();
                let value = serde_json::json!({ "columns": self.columns, "rows": rows });
                serde_json::to_string(&value)
                    .map(|mut s| {
                        s.push('\n');
                        s
                    })
                    .map_err(|e| CliError::Internal(e.to_string()))
            }
        }
    }
}

fn write_primary(text: &str, output: &Option<PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(config: &JobConfig) -> Result<(), CliError> {
    match &config.command {
        CommandConfig::SingleDist { resolution, grid } => {
            let kernel = MeasurementKernel::new(*resolution)?;
            let rows = grid
                .points()
                .into_iter()
                .map(|s| {
                    let plus = joint_density_closed_form(&kernel, s, 1)?;
                    let minus = joint_density_closed_form(&kernel, s, -1)?;
                    Ok(vec![Cell::Float(s), Cell::Float(plus), Cell::Float(minus)])
                })
                .collect::<Result<Vec<_>, polsim::Error>>()?;
            let table = Table { columns: &["s1m", "p_plus", "p_minus"], rows };
            write_primary(&table.render(config.format)?, &config.output)
        }
        CommandConfig::PairDist { resolution, grid, channel } => {
            let kernel = MeasurementKernel::new(*resolution)?;
            let (qa, qb) = channel.signs();
            let axis = grid.points();
            let mut rows = Vec::with_capacity(axis.len() * axis.len());
            for &sa in &axis {
                for &sb in &axis {
                    let density = joint_density_pair(&kernel, sa, sb, qa, qb)?;
                    rows.push(vec![Cell::Float(sa), Cell::Float(sb), Cell::Float(density)]);
                }
            }
            let table = Table { columns: &["s1ma", "s1mb", "density"], rows };
            write_primary(&table.render(config.format)?, &config.output)
        }
        CommandConfig::QuasiTable => {
            let quasi = quasi_table_pair()?;
            let rows = quasi
                .entries()
                .iter()
                .map(|e| {
                    let (s1a, s2a) = (e.s1a as i64, e.s2a as i64);
                    let s1b = e.s1b.expect("pair table") as i64;
                    let s2b = e.s2b.expect("pair table") as i64;
                    let k = s1a * s1b + s2a * s1b - s1a * s2b + s2a * s2b;
                    vec![
                        Cell::Int(s1a),
                        Cell::Int(s2a),
                        Cell::Int(s1b),
                        Cell::Int(s2b),
                        Cell::Float(e.probability),
                        Cell::Int(k),
                    ]
                })
                .collect();
            let table =
                Table { columns: &["s1a", "s2a", "s1b", "s2b", "probability", "K"], rows };
            write_primary(&table.render(config.format)?, &config.output)
        }
        CommandConfig::KSweep { from, to, points, mode } => {
            let rows = (0..*points)
                .map(|i| {
                    let fraction = if *points == 1 {
                        0.0
                    } else {
                        i as f64 / (*points - 1) as f64
                    };
                    let resolution = from + fraction * (to - from);
                    let value = match mode {
                        SweepMode::Closed => k_expectation_closed_form(resolution)?,
                        SweepMode::Quadrature => {
                            let kernel = MeasurementKernel::new(resolution)?;
                            k_expectation(&kernel, KSource::Analytic)?.value
                        }
                    };
                    Ok(vec![Cell::Float(resolution), Cell::Float(value)])
                })
                .collect::<Result<Vec<_>, polsim::Error>>()?;
            let table = Table { columns: &["delta_s", "k_expectation"], rows };
            write_primary(&table.render(config.format)?, &config.output)
        }
        CommandConfig::Threshold => {
            let root = k_threshold()?;
            let value = serde_json::json!({ "delta_s_star": root });
            let mut text =
                serde_json::to_string(&value).map_err(|e| CliError::Internal(e.to_string()))?;
            text.push('\n');
            write_primary(&text, &config.output)
        }
        CommandConfig::Sample { mode, resolution, samples, seed } => {
            let kernel = MeasurementKernel::new(*resolution)?;
            let (records, summary) = match mode {
                SampleMode::Pair => {
                    let records = sample_pair(&kernel, *seed, *samples)?;
                    let estimate = estimate_k(&records)?;
                    let summary = serde_json::json!({
                        "k_estimate": estimate.mean,
                        "std_error": estimate.std_error,
                    });
                    (records, summary)
                }
                SampleMode::Single => {
                    let state = reference_state();
                    let records = sample_single(&state, &kernel, *seed, *samples)?;
                    let estimate = estimate_correlation_s1sq_s2(&records, &kernel)?;
                    let summary = serde_json::json!({
                        "c_estimate": estimate.mean,
                        "std_error": estimate.std_error,
                    });
                    (records, summary)
                }
            };
            let csv = records_to_csv(&records);
            let summary_text =
                serde_json::to_string(&summary).map_err(|e| CliError::Internal(e.to_string()))?;
            match &config.output {
                Some(path) => {
                    fs::write(path, &csv)?;
                    println!("{summary_text}");
                }
                None => {
                    print!("{csv}");
                    eprintln!("{summary_text}");
                }
            }
            Ok(())
        }
    }
}
