//! Command-line front end: load a scenario, run it (or sweep a parameter
//! grid over it), and write trace/message/summary files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cvt_sim::network::write_messages_csv;
use cvt_sim::scenario::ScenarioConfig;
use cvt_sim::sim::{self, write_trace_csv, SimError};
use cvt_sim::sweep::{self, SweepError, SweepGrid};

#[derive(Debug, Parser)]
#[command(
    name = "cvt-sim",
    version,
    about = "Coverage-control simulator for constant-speed unicycle robots"
)]
struct Cli {
    /// Scenario file (TOML) or the name of a bundled scenario.
    #[arg(long, default_value = "paper_4robots")]
    config: String,

    /// Override the scenario's update mode: continuous, event, or self.
    #[arg(long)]
    mode: Option<String>,

    /// Override the scenario's step size, seconds.
    #[arg(long)]
    dt: Option<f64>,

    /// Override the scenario's horizon, seconds.
    #[arg(long)]
    duration: Option<f64>,

    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Abort with exit code 3 when a run-level invariant is violated.
    #[arg(long)]
    strict: bool,

    /// Parameter grid (TOML); runs the sweep and writes sweep.csv instead
    /// of single-run outputs.
    #[arg(long)]
    sweep: Option<PathBuf>,

    /// Write trace.csv (pass `--emit-trace false` to skip it).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    emit_trace: bool,

    /// Write messages.csv (pass `--emit-messages false` to skip it).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    emit_messages: bool,
}

/// Config problems exit 2, strict-mode invariant aborts exit 3, anything
/// else unexpected exits 1.
enum CliError {
    Config(String),
    Invariant(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Invariant(m) | CliError::Other(m) => m,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Monitor { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Run {
                source: SimError::Monitor { .. },
                ..
            } => CliError::Invariant(e.to_string()),
            SweepError::Run { .. } => CliError::Other(e.to_string()),
            config_side => CliError::Config(config_side.to_string()),
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::load(&cli.config).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(mode) = &cli.mode {
        cfg.params.mode = mode.parse().map_err(CliError::Config)?;
    }
    if let Some(dt) = cli.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::Config(format!(
                "--dt must be finite and positive, got {dt}"
            )));
        }
        cfg.dt = dt;
    }
    if let Some(duration) = cli.duration {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(CliError::Config(format!(
                "--duration must be finite and positive, got {duration}"
            )));
        }
        cfg.duration = duration;
    }
    if cfg.duration < cfg.dt {
        return Err(CliError::Config(format!(
            "duration {} is shorter than one step {}",
            cfg.duration, cfg.dt
        )));
    }
    if cli.strict {
        cfg.strict = true;
    }
    Ok(cfg)
}

fn write_file(path: &std::path::Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Other(format!("could not write {}: {e}", path.display())))
}

fn run_cli(cli: &Cli) -> Result<String, CliError> {
    let cfg = load_config(cli)?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Other(format!("could not create {}: {e}", cli.out.display())))?;

    if let Some(grid_path) = &cli.sweep {
        let grid = SweepGrid::from_path(grid_path)?;
        let rows = sweep::run_sweep(&cfg, &grid, sweep::thread_cap())?;
        let mut buf = Vec::new();
        sweep::write_sweep_csv(&rows, &mut buf)
            .map_err(|e| CliError::Other(format!("sweep serialization failed: {e}")))?;
        let path = cli.out.join("sweep.csv");
        write_file(&path, &buf)?;
        return Ok(format!(
            "swept {} grid points over '{}' -> {}",
            rows.len(),
            cfg.name,
            path.display()
        ));
    }

    let started = std::time::Instant::now();
    let out = sim::run(&cfg)?;
    let wall_ms = started.elapsed().as_millis();
    if cli.emit_trace {
        let mut buf = Vec::new();
        write_trace_csv(&out.trace, cfg.robots.len(), &mut buf)
            .map_err(|e| CliError::Other(format!("trace serialization failed: {e}")))?;
        write_file(&cli.out.join("trace.csv"), &buf)?;
    }
    if cli.emit_messages {
        let mut buf = Vec::new();
        write_messages_csv(&out.log, &mut buf)
            .map_err(|e| CliError::Other(format!("message serialization failed: {e}")))?;
        write_file(&cli.out.join("messages.csv"), &buf)?;
    }
    write_file(
        &cli.out.join("summary.json"),
        sim::summary_json(&out.summary).as_bytes(),
    )?;

    let s = &out.summary;
    Ok(format!(
        "'{}' ({} mode, {} robots, {} s): H_V {:.4} -> {:.4}, {} triggers, converged = {} ({wall_ms} ms)",
        s.name, s.mode, s.n_robots, s.duration, s.h_v_initial, s.h_v_final, s.total_triggers,
        s.converged
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_cli(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cvt-sim: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
