//! Command-line front end: `simulate`, `figures` and `verify`.

pub mod config;
pub mod manifest;
pub mod output;
pub mod verify;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::error::Error;
use crate::observables::uncertainty_series;
use crate::wavepacket::{PhaseTerms, Solution};
use config::RunConfig;
use manifest::{describe_file, GridSummary, RunManifest, MANIFEST_NAME};
use verify::{run_verification, VerifySettings, REPORT_NAME};

const DEFAULT_OUT: &str = "run";

#[derive(Debug, Parser)]
#[command(name = "pseudoinv", version, about = "Invariant-based wave packets in a complex linear potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: RunOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write moments.csv and psi_t*.csv snapshots.
    Simulate,
    /// Write fig1a.csv, fig1b.csv and fig2.csv.
    Figures,
    /// Run the property suite and write verify_report.json.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Figures => "figures",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunOptions {
    /// TOML config with [scenario], [grids] and [output] tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Horizon T.
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Points of the x-mesh used for snapshots and the density map.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Accept constants that violate the consistency relations.
    #[arg(long, global = true)]
    pub override_consistency: bool,
    /// Drive profile, e.g. `cosine:1,1` or `constant:0`.
    #[arg(long, global = true)]
    pub drive: Option<String>,
    /// Drops the metric term of the phase (negative control for `verify`).
    #[arg(long, global = true, hide = true)]
    pub corrupt_phase: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {}: {source}", path.display())]
    ReadConfig { path: PathBuf, source: io::Error },
    #[error("invalid config {}: {source}", path.display())]
    ParseConfig { path: PathBuf, source: toml::de::Error },
    #[error(transparent)]
    Model(#[from] Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ReadConfig { .. } | CliError::ParseConfig { .. } => 2,
            CliError::Model(Error::ValidityWindow { .. }) => 3,
            CliError::Model(
                Error::Domain { .. }
                | Error::NonFinite { .. }
                | Error::Singular { .. }
                | Error::Profile(_)
                | Error::Scenario(_)
                | Error::Unsupported(_),
            ) => 2,
            CliError::Model(_) | CliError::Io { .. } => 1,
            CliError::Verification(_) => 4,
        }
    }
}

/// What a finished run left behind.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

/// Loads the config file (or the defaults) and applies command-line overrides.
pub fn resolve_config(options: &RunOptions) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    let (mut config, base) = match &options.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|source| CliError::ReadConfig { path: path.clone(), source })?;
            let config = RunConfig::from_toml(&text)
                .map_err(|source| CliError::ParseConfig { path: path.clone(), source })?;
            (config, path.parent().map(Path::to_path_buf))
        }
        None => (RunConfig::default(), None),
    };
    if let Some(t) = options.t_max {
        config.scenario.t_max = t;
    }
    if let Some(n) = options.grid_points {
        config.grids.space_points = n;
    }
    if let Some(drive) = &options.drive {
        config.scenario.drive = drive.clone();
    }
    if options.override_consistency {
        config.scenario.override_consistency = true;
    }
    if let Some(out) = &options.out {
        config.output.dir = Some(out.clone());
    }
    Ok((config, base))
}

struct RunDir {
    path: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    /// Creates the directory and removes a stale manifest, so an interrupted
    /// run never looks complete.
    fn prepare(path: PathBuf) -> Result<Self, CliError> {
        let io_err = |source| CliError::Io { path: path.clone(), source };
        fs::create_dir_all(&path).map_err(io_err)?;
        let manifest = path.join(MANIFEST_NAME);
        if manifest.exists() {
            fs::remove_file(&manifest).map_err(|source| CliError::Io { path: manifest.clone(), source })?;
        } else if fs::read_dir(&path).map_err(io_err)?.next().is_some() {
            eprintln!("note: {} holds an incomplete run (no manifest); overwriting", path.display());
        }
        Ok(Self { path, files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let target = self.path.join(name);
        fs::write(&target, contents).map_err(|source| CliError::Io { path: target, source })?;
        self.files.push(name.to_owned());
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let (config, base) = resolve_config(&cli.options)?;
    let scenario = config.scenario(base.as_deref())?;
    let mut solution = Solution::new(&scenario)?;
    if cli.options.corrupt_phase {
        solution = solution.with_phase_terms(PhaseTerms::DropMetricTerm);
    }
    let t_max = scenario.grid.t_end;
    let display = output::display_grid(&solution, t_max, config.grids.space_points)?;
    let mut dir = RunDir::prepare(config.output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)))?;

    let mut verification = None;
    match cli.command {
        Command::Simulate => {
            let reports = uncertainty_series(&solution, &output::output_mesh(t_max, config.grids.output_rate))?;
            dir.write("moments.csv", &output::moments_table(&reports))?;
            let snapshots = config.output.snapshots.iter().filter(|&&t| (0.0..=t_max).contains(&t));
            for (index, &t) in snapshots.enumerate() {
                dir.write(&format!("psi_t{index}.csv"), &output::snapshot_table(&solution, t, display)?)?;
            }
        }
        Command::Figures => {
            let reports = uncertainty_series(&solution, &output::output_mesh(t_max, config.grids.output_rate))?;
            dir.write("fig1a.csv", &output::variance_table(&reports))?;
            dir.write("fig1b.csv", &output::product_table(&reports))?;
            let times = output::output_mesh(t_max, config.grids.density_rate);
            dir.write("fig2.csv", &output::density_map_table(&solution, &times, display)?)?;
        }
        Command::Verify => {
            let settings = VerifySettings {
                propagation_dx: config.grids.propagation_dx,
                propagation_dt: config.grids.propagation_dt,
                space_points: config.grids.space_points,
            };
            let report = run_verification(&solution, &settings);
            let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            dir.write(REPORT_NAME, &json)?;
            verification = Some(report);
        }
    }

    let mut files = Vec::with_capacity(dir.files.len());
    for name in &dir.files {
        files.push(describe_file(&dir.path, name).map_err(|source| CliError::Io { path: dir.path.join(name), source })?);
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        command: cli.command.name().to_owned(),
        override_consistency: scenario.override_consistency,
        config,
        grids: GridSummary {
            time_steps: scenario.grid.n_steps,
            time_step: scenario.grid.step(),
            space_points: display.n_points,
            space_min: display.x_min,
            space_max: display.x_max,
        },
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let manifest_path = dir.path.join(MANIFEST_NAME);
    fs::write(&manifest_path, json).map_err(|source| CliError::Io { path: manifest_path, source })?;

    if let Some(report) = verification {
        if !report.passed {
            return Err(CliError::Verification(report.failures));
        }
    }
    Ok(RunSummary { dir: dir.path, manifest })
}
