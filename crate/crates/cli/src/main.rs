//! Batch driver for the warped-torus convergence pipelines.
//!
//! `run` executes one configured sequence and writes report.json,
//! report.csv, and plotdata/*.dat; `sweep` re-runs the config across a
//! list of values for one parameter and adds a summary.csv. Exit codes:
//! 0 = CONVERGES, 2 = INCONCLUSIVE, 3 = HYPOTHESIS-FAILURE, 1 = any
//! execution or configuration error.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use warplab_core::doubly::{self, DoublyPipelineConfig};
use warplab_core::report::{ConvergenceReport, PipelineError};
use warplab_core::singly::{self, SinglyPipelineConfig};

use config::{Case, ChecksMode, RunConfig};
use output::SweepRow;

#[derive(Parser)]
#[command(name = "warplab", version, about = "Warped-torus convergence verification driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one convergence verification from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the shortest-path sweeps.
        #[arg(long)]
        workers: Option<usize>,
        /// Suppress progress output (errors still go to stderr).
        #[arg(long)]
        quiet: bool,
    },
    /// Re-run the config once per value of one varied parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Parameter to vary: resolution, base_amplitude, A0, D0, or V0.
        #[arg(long)]
        vary: Vary,
        /// Comma-separated values for the varied parameter.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Debug, Clone, Copy)]
enum Vary {
    /// Distance-lattice resolution per axis.
    Resolution,
    BaseAmplitude,
    A0,
    D0,
    V0,
}

impl Vary {
    fn name(self) -> &'static str {
        match self {
            Vary::Resolution => "resolution",
            Vary::BaseAmplitude => "base_amplitude",
            Vary::A0 => "A0",
            Vary::D0 => "D0",
            Vary::V0 => "V0",
        }
    }
}

impl FromStr for Vary {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "resolution" => Ok(Vary::Resolution),
            "base_amplitude" => Ok(Vary::BaseAmplitude),
            "A0" => Ok(Vary::A0),
            "D0" => Ok(Vary::D0),
            "V0" => Ok(Vary::V0),
            other => Err(format!(
                "unknown parameter {other:?}; expected resolution, base_amplitude, A0, D0, or V0"
            )),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let code = match cli.command {
        Command::Run { config, out, workers, quiet } => run(config, out, workers, quiet),
        Command::Sweep { config, vary, values, out, workers, quiet } => {
            sweep(config, vary, &values, out, workers, quiet)
        }
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}

fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        // The global pool can only be installed once per process; a
        // second call (e.g. in sweeps) is a harmless no-op.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(cfg: &RunConfig) -> Result<ConvergenceReport, PipelineError> {
    let with_lattice = cfg.checks == ChecksMode::Full;
    match cfg.case {
        Case::Doubly => doubly::run_pipeline(&DoublyPipelineConfig {
            spec: cfg.spec.clone(),
            bounds: cfg.hypotheses,
            grid_n: cfg.resolution.grid_1d,
            lattice_n: cfg.resolution.lattice,
            with_lattice,
            constants: cfg.constants,
        }),
        Case::Singly => singly::run_pipeline(&SinglyPipelineConfig {
            spec: cfg.spec.clone(),
            bounds: cfg.hypotheses,
            grid: (cfg.resolution.grid_2d[0], cfg.resolution.grid_2d[1]),
            lattice_n: cfg.resolution.lattice,
            with_lattice,
            level_count: cfg.levels,
            slabs: cfg.slabs_or_default(),
            constants: cfg.constants,
        }),
    }
}

fn run(path: PathBuf, out: Option<PathBuf>, workers: Option<usize>, quiet: bool) -> i32 {
    let mut cfg = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return 1;
        }
    };
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    init_workers(cfg.workers);

    let report = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("run failed: {e}");
            return 1;
        }
    };
    if let Err(e) = output::write_report(&cfg.output_dir, &report) {
        eprintln!("write failed: {e:#}");
        return 1;
    }
    if !quiet {
        println!(
            "{} case, {} rows -> {}",
            report.family,
            report.rows.len(),
            report.verdict.label()
        );
        for r in &report.verdict_reasons {
            println!("  - {r}");
        }
        println!("outputs in {}", cfg.output_dir.display());
    }
    report.verdict.exit_code()
}

fn apply_value(cfg: &mut RunConfig, vary: Vary, raw: &str) -> Result<(), String> {
    match vary {
        Vary::Resolution => {
            cfg.resolution.lattice =
                raw.parse::<usize>().map_err(|e| format!("resolution {raw:?}: {e}"))?;
        }
        Vary::BaseAmplitude => {
            cfg.spec.base_amplitude =
                raw.parse::<f64>().map_err(|e| format!("base_amplitude {raw:?}: {e}"))?;
        }
        Vary::A0 => {
            cfg.hypotheses.a0 = raw.parse::<f64>().map_err(|e| format!("A0 {raw:?}: {e}"))?;
        }
        Vary::D0 => {
            cfg.hypotheses.d0 = raw.parse::<f64>().map_err(|e| format!("D0 {raw:?}: {e}"))?;
        }
        Vary::V0 => {
            cfg.hypotheses.v0 = raw.parse::<f64>().map_err(|e| format!("V0 {raw:?}: {e}"))?;
        }
    }
    cfg.validate().map_err(|e| e.to_string())
}

fn sweep(
    path: PathBuf,
    vary: Vary,
    values: &str,
    out: Option<PathBuf>,
    workers: Option<usize>,
    quiet: bool,
) -> i32 {
    let base = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return 1;
        }
    };
    let parsed: Vec<&str> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if parsed.is_empty() {
        eprintln!("sweep needs at least one value");
        return 1;
    }
    let base_out = out.unwrap_or_else(|| base.output_dir.clone());
    init_workers(workers.or(base.workers));

    let mut rows = Vec::new();
    let mut worst = 0;
    for raw in parsed {
        let mut cfg = base.clone();
        cfg.output_dir = base_out.join(format!("{}-{raw}", vary.name()));
        if let Err(e) = apply_value(&mut cfg, vary, raw) {
            eprintln!("sweep value error: {e}");
            return 1;
        }
        let report = match execute(&cfg) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("sweep value {raw} failed: {e}");
                return 1;
            }
        };
        if let Err(e) = output::write_report(&cfg.output_dir, &report) {
            eprintln!("write failed: {e:#}");
            return 1;
        }
        let last = report.rows.last();
        rows.push(SweepRow {
            value: raw.to_string(),
            verdict: report.verdict.label().to_string(),
            exit_code: report.verdict.exit_code(),
            final_d_unif: last.and_then(|r| r.d_unif),
            final_diameter: last.and_then(|r| r.diameter),
        });
        if !quiet {
            println!("{} = {raw}: {}", vary.name(), report.verdict.label());
        }
        worst = worst.max(report.verdict.exit_code());
    }
    if let Err(e) = output::write_sweep_summary(&base_out, vary.name(), &rows) {
        eprintln!("write failed: {e:#}");
        return 1;
    }
    if !quiet {
        println!("summary in {}", base_out.join("summary.csv").display());
    }
    worst
}
