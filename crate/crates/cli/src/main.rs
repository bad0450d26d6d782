//! Runs the sparse identification experiments and writes MSD curves.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sparse_lms::harness::{msd_in_db, run_monte_carlo, sweep_sparsity, MonteCarloResult};
use sparse_lms::presets::{build_preset, verify_preset, Preset, SWEEP_RHO};
use sparse_lms::report;

use crate::config::{parse_assignment, ExperimentConfig, Format, PresetChoice};

#[derive(Parser)]
#[command(name = "sparse-lms", version, about = "Sparse system identification with gradient-compared lp-LMS filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write per-iteration MSD curves.
    Run(RunArgs),
    /// Steady-state MSD across sparsity levels with a fixed attractor weight.
    SweepSparsity(SweepArgs),
    /// Print a preset as a scenario file.
    PrintPreset {
        #[arg(long, value_enum)]
        preset: PresetChoice,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, value_enum)]
    preset: Option<PresetChoice>,
    /// Scenario file (TOML), only with `--preset custom`.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, env = "SPARSE_LMS_SEED")]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override a scenario field, e.g. `--set params.rho.stage2=0.0002`.
    #[arg(long = "set", value_parser = parse_assignment)]
    set: Vec<(String, String)>,
}

impl CommonArgs {
    fn config(&self, default: Option<PresetChoice>) -> Result<ExperimentConfig> {
        let preset = match (self.preset, &self.scenario, default) {
            (Some(p), _, _) => p,
            (None, Some(_), _) => PresetChoice::Custom,
            (None, None, Some(p)) => p,
            (None, None, None) => bail!("either --preset or --scenario is required"),
        };
        let mut overrides = self.set.clone();
        if let Some(runs) = self.runs {
            overrides.push(("runs".into(), runs.to_string()));
        }
        if let Some(seed) = self.seed {
            overrides.push(("seed".into(), seed.to_string()));
        }
        Ok(ExperimentConfig {
            preset,
            scenario_file: self.scenario.clone(),
            overrides,
            output_path: self.out.clone(),
            format: self.format,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Nonzero tap counts to test; defaults to every count from 1 to N.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<usize>,
    #[arg(long, default_value_t = SWEEP_RHO)]
    rho: f64,
}

fn main() {
    if let Err(e) = run_cli() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run_cli() -> Result<()> {
    for p in Preset::ALL {
        verify_preset(p, &build_preset(p))?;
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(&args.common.config(None)?),
        Command::SweepSparsity(args) => sweep(&args),
        Command::PrintPreset { preset } => {
            let p = preset
                .preset()
                .context("custom is not a built-in preset")?;
            print!("{}", build_preset(p).to_toml_string());
            Ok(())
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn run(config: &ExperimentConfig) -> Result<()> {
    let scenario = config.scenario()?;
    let result = run_monte_carlo(&scenario)?;
    let mut out = open_output(config.output_path.as_deref())?;
    match config.format {
        Format::Csv => {
            report::write_run_csv(&result, &mut out)?;
            if let Some(path) = &config.output_path {
                let summary = summary_path(path);
                let file = File::create(&summary)
                    .with_context(|| format!("creating {}", summary.display()))?;
                report::write_summary_csv(&result, BufWriter::new(file))?;
            }
        }
        Format::Json => report::write_run_json(&result, &mut out)?,
    }
    out.flush()?;
    print_summary(&result);
    Ok(())
}

fn print_summary(result: &MonteCarloResult) {
    eprintln!(
        "{}: {} runs, seed {}; steady-state MSD (dB)",
        result.scenario, result.runs, result.master_seed
    );
    for (s, sr) in result.stage_sparsity.iter().enumerate() {
        let cells: Vec<String> = result
            .curves
            .iter()
            .map(|c| {
                let db = msd_in_db(c.steady_state_msd_per_stage[s]).unwrap_or(f64::NEG_INFINITY);
                format!("{}={db:.2}", c.algorithm)
            })
            .collect();
        eprintln!("  stage {} (sr {sr:.4}): {}", s + 1, cells.join("  "));
    }
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let config = args.common.config(Some(PresetChoice::Example1))?;
    let base = config.scenario()?;
    let grid: Vec<usize> = if args.grid.is_empty() {
        (1..=base.n_taps()).collect()
    } else {
        args.grid.clone()
    };
    let result = sweep_sparsity(&base, &grid, args.rho)?;
    let mut out = open_output(config.output_path.as_deref())?;
    match config.format {
        Format::Csv => report::write_sweep_csv(&result, &mut out)?,
        Format::Json => report::write_sweep_json(&result, &mut out)?,
    }
    out.flush()?;
    Ok(())
}
