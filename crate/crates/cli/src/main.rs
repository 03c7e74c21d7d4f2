use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use litmus_core::models::{make_benchmark, BenchmarkName};
use litmus_core::pipeline::{self, io, DataSource, LitmusReport, PipelineConfig};
use litmus_core::rdc::{rdc, RdcParams};

/// Exit code when Part 1 stops at `max_batches` without converging; clap
/// already uses 2 for usage errors.
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "litmus", version, about = "Decide whether learned control can beat MPC on a system")]
struct Cli {
    /// Worker threads; affects speed only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in benchmark; replaces the system named in the config.
    #[arg(long)]
    benchmark: Option<BenchmarkName>,
    /// Master seed; replaces the one in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "LITMUS_OUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate closed-loop plant trajectories and write them to a file.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Number of trajectories (default: the benchmark's n_m).
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Identify the disturbance set and check conformance.
    Identify {
        #[command(flatten)]
        common: Common,
        /// Read measured trajectories instead of generating them.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the full two-part test and write the report.
    Test {
        #[command(flatten)]
        common: Common,
        /// Read measured trajectories instead of generating them.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Dependence between two groups of CSV columns.
    Deps {
        /// CSV file with a header row.
        csv: PathBuf,
        /// Columns of the first variable (comma separated names or indices).
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        /// Columns of the second variable.
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random features per side.
        #[arg(long)]
        k: Option<usize>,
        /// Variance of the random projection weights.
        #[arg(long)]
        s: Option<f64>,
    },
    /// Rebuild the CSV plot data from a saved report.
    Report {
        report: PathBuf,
        /// Output directory (default: next to the report).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print benchmark cards as markdown.
    Cards {
        #[arg(long)]
        benchmark: Option<BenchmarkName>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_config(common: &Common, data: Option<&Path>) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => match common.benchmark {
            Some(name) => PipelineConfig::for_benchmark(name),
            None => bail!("pass --config or --benchmark"),
        },
    };
    if let Some(name) = common.benchmark {
        cfg.benchmark = Some(name);
        cfg.linear_system = None;
    }
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(path) = data {
        cfg.data = DataSource::File { path: path.to_path_buf() };
    }
    if let Some(out) = &common.out {
        cfg.output.dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &PipelineConfig) -> PathBuf {
    cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("litmus-out"))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate { common, trajectories } => {
            let mut cfg = resolve_config(&common, None)?;
            if trajectories.is_some() {
                cfg.data = DataSource::Generate { trajectories };
                cfg.validate()?;
            }
            let system = cfg.build_system()?;
            let n = cfg.trajectories(&system);
            let data = pipeline::generate_data(&system, n, cfg.master_seed)?;
            let path = out_dir(&cfg).join("data.jsonl");
            io::write_trajectories(&path, &data)?;
            println!("wrote {} trajectories of {} to {}", data.len(), system.name, path.display());
        }
        Command::Identify { common, data } => {
            let cfg = resolve_config(&common, data.as_deref())?;
            let system = cfg.build_system()?;
            let (measured, _) = pipeline::load_data(&cfg, &system)?;
            let id = pipeline::identify(&cfg, &system, &measured)?;
            let dir = out_dir(&cfg);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("identification.json");
            let text = serde_json::to_string_pretty(&id)? + "\n";
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("W = {}", serde_json::to_string(&id.disturbance_set)?);
            println!(
                "{} rows checked, {}",
                id.conformance.checked_rows,
                if id.conformance.conformant { "conformant" } else { "NOT conformant" }
            );
            println!("largest error outside the disturbed indices: {:e}", id.conformance.max_undisturbed_residual);
            if !id.conformance.conformant {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Test { common, data } => {
            let cfg = resolve_config(&common, data.as_deref())?;
            let system = cfg.build_system()?;
            let (measured, origin) = pipeline::load_data(&cfg, &system)?;
            let dir = out_dir(&cfg);
            if matches!(cfg.data, DataSource::Generate { .. }) {
                io::write_trajectories(&dir.join("data.jsonl"), &measured)?;
            }
            let report = pipeline::run_pipeline_on(&cfg, &system, &measured, origin)?;
            pipeline::write_outputs(&dir, &report, cfg.output.residuals_csv)?;
            println!("{}", report.summary());
            println!("report written to {}", dir.join("report.json").display());
            if !report.knowledge.converged {
                eprintln!("warning: eta did not converge within max_batches");
                return Ok(ExitCode::from(EXIT_NOT_CONVERGED));
            }
        }
        Command::Deps { csv, x, y, seed, k, s } => {
            let (_, xm) = io::read_csv_columns(&csv, Some(&x))?;
            let (_, ym) = io::read_csv_columns(&csv, Some(&y))?;
            let defaults = RdcParams::default();
            let params = RdcParams {
                k: k.unwrap_or(defaults.k),
                s: s.unwrap_or(defaults.s),
                seed,
                ..defaults
            };
            let rho = rdc(&xm, &ym, &params)?;
            println!("{rho:?}");
        }
        Command::Report { report, out } => {
            let loaded = LitmusReport::load(&report)?;
            let dir = out.unwrap_or_else(|| report.parent().map(Path::to_path_buf).unwrap_or_default());
            pipeline::write_plot_data(&dir, &loaded)?;
            println!("{}", loaded.summary());
        }
        Command::Cards { benchmark } => {
            let names = match benchmark {
                Some(b) => vec![b],
                None => BenchmarkName::ALL.to_vec(),
            };
            for name in names {
                println!("{}", make_benchmark(name)?.card.to_markdown());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

