use affine_walk_lab::{acceptance, config::LabConfig, experiments, output};
use anyhow::Context;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Reproducible experiment runner for the affine-group walk laboratory.
///
/// Run `affine-walk-lab list` to see the experiments, `affine-walk-lab
/// default-config` to print the full configuration schema with defaults,
/// and `affine-walk-lab acceptance` to execute the acceptance gate.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Experiment name (see `list`), or `acceptance`, `list`,
    /// `default-config`.
    experiment: String,
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread override (0 = library default).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for report files.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => LabConfig::load(path)
            .with_context(|| format!("loading config from {}", path.display()))?,
        None => LabConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }

    match cli.experiment.as_str() {
        "list" => {
            for name in experiments::EXPERIMENTS {
                println!("{name}");
            }
            println!("acceptance");
            Ok(ExitCode::SUCCESS)
        }
        "default-config" => {
            print!("{}", LabConfig::default().to_toml());
            Ok(ExitCode::SUCCESS)
        }
        "acceptance" => {
            cfg.validate()?;
            let outcomes = acceptance::run_all(&cfg);
            let report = acceptance::render_report(&cfg, &outcomes);
            print!("{report}");
            let path = output::write_report(&cli.out, "acceptance.txt", &report)?;
            eprintln!("wrote {}", path.display());
            if acceptance::all_passed(&outcomes) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        name => {
            let files = experiments::run_experiment(name, &cfg, &cli.out)?;
            for file in files {
                println!("wrote {}", file.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
