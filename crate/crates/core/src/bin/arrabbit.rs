use std::path::PathBuf;
use std::process::ExitCode;

use arrabbit::cli::{error_report, run, Overrides, RunConfig};
use arrabbit::matrix_elements::ModelScenario;
use arrabbit::{Error, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arrabbit", version, about = "Angle-resolved RABBIT simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML config and write outputs.
    Run {
        config: PathBuf,
        /// Bound-free radial elements CSV (replaces the config's source).
        #[arg(long)]
        matrix_elements: Option<PathBuf>,
        /// Built-in model scenario (a, b or c).
        #[arg(long)]
        model: Option<ModelScenario>,
        /// Output directory; defaults to out/<config stem>.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn setup_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ARRABBIT_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            Error::Config(format!(
                "ARRABBIT_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<Option<PathBuf>> {
    setup_threads()?;
    match cli.command {
        Command::Validate { config } => {
            let cfg = RunConfig::load(&config)?;
            let problems = cfg.validate();
            if problems.is_empty() {
                println!(
                    "{}",
                    serde_json::json!({"status": "ok", "config": config.display().to_string()})
                );
                Ok(None)
            } else {
                Err(Error::Validation(problems.join("; ")))
            }
        }
        Command::Run {
            config,
            matrix_elements,
            model,
            out_dir,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            cfg.apply(&Overrides {
                matrix_elements,
                model,
            });
            let stem = config
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            let out = out_dir.unwrap_or_else(|| PathBuf::from("out").join(&stem));
            let name = config.display().to_string();
            match run(&cfg, &name, &out) {
                Ok(summary) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "status": "ok",
                            "out_dir": summary.out_dir.display().to_string(),
                            "manifest": summary.manifest.display().to_string(),
                            "files": summary.files.len(),
                        })
                    );
                    Ok(Some(out))
                }
                Err(e) => {
                    let report = error_report(&e);
                    let p = out.join("error.json");
                    let _ = std::fs::write(
                        &p,
                        serde_json::to_string_pretty(&report).unwrap_or_default(),
                    );
                    Err(e)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_report(&e));
            ExitCode::from(match e {
                Error::Validation(_) | Error::Config(_) | Error::Parse { .. } => 2,
                _ => 1,
            })
        }
    }
}
