mod commands;
mod config;
mod csvio;
mod dump;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use parafree_core::functionals::ConstantsMode;

/// Numerical laboratory for the parabolic thin-obstacle problem: solve
/// instances, evaluate the weighted monotonicity functionals, classify the
/// free boundary, and run the verification experiments.
#[derive(Parser)]
#[command(name = "parafree", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and persist the field dump.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the frequency/Weiss curve on a solved field.
    Functionals {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated radii overriding the configured ladder.
        #[arg(long)]
        radii: Option<String>,
        /// Constants mode: practical | exact.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Extract and classify free-boundary points.
    Classify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification experiments (calibration gate first).
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated experiment list overriding the config.
        #[arg(long)]
        experiments: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated radii overriding the configured ladder.
        #[arg(long)]
        radii: Option<String>,
    },
    /// Summarize a reports directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<ConstantsMode, String> {
    match s {
        "practical" => Ok(ConstantsMode::Practical),
        "exact" => Ok(ConstantsMode::TheoremExact),
        other => Err(format!("mode must be 'practical' or 'exact', got '{other}'")),
    }
}

fn apply_overrides(
    cfg: &mut RunConfig,
    seed: Option<u64>,
    mode: Option<&str>,
    jobs: Option<usize>,
    radii: Option<&str>,
) -> Result<(), String> {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = mode {
        cfg.mode = parse_mode(m)?;
        cfg.params.mode = cfg.mode;
    }
    if let Some(j) = jobs {
        cfg.jobs = j.max(1);
    }
    if let Some(r) = radii {
        let mut list = Vec::new();
        for part in r.split(',') {
            list.push(
                part.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad radius '{part}'"))?,
            );
        }
        cfg.radii.explicit = Some(list);
    }
    Ok(())
}

fn run() -> Result<i32, (i32, String)> {
    let cli = Cli::parse();
    let usage = |msg: String| (2, msg);
    let runtime = |msg: String| (1, msg);
    match cli.command {
        Command::Solve { config, out, seed } => {
            let mut cfg = RunConfig::load(&config).map_err(|e| usage(format!("{e:#}")))?;
            apply_overrides(&mut cfg, seed, None, None, None).map_err(usage)?;
            let out = commands::out_dir(&cfg.out, out.as_deref());
            commands::cmd_solve(&cfg, &out).map_err(|e| runtime(format!("{e:#}")))?;
            Ok(0)
        }
        Command::Functionals {
            config,
            solution,
            out,
            radii,
            mode,
        } => {
            let mut cfg = RunConfig::load(&config).map_err(|e| usage(format!("{e:#}")))?;
            apply_overrides(&mut cfg, None, mode.as_deref(), None, radii.as_deref())
                .map_err(usage)?;
            let out = commands::out_dir(&cfg.out, out.as_deref());
            commands::cmd_functionals(&cfg, &solution, &out)
                .map_err(|e| runtime(format!("{e:#}")))
        }
        Command::Classify {
            config,
            solution,
            out,
        } => {
            let cfg = RunConfig::load(&config).map_err(|e| usage(format!("{e:#}")))?;
            let out = commands::out_dir(&cfg.out, out.as_deref());
            commands::cmd_classify(&cfg, &solution, &out)
                .map_err(|e| runtime(format!("{e:#}")))
        }
        Command::Verify {
            config,
            solution,
            out,
            experiments,
            mode,
            jobs,
            seed,
            radii,
        } => {
            let mut cfg = RunConfig::load(&config).map_err(|e| usage(format!("{e:#}")))?;
            apply_overrides(&mut cfg, seed, mode.as_deref(), jobs, radii.as_deref())
                .map_err(usage)?;
            let exps: Vec<String> = match experiments {
                Some(list) => {
                    let list: Vec<String> =
                        list.split(',').map(|s| s.trim().to_string()).collect();
                    for e in &list {
                        if !config::KNOWN_EXPERIMENTS.contains(&e.as_str()) {
                            return Err(usage(format!(
                                "unknown experiment '{e}' (known: {:?})",
                                config::KNOWN_EXPERIMENTS
                            )));
                        }
                    }
                    list
                }
                None => cfg.experiments.clone(),
            };
            let out = commands::out_dir(&cfg.out, out.as_deref());
            commands::cmd_verify(&cfg, &solution, &exps, &out)
                .map_err(|e| runtime(format!("{e:#}")))
        }
        Command::Report { dir } => commands::cmd_report(&dir).map_err(|e| runtime(format!("{e:#}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
