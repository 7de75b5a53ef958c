use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use shadow_hopf::config::ExperimentConfig;
use shadow_hopf_cli::exact::{exact_record, ExactInput};
use shadow_hopf_cli::reproduce::{reproduce_all, resolve_presets};
use shadow_hopf_cli::run::{
    analyze, read_trajectory, simulate, AnalysisOptions, ExactPeriod, DEFAULT_SKIP,
};
use shadow_hopf_cli::{exit_code, output_root, UsageError, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

/// Exact Hopf data, simulation and cross-validation for the shadow
/// reaction-diffusion system.
///
/// Outputs go under $SHADOW_HOPF_OUT (default `out`) unless a directory is given.
#[derive(Parser, Debug)]
#[command(name = "shadow-hopf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print closed-form Hopf data of the n-layer stationary solution.
    Exact {
        #[command(flatten)]
        point: PointArgs,
        /// Also classify the stability of the solution at this tau.
        #[arg(long)]
        tau: Option<f64>,
        /// Print a CSV header and row instead of key=value lines.
        #[arg(long)]
        csv: bool,
    },
    /// Run the PDE from a key=value config file.
    Simulate {
        config: PathBuf,
        /// Output directory [default: $SHADOW_HOPF_OUT/<config name>].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract periods and layer anti-phase from a trajectory CSV.
    Analyze {
        trajectory: PathBuf,
        /// Exact period to compare against.
        #[arg(long, conflicts_with = "eps")]
        exact_period: Option<f64>,
        /// Compute the exact period from these parameters instead.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Initial time span ignored by period extraction.
        #[arg(long, default_value_t = DEFAULT_SKIP)]
        skip: f64,
        /// Anti-phase window start.
        #[arg(long, default_value_t = 0.0)]
        window_start: f64,
        /// Anti-phase window end.
        #[arg(long, default_value_t = 200.0)]
        window_end: f64,
        /// Output directory [default: next to the trajectory].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce named experiments: a1 b1 c1 d1 fig4 fig5 sweep, or all.
    Reproduce {
        #[arg(required = true)]
        presets: Vec<String>,
        /// Output root [default: $SHADOW_HOPF_OUT].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Exact { point, tau, csv } => {
            let input = ExactInput {
                eps: point.eps,
                n: point.n,
                alpha: point.alpha,
                beta: point.beta,
                gamma: point.gamma,
                tau,
            };
            let (record, code) = exact_record(&input)?;
            print!("{}", if csv { record.to_csv() } else { record.to_kv() });
            if code != EXIT_OK {
                eprintln!("error: hypothesis chi_n < delta violated; Hopf data undefined");
            }
            Ok(code)
        }
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| output_root().join(stem(&config)));
            let sim = simulate(&cfg, &dir)?;
            print!("{}", sim.summary.to_kv());
            eprintln!("wrote {}", dir.display());
            Ok(EXIT_OK)
        }
        Command::Analyze {
            trajectory,
            exact_period,
            eps,
            n,
            alpha,
            beta,
            gamma,
            skip,
            window_start,
            window_end,
            out,
        } => {
            let source = match (exact_period, eps) {
                (Some(p), _) => ExactPeriod::Given(p),
                (None, Some(eps)) => ExactPeriod::Computed {
                    eps,
                    n,
                    alpha,
                    beta,
                    gamma,
                },
                (None, None) => {
                    return Err(UsageError("give --exact-period or --eps".into()).into())
                }
            };
            let exact = source.resolve()?;
            let traj = read_trajectory(&trajectory)?;
            let opts = AnalysisOptions {
                exact_period: exact,
                skip,
                window: (window_start, window_end),
            };
            let result = analyze(&traj, &opts);
            let dir = out.unwrap_or_else(|| {
                trajectory
                    .parent()
                    .map(Path::to_path_buf)
                    .unwrap_or_default()
            });
            result.write(&dir, exact)?;
            print!("{}", result.record.to_kv());
            result.require_periods(&traj, skip)?;
            Ok(EXIT_OK)
        }
        Command::Reproduce { presets, out } => {
            let names = resolve_presets(&presets)?;
            let root = out.unwrap_or_else(output_root);
            let mut code = EXIT_OK;
            for (name, result) in names.iter().zip(reproduce_all(&names, &root)) {
                match result {
                    Ok(report) => {
                        println!("[{name}] {}", report.dir.display());
                        for c in &report.checks {
                            println!("  {c}");
                        }
                        if !report.pass() {
                            code = EXIT_FAILURE;
                        }
                    }
                    Err(e) => {
                        eprintln!("[{name}] error: {e:#}");
                        code = code.max(exit_code(&e));
                    }
                }
            }
            Ok(code)
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}
