use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gecens::{
    expectation_table, fit_em, fit_em_chen, fit_ml, generate, EmConfig, GeParams,
    InspectionSchedule, RemovalPlan,
};
use gecens_cli::io::{self, parse_list, IoError};
use gecens_cli::study::{self, StudyConfig};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_IMPOSSIBLE: u8 = 4;

/// Generalized exponential estimation from progressively type-I
/// interval-censored data.
#[derive(Debug, Parser)]
#[command(name = "gecens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitMethod {
    Em,
    Ml,
    EmChen,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one censored life test and write it as CSV.
    Generate {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n: u64,
        /// Comma-separated inspection times.
        #[arg(long)]
        times: String,
        /// Comma-separated removal percentages, last one 1.
        #[arg(long)]
        plan: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a dataset CSV and print the result as JSON.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Optional check that the file uses exactly these inspection times.
        #[arg(long)]
        times: Option<String>,
        #[arg(long, value_enum, default_value = "em")]
        method: FitMethod,
        #[arg(long, default_value_t = 1.0)]
        start_alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        start_lambda: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 101)]
        max_iter: usize,
    },
    /// Print the E-step expectation table as CSV.
    Estep {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        times: String,
    },
    /// Run a Monte Carlo study described by a JSON config.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the published simulation design.
    PaperStudy {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Io(IoError),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Format { .. } => Failure::Usage(e.to_string()),
            IoError::Io { .. } => Failure::Io(e),
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn schedule_arg(times: &str) -> Result<InspectionSchedule, Failure> {
    InspectionSchedule::new(parse_list(times).map_err(usage)?).map_err(usage)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Generate {
            alpha,
            lambda,
            n,
            times,
            plan,
            seed,
            out,
        } => {
            let params = GeParams::new(alpha, lambda).map_err(usage)?;
            let schedule = schedule_arg(&times)?;
            let plan = RemovalPlan::new(parse_list(&plan).map_err(usage)?).map_err(usage)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = generate(n, &params, &schedule, &plan, &mut rng).map_err(usage)?;
            io::write_atomic(&out, &io::dataset_to_csv(&data, &schedule))?;
            let failures: u64 = data.failures().iter().sum();
            let removals: u64 = data.removals().iter().sum();
            println!("n = {} = {failures} + {removals}", data.n());
            Ok(0)
        }
        Command::Fit {
            data,
            times,
            method,
            start_alpha,
            start_lambda,
            tol,
            max_iter,
        } => {
            let (dataset, schedule) = io::read_dataset(&data)?;
            if let Some(times) = times {
                if schedule_arg(&times)? != schedule {
                    return Err(usage(
                        "--times does not match the inspection times in the data file",
                    ));
                }
            }
            let config = EmConfig {
                start: GeParams::new(start_alpha, start_lambda).map_err(usage)?,
                tol,
                max_iter,
            };
            config.validate().map_err(usage)?;
            let fit = match method {
                FitMethod::Em => fit_em(&dataset, &schedule, &config),
                FitMethod::Ml => fit_ml(&dataset, &schedule, &config),
                FitMethod::EmChen => fit_em_chen(&dataset, &schedule, &config),
            };
            let fit = match fit {
                Ok(fit) => fit,
                Err(e @ (gecens::Error::Truncation { .. } | gecens::Error::Truncated(_))) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_IMPOSSIBLE);
                }
                Err(e) => return Err(usage(e)),
            };
            println!(
                "{}",
                serde_json::to_string(&fit).expect("serializable result")
            );
            if fit.loglik == f64::NEG_INFINITY {
                eprintln!("error: the data are impossible under the fitted parameters");
                Ok(EXIT_IMPOSSIBLE)
            } else if fit.converged {
                Ok(0)
            } else {
                eprintln!(
                    "warning: {} did not converge ({:?})",
                    fit.method, fit.failure
                );
                Ok(EXIT_NOT_CONVERGED)
            }
        }
        Command::Estep {
            alpha,
            lambda,
            times,
        } => {
            let params = GeParams::new(alpha, lambda).map_err(usage)?;
            let schedule = schedule_arg(&times)?;
            let rows = expectation_table(&params, &schedule).map_err(usage)?;
            println!("interval,t_lower,t_upper,e1,e2,e3,e4");
            for (row, (lower, upper)) in rows.iter().zip(schedule.intervals()) {
                println!(
                    "{},{lower},{upper},{},{},{},{}",
                    row.interval, row.e1, row.e2, row.e3, row.e4
                );
            }
            Ok(0)
        }
        Command::Study {
            config,
            out_dir,
            threads,
        } => {
            let config: StudyConfig = io::read_json(&config)?;
            run_study(&config, &out_dir, threads)
        }
        Command::PaperStudy {
            seed,
            out_dir,
            replications,
            threads,
        } => {
            let mut config = study::paper_config(seed);
            if let Some(r) = replications {
                config.replications = r;
            }
            run_study(&config, &out_dir, threads)
        }
    }
}

fn run_study(
    config: &StudyConfig,
    out_dir: &std::path::Path,
    threads: Option<usize>,
) -> Result<u8, Failure> {
    std::fs::create_dir_all(out_dir).map_err(|source| {
        Failure::Io(IoError::Io {
            path: out_dir.to_path_buf(),
            source,
        })
    })?;
    let output = study::run_study(config, threads).map_err(usage)?;
    let written = study::write_outputs(&output, out_dir)?;
    print!("{}", study::summary_csv(&output.summary));
    eprintln!("wrote {} files to {}", written.len(), out_dir.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
