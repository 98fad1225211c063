//! `trispin` — prepare three-qubit states, analyze their invariants exactly,
//! simulate the photon-counting experiment, estimate from counts with
//! bootstrap error bars, regenerate the bundled reference tables, and run the
//! verification suites.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trispin_cli::report::{self, Mode, OutputFormat};
use trispin_cli::tables::TableId;
use trispin_cli::verify::{run_suite, Suite};
use trispin_core::experiment::{counts_from_csv, counts_to_csv, simulate_counts};
use trispin_core::nonlocality::MeasurementDirections;
use trispin_core::states::FamilyParams;
use trispin_core::{Error as CoreError, C64};

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INCOMPLETE_DATA: u8 = 4;
const EXIT_VERIFICATION_FAILURE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "trispin",
    version,
    about = "Invariants, Bell nonlocality, and simulated counting experiments for pure three-qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FamilyArgs {
    /// State family: w, ghz or custom
    #[arg(long)]
    family: String,
    /// W-family angle φ in degrees
    #[arg(long)]
    phi: Option<f64>,
    /// W-family angle θ in degrees
    #[arg(long)]
    theta: Option<f64>,
    /// GHZ-family angle φ′ in degrees
    #[arg(long = "phi-prime")]
    phi_prime: Option<f64>,
    /// Custom amplitudes: 8 re,im pairs ordered by |abc⟩ with index 4a+2b+c
    #[arg(long, num_args = 8, value_name = "RE,IM")]
    amplitudes: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a state file for a W-class, GHZ-class or custom state
    Prepare {
        #[command(flatten)]
        family: FamilyArgs,
        /// Output path for the state JSON
        #[arg(long, default_value = "state.json")]
        out: PathBuf,
    },
    /// Exact invariant/nonlocality report for a state file
    Analyze {
        /// State JSON produced by `prepare`
        #[arg(long)]
        state: PathBuf,
        /// Optional directions JSON; replaces the optimal CHSH settings in
        /// the monogamy section
        #[arg(long)]
        directions: Option<PathBuf>,
        /// Output format (json)
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate Poissonian coincidence counts for all 27 settings
    Simulate {
        #[arg(long)]
        state: PathBuf,
        /// Mean counts per setting
        #[arg(long, default_value_t = 5000)]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Experimental: uniform ±jitter (degrees) on the preparation angles,
        /// modelling wave-plate misalignment; 0 disables
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Output path for the counts CSV
        #[arg(long, default_value = "counts.csv")]
        out: PathBuf,
    },
    /// Estimate invariants from a counts CSV, with bootstrap error bars
    Estimate {
        #[arg(long)]
        counts: PathBuf,
        /// Optional target state file; enables the tomography fidelity section
        #[arg(long)]
        state: Option<PathBuf>,
        /// Poissonian bootstrap resamples (at least 100)
        #[arg(long, default_value_t = 200)]
        resamples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output format (json)
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a bundled reference table (1, 2, 3, 5 or 6)
    Report {
        #[arg(long)]
        table: String,
        /// exact or simulated
        #[arg(long, default_value = "exact")]
        mode: String,
        #[arg(long, default_value_t = 5000)]
        shots: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        resamples: usize,
        /// json, csv or markdown
        #[arg(long, default_value = "markdown")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite over Haar-random states
    Verify {
        /// invariance, monogamy, ordering, chsh-optimality or
        /// estimator-consistency
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 10000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Where to dump a counterexample state on failure
        #[arg(long, default_value = "counterexample.json")]
        out: PathBuf,
    },
}

enum CliError {
    Core(CoreError),
    Io { path: PathBuf, error: std::io::Error },
    Usage(String),
    VerificationFailure,
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_parse() => EXIT_PARSE,
            CliError::Core(e) if e.is_incomplete_data() => EXIT_INCOMPLETE_DATA,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_INTERNAL,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::VerificationFailure => EXIT_VERIFICATION_FAILURE,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io { path, error } => format!("{}: {error}", path.display()),
            CliError::Usage(text) => text.clone(),
            CliError::VerificationFailure => "verification failed".into(),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|error| CliError::Io {
        path: path.to_path_buf(),
        error,
    })
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|error| CliError::Io {
        path: path.to_path_buf(),
        error,
    })
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_file(path, content)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn parse_amplitude(text: &str) -> Result<C64, CliError> {
    let (re, im) = text.split_once(',').ok_or_else(|| {
        CliError::Usage(format!(
            "amplitudes: expected \"re,im\" pairs, found {text:?}"
        ))
    })?;
    let parse = |part: &str| -> Result<f64, CliError> {
        part.trim().parse().map_err(|_| {
            CliError::Usage(format!("amplitudes: {part:?} is not a number"))
        })
    };
    Ok(C64::new(parse(re)?, parse(im)?))
}

fn family_params(args: &FamilyArgs) -> Result<FamilyParams, CliError> {
    let require = |name: &str, value: Option<f64>| -> Result<f64, CliError> {
        value.ok_or_else(|| {
            CliError::Usage(format!("family {:?} requires --{name}", args.family))
        })
    };
    let forbid = |name: &str, present: bool| -> Result<(), CliError> {
        if present {
            Err(CliError::Usage(format!(
                "--{name} is not valid for family {:?}",
                args.family
            )))
        } else {
            Ok(())
        }
    };
    match args.family.to_ascii_lowercase().as_str() {
        "w" => {
            forbid("phi-prime", args.phi_prime.is_some())?;
            forbid("amplitudes", args.amplitudes.is_some())?;
            Ok(FamilyParams::W {
                phi_deg: require("phi", args.phi)?,
                theta_deg: require("theta", args.theta)?,
            })
        }
        "ghz" => {
            forbid("phi", args.phi.is_some())?;
            forbid("theta", args.theta.is_some())?;
            forbid("amplitudes", args.amplitudes.is_some())?;
            Ok(FamilyParams::Ghz {
                phi_prime_deg: require("phi-prime", args.phi_prime)?,
            })
        }
        "custom" => {
            forbid("phi", args.phi.is_some())?;
            forbid("theta", args.theta.is_some())?;
            forbid("phi-prime", args.phi_prime.is_some())?;
            let raw = args.amplitudes.as_ref().ok_or_else(|| {
                CliError::Usage("family \"custom\" requires --amplitudes".into())
            })?;
            let mut amplitudes = [C64::new(0.0, 0.0); 8];
            for (slot, text) in amplitudes.iter_mut().zip(raw) {
                *slot = parse_amplitude(text)?;
            }
            Ok(FamilyParams::Custom { amplitudes })
        }
        other => Err(CliError::Usage(format!(
            "unknown family {other:?} (expected w, ghz or custom)"
        ))),
    }
}

fn load_state(path: &Path) -> Result<FamilyParams, CliError> {
    Ok(FamilyParams::from_json(&read_file(path)?)?)
}

fn require_json(format: &str) -> Result<(), CliError> {
    match OutputFormat::parse(format)? {
        OutputFormat::Json => Ok(()),
        _ => Err(CliError::Usage(format!(
            "format {format:?} is not supported for this command (use json)"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare { family, out } => {
            let params = family_params(&family)?;
            let state = params.state()?; // validates custom amplitudes
            write_file(&out, &params.to_json())?;
            println!(
                "family {}: norm {:.12}, state file {}",
                params.family_label(),
                state.norm(),
                out.display()
            );
            Ok(())
        }
        Command::Analyze {
            state,
            directions,
            format,
            out,
        } => {
            require_json(&format)?;
            let params = load_state(&state)?;
            let dirs = match directions {
                Some(path) => Some(MeasurementDirections::from_json(&read_file(&path)?)?),
                None => None,
            };
            let report = report::analyze(&params, dirs.as_ref())?;
            let json = serde_json::to_string_pretty(&report).expect("report serialization");
            emit(out.as_deref(), &json)
        }
        Command::Simulate {
            state,
            shots,
            seed,
            jitter,
            out,
        } => {
            if shots == 0 {
                return Err(CliError::Usage("--shots must be at least 1".into()));
            }
            let params = load_state(&state)?;
            let prepared = if jitter > 0.0 {
                params.state_with_jitter(jitter, seed)?
            } else {
                params.state()?
            };
            let records = simulate_counts(&prepared, shots, seed);
            write_file(&out, &counts_to_csv(&records))?;
            let total: u64 = records.iter().map(|r| r.total()).sum();
            println!(
                "simulated {} settings x {} shots (seed {}), total counts {} -> {}",
                records.len(),
                shots,
                seed,
                total,
                out.display()
            );
            Ok(())
        }
        Command::Estimate {
            counts,
            state,
            resamples,
            seed,
            format,
            out,
        } => {
            require_json(&format)?;
            let records = counts_from_csv(&read_file(&counts)?)?;
            let target = match state {
                Some(path) => Some(load_state(&path)?),
                None => None,
            };
            let report = report::estimate(&records, resamples, seed, target.as_ref())?;
            let json = serde_json::to_string_pretty(&report).expect("report serialization");
            emit(out.as_deref(), &json)
        }
        Command::Report {
            table,
            mode,
            shots,
            seed,
            resamples,
            format,
            out,
        } => {
            let id = TableId::parse(&table)?;
            let mode = Mode::parse(&mode)?;
            let format = OutputFormat::parse(&format)?;
            let report = report::table_report(id, mode, shots, seed, resamples)?;
            emit(out.as_deref(), &report.render(format))
        }
        Command::Verify {
            suite,
            trials,
            seed,
            out,
        } => {
            let suite = Suite::parse(&suite)?;
            if trials == 0 {
                return Err(CliError::Usage("--trials must be at least 1".into()));
            }
            let outcome = run_suite(suite, trials, seed)?;
            println!(
                "suite {} over {} Haar-random states (seed {seed}):",
                outcome.suite.label(),
                outcome.trials
            );
            for line in &outcome.lines {
                println!("  {line}");
            }
            if outcome.passed {
                println!("PASS");
                Ok(())
            } else {
                if let Some(counterexample) = &outcome.counterexample {
                    write_file(&out, counterexample)?;
                    eprintln!("counterexample state written to {}", out.display());
                }
                println!("FAIL");
                Err(CliError::VerificationFailure)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {}", error.message());
            ExitCode::from(error.exit_code())
        }
    }
}
