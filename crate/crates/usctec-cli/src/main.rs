//! `usctec`: schedule, place, and verify elastic coded matrix
//! multiplications from a JSON system description.

mod config;
mod error;
mod repro;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use usctec::coded::plan_from_scheme;
use usctec::cyclic::{build_cyclic, cyclic_storage_size};
use usctec::division::{build_assignment, divide, realize_columns, DivisionProblem};
use usctec::field::PrimeField;
use usctec::load::{computation_time, expected_time, solve_lp, LoadProblem, LoadSolution};
use usctec::placement::{export_geometry, place, storage_size};
use usctec::rational::Rat;
use usctec::simulator::{
    build_schemes, compare_strategies, evaluate_system, sample_stragglers, verify_round,
    RoundConfig, RoundReport, RoundStatus, Strategy, SystemReport, VerifyReport,
};

use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(name = "usctec", version, about = "Elastic coded matrix multiplication scheduler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Water-fill the per-realization loads under the storage caps.
    SolveLp {
        #[arg(long)]
        config: PathBuf,
    },
    /// Divide each realization's loads into binary blocks.
    Divide {
        #[arg(long)]
        config: PathBuf,
    },
    /// Realize per-block computation assignments as column ranges.
    Assign {
        #[arg(long)]
        config: PathBuf,
        /// Columns of B; defaults to the `matrices.r` config entry.
        #[arg(long)]
        r: Option<usize>,
    },
    /// Run the storage placement loop.
    Place {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build the cyclic baseline with Q consecutive blocks per machine.
    Cyclic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        q: usize,
    },
    /// Evaluate a strategy and verify one coded round per realization.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "usctec")]
        strategy: String,
        /// Blocks per machine (cyclic strategy only).
        #[arg(long)]
        q: Option<usize>,
    },
    /// Sweep storage caps e = Q/N and emit a comparison CSV.
    Compare {
        /// Use the built-in twelve-machine instance with Q in 6..=12.
        #[arg(long)]
        table1: bool,
        #[arg(long, required_unless_present = "table1")]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        qs: Vec<usize>,
    },
    /// Emit the placement geometry (machine, interval, tag) as CSV.
    ExportFig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run the built-in reference systems and print PASS/FAIL lines.
    Repro,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", serde_json::to_string(&err).expect("error is serializable"));
            ExitCode::from(err.code as u8)
        }
    }
}

/// Writes one line to stdout; a closed pipe (e.g. `usctec ... | head`) ends
/// the process quietly instead of panicking.
fn write_stdout_line(line: std::fmt::Arguments) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if writeln!(stdout, "{line}").is_err() {
        std::process::exit(0);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { crate::write_stdout_line(format_args!($($arg)*)) };
}
pub(crate) use outln;

fn emit<T: Serialize>(value: &T) -> Result<(), CliError> {
    outln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn parse_strategy(strategy: &str, q: Option<usize>) -> Result<Strategy, CliError> {
    match strategy {
        "usctec" => Ok(Strategy::Usctec),
        "cyclic" => {
            let q = q.ok_or_else(|| CliError::validation("cyclic strategy requires --q"))?;
            Ok(Strategy::Cyclic(q))
        }
        other => Err(CliError::validation(format!(
            "unknown strategy {other:?} (expected \"usctec\" or \"cyclic\")"
        ))),
    }
}

/// `(L+S, s, e)`-LP per realization: storage caps bound each machine's load.
fn lp_solutions(config: &Config) -> Result<Vec<LoadSolution>, CliError> {
    let (params, dist) = config.system();
    dist.realizations
        .iter()
        .map(|w| {
            solve_lp(&LoadProblem {
                total: Rat::from_int(params.replication() as i64),
                speeds: w.realization.clone(),
                caps: params.storage_caps.clone(),
            })
            .map_err(Into::into)
        })
        .collect()
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::SolveLp { config } => {
            let config = Config::load(&config)?;
            emit(&lp_solutions(&config)?)
        }
        Command::Divide { config } => {
            let config = Config::load(&config)?;
            let (params, _) = config.system();
            let results = lp_solutions(&config)?
                .into_iter()
                .map(|solution| {
                    divide(&DivisionProblem {
                        theta: solution.theta,
                        rho: Rat::one(),
                        replication: params.replication(),
                    })
                    .map_err(CliError::from)
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit(&results)
        }
        Command::Assign { config, r } => {
            let config = Config::load(&config)?;
            let (params, _) = config.system();
            let l = params.recovery_threshold;
            let r = r
                .or(config.matrices.r)
                .ok_or_else(|| CliError::validation("--r or matrices.r is required"))?;

            #[derive(Serialize)]
            struct PieceOut {
                mass: Rat,
                machines: Vec<usize>,
                cols: std::ops::Range<usize>,
            }
            #[derive(Serialize)]
            struct GroupOut {
                group: usize,
                pieces: Vec<PieceOut>,
            }

            let mut out: Vec<Vec<GroupOut>> = Vec::new();
            for solution in lp_solutions(&config)? {
                let division = divide(&DivisionProblem {
                    theta: solution.theta,
                    rho: Rat::one(),
                    replication: params.replication(),
                })?;
                let mut groups = Vec::new();
                for (g, row) in division.mu_matrix().iter().enumerate() {
                    let assignment = build_assignment(row, params.replication())?;
                    let cols = realize_columns(&assignment, r, l)?;
                    groups.push(GroupOut {
                        group: g,
                        pieces: assignment
                            .pieces
                            .iter()
                            .zip(cols)
                            .map(|(piece, cols)| PieceOut {
                                mass: piece.mass.clone(),
                                machines: piece.machines.clone(),
                                cols,
                            })
                            .collect(),
                    });
                }
                out.push(groups);
            }
            emit(&out)
        }
        Command::Place { config } => {
            let config = Config::load(&config)?;
            let (params, dist) = config.system();
            let result = place(&params, &dist)?;

            #[derive(Serialize)]
            struct PlaceOut {
                storage_size: Rat,
                #[serde(flatten)]
                result: usctec::placement::PlacementResult,
            }
            emit(&PlaceOut {
                storage_size: storage_size(&result),
                result,
            })
        }
        Command::Cyclic { config, q } => {
            let config = Config::load(&config)?;
            let (params, dist) = config.system();
            let mut schemes = Vec::new();
            let mut times = Vec::new();
            for w in &dist.realizations {
                let scheme = build_cyclic(&params, q, &w.realization)?;
                times.push(computation_time(&scheme.load_vector(), &w.realization)?);
                schemes.push(scheme);
            }

            #[derive(Serialize)]
            struct CyclicOut {
                storage_size: Rat,
                expected_time: Rat,
                times: Vec<Rat>,
                schemes: Vec<usctec::model::Scheme>,
            }
            emit(&CyclicOut {
                storage_size: cyclic_storage_size(&params, q),
                expected_time: expected_time(&dist.probabilities(), &times),
                times,
                schemes,
            })
        }
        Command::Simulate { config, strategy, q } => {
            let config = Config::load(&config)?;
            let (params, dist) = config.system();
            let strategy = parse_strategy(&strategy, q)?;
            let evaluation = evaluate_system(&params, &dist, &strategy)?;
            let verification = match &config.matrices.csv {
                None => {
                    let round = RoundConfig {
                        prime: config.field.prime,
                        inner_dim: config.matrices.v.unwrap_or(4),
                        seed: config.matrices.seed.unwrap_or(0),
                        ..RoundConfig::default()
                    };
                    verify_round(&params, &dist, &strategy, &round)?
                }
                Some(csv) => csv_rounds(&config, &strategy, csv)?,
            };

            #[derive(Serialize)]
            struct SimulateOut {
                evaluation: SystemReport,
                verification: VerifyReport,
            }
            if !verification.passed() {
                return Err(CliError::infeasible(format!(
                    "coded-round verification failed: {}",
                    serde_json::to_string(&verification)?
                )));
            }
            emit(&SimulateOut {
                evaluation,
                verification,
            })
        }
        Command::Compare { table1, config, qs } => {
            let (base, dist, qs) = if table1 {
                let (base, dist) = usctec::demo::table1();
                (base, dist, (6..=12).collect())
            } else {
                let config = Config::load(&config.expect("clap enforces presence"))?;
                let (params, dist) = config.system();
                if qs.is_empty() {
                    return Err(CliError::validation("--qs is required without --table1"));
                }
                (params, dist, qs)
            };
            let rows = compare_strategies(&base, &dist, &qs)?;
            outln!("Q_over_N,strategy,storage_size,expected_time_exact,expected_time_5dp");
            for row in rows {
                outln!(
                    "{}/{},{},{},{},{}",
                    row.q,
                    base.machines,
                    row.strategy,
                    row.storage_size,
                    row.expected_time,
                    row.expected_time_5dp
                );
            }
            Ok(())
        }
        Command::ExportFig { config } => {
            let config = Config::load(&config)?;
            let (params, dist) = config.system();
            let result = place(&params, &dist)?;
            outln!("machine,start,end,tag");
            for row in export_geometry(&result) {
                outln!("{},{},{},{}", row.machine, row.start, row.end, row.tag);
            }
            Ok(())
        }
        Command::Repro => repro::run(),
    }
}

/// One coded round per realization with `A`/`B` loaded from CSV; dimensions
/// must realize the scheme exactly.
fn csv_rounds(
    config: &Config,
    strategy: &Strategy,
    csv: &config::CsvMatrices,
) -> Result<VerifyReport, CliError> {
    let (params, dist) = config.system();
    let field = PrimeField::new(config.field.prime)?;
    let a = config::load_csv_matrix(&field, &csv.a)?;
    let b = config::load_csv_matrix(&field, &csv.b)?;
    if a.cols != b.rows {
        return Err(CliError::validation(format!(
            "matrix dimension mismatch: A is {}x{}, B is {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let seed = config.matrices.seed.unwrap_or(0);
    let points = usctec::coded::EvaluationPoints::standard(
        &field,
        params.recovery_threshold,
        params.machines,
    )?;
    let expected = a.mul(&field, &b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = Vec::new();
    for (i, scheme) in build_schemes(&params, &dist, strategy)?.iter().enumerate() {
        let plan = plan_from_scheme(
            scheme,
            a.rows,
            b.cols,
            params.recovery_threshold,
            params.replication(),
        )?;
        let stragglers = sample_stragglers(&plan, params.stragglers, &mut rng);
        let status = match usctec::coded::run_round(&field, &a, &b, &plan, &points, &stragglers) {
            Ok(product) if product == expected => RoundStatus::Pass {
                q: a.rows,
                r: b.cols,
            },
            Ok(_) => RoundStatus::Fail {
                diagnostic: "decoded product differs from direct product".into(),
            },
            Err(err) => RoundStatus::Fail {
                diagnostic: err.to_string(),
            },
        };
        rounds.push(RoundReport {
            realization: i,
            status,
        });
    }
    Ok(VerifyReport { seed, rounds })
}
