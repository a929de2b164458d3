//! Command-line front end: every module behind one binary with JSON output.
//! Exit codes: 0 success, 1 invalid input, 2 integrity failure, 3 resource
//! cap. Big integers are serialized as decimal strings; every run is fully
//! determined by its arguments (plus TORSION_WORKERS for default worker
//! counts).

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde::Serialize;

use torsion::construct::{build_expression, certify, normalize, operator_value, ConstructError, OperatorData};
use torsion::search::{factorize, fibonacci_data, lu_word_matrix, op_set, parse_lu_word, random_search, ulu_entry_data, SearchConfig, SearchError};
use torsion::zaremba::{density, growth_witness, parse_lr_word, prime_records, torsion_bridge, ZarembaError};

const EXIT_INVALID: u8 = 1;
const EXIT_INTEGRITY: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "torsion",
    version,
    about = "Exact Schubert-calculus operator words, torsion certificates, and semigroup enumeration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an operator word to its integer value
    EvalWord(DataInput),
    /// Normalize operator data and construct its reduced expression
    Build(DataInput),
    /// Run the full certificate pipeline on operator data
    Certify(DataInput),
    /// Values and prime factors of the closed Fibonacci family
    Fib {
        /// Largest index i (value F_{i+1} at rank 3i+5)
        #[arg(long, default_value_t = 10)]
        max_i: u32,
    },
    /// Operator values of an L/U word against its 2x2 matrix product
    Ulu {
        /// Word over the letters L and U, e.g. LULU
        #[arg(long)]
        word: String,
    },
    /// Randomized search for torsion records
    Search(SearchArgs),
    /// Integer matrix semigroup enumeration and the certificate bridge
    Zaremba {
        #[command(subcommand)]
        cmd: ZarembaCmd,
    },
    /// Run the invariant suites of every module
    Selftest,
}

#[derive(Args)]
struct DataInput {
    /// Inline operator-data JSON: {"n": .., "items": [{"w": [..], "a": .., "b": ..}, ..]}
    #[arg(long, conflicts_with = "file")]
    data: Option<String>,
    /// Path to an operator-data JSON file, or - for stdin
    #[arg(long)]
    file: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    /// Inner rank of the operator alphabet
    #[arg(long)]
    n: usize,
    /// Named operator set: paper8 (n=5), fib (n=4), or ulu (n=4)
    #[arg(long)]
    ops: String,
    /// Comma-separated seed monomials over x_1 and x_n, e.g. x1^3,x1^2*x5
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<String>,
    /// Operator applications before a walk restarts
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    /// Operator applications per worker
    #[arg(long, default_value_t = 10_000)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Op-choice weight base favoring low powers (1 = uniform)
    #[arg(long, default_value_t = 1)]
    bias: u32,
    /// Worker threads (default: TORSION_WORKERS or 1)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum ZarembaCmd {
    /// Exact density of representable top-left entries up to N
    Density {
        #[arg(long = "A")]
        a_max: u32,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Representable primes in the window (theta N, N]
    Primes {
        #[arg(long = "A")]
        a_max: u32,
        #[arg(long)]
        theta: f64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Prime growth witness for a unipotent word-length budget
    Growth {
        #[arg(long = "L")]
        l: u32,
    },
    /// Certify the entries of an L/R word's matrix through the operator correspondence
    Bridge {
        /// Word over the letters L and R, e.g. LRLR
        #[arg(long)]
        word: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

impl From<ConstructError> for Failure {
    fn from(e: ConstructError) -> Self {
        let code = match &e {
            ConstructError::Integrity(_) => EXIT_INTEGRITY,
            ConstructError::ResourceCap { .. } => EXIT_RESOURCE,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        invalid(e.to_string())
    }
}

impl From<ZarembaError> for Failure {
    fn from(e: ZarembaError) -> Self {
        match e {
            ZarembaError::Bridge(inner) => inner.into(),
            other => invalid(other.to_string()),
        }
    }
}

fn read_data(input: &DataInput) -> Result<OperatorData, Failure> {
    let text = match (&input.data, &input.file) {
        (Some(inline), None) => inline.clone(),
        (None, Some(path)) if path == "-" => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| invalid(format!("reading stdin: {}", e)))?;
            buf
        }
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("reading {}: {}", path, e)))?,
        _ => return Err(invalid("provide operator data via --data or --file")),
    };
    serde_json::from_str(&text).map_err(|e| invalid(format!("operator data: {}", e)))
}

fn resolve_workers(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match std::env::var("TORSION_WORKERS") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| invalid(format!("TORSION_WORKERS is not a worker count: {:?}", s))),
        Err(_) => Ok(1),
    }
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("report serializes"));
}

#[derive(Serialize)]
struct EvalReport {
    schema_version: String,
    n: usize,
    #[serde(rename = "N")]
    ambient_rank: usize,
    value: String,
}

#[derive(Serialize)]
struct BuildReport {
    schema_version: String,
    #[serde(rename = "N")]
    ambient_rank: usize,
    data: OperatorData,
    x: torsion::sym::Permutation,
    word: Vec<u32>,
    length: usize,
}

#[derive(Serialize)]
struct FibLine {
    schema_version: String,
    i: u32,
    #[serde(rename = "N")]
    ambient_rank: usize,
    value: String,
    primes: Vec<String>,
}

#[derive(Serialize)]
struct UluEntry {
    row: usize,
    col: usize,
    value: String,
    seed_sign: i8,
    matrix_entry: String,
}

#[derive(Serialize)]
struct UluReport {
    schema_version: String,
    word: String,
    #[serde(rename = "N")]
    ambient_rank: usize,
    matrix: [[String; 2]; 2],
    entries: Vec<UluEntry>,
}

#[derive(Serialize)]
struct DensityReport {
    schema_version: String,
    #[serde(rename = "A")]
    a_max: u32,
    #[serde(rename = "N")]
    n: u64,
    count: usize,
    density: String,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::EvalWord(input) => {
            let data = read_data(&input)?;
            let value = operator_value(&data)?;
            emit(&EvalReport {
                schema_version: torsion::SCHEMA_VERSION.to_string(),
                n: data.n,
                ambient_rank: data.ambient_rank(),
                value: value.to_string(),
            });
            Ok(())
        }
        Command::Build(input) => {
            let data = read_data(&input)?;
            data.validate()?;
            let normalized = normalize(&data, false)?;
            let word = build_expression(&normalized)?;
            emit(&BuildReport {
                schema_version: torsion::SCHEMA_VERSION.to_string(),
                ambient_rank: normalized.ambient_rank(),
                x: normalized.w_sub_i(),
                length: word.len(),
                word,
                data: normalized,
            });
            Ok(())
        }
        Command::Certify(input) => {
            let data = read_data(&input)?;
            let cert = certify(&data)?;
            emit(&cert);
            Ok(())
        }
        Command::Fib { max_i } => {
            if max_i < 1 {
                return Err(invalid("max-i must be at least 1"));
            }
            for i in 1..=max_i {
                let data = fibonacci_data(i);
                let value = operator_value(&data)?;
                let primes = if value.is_zero() {
                    Vec::new()
                } else {
                    factorize(&value)?.prime_factors.iter().map(|p| p.to_string()).collect()
                };
                emit(&FibLine {
                    schema_version: torsion::SCHEMA_VERSION.to_string(),
                    i,
                    ambient_rank: data.ambient_rank(),
                    value: value.to_string(),
                    primes,
                });
            }
            Ok(())
        }
        Command::Ulu { word } => {
            let lu = parse_lu_word(&word)?;
            if lu.is_empty() {
                return Err(invalid("operator word must be nonempty"));
            }
            let matrix = lu_word_matrix(&lu);
            let mut entries = Vec::new();
            for row in 0..2 {
                for col in 0..2 {
                    let (data, seed_sign) = ulu_entry_data(&lu, row, col);
                    let value = operator_value(&data)?;
                    let signed = if seed_sign >= 0 { value.clone() } else { -value.clone() };
                    if signed != matrix[row][col] {
                        return Err(Failure {
                            code: EXIT_INTEGRITY,
                            message: format!(
                                "entry ({}, {}): operator value {} disagrees with matrix entry {}",
                                row, col, signed, matrix[row][col]
                            ),
                        });
                    }
                    entries.push(UluEntry {
                        row,
                        col,
                        value: value.to_string(),
                        seed_sign,
                        matrix_entry: matrix[row][col].to_string(),
                    });
                }
            }
            emit(&UluReport {
                schema_version: torsion::SCHEMA_VERSION.to_string(),
                word: word.trim().to_uppercase(),
                ambient_rank: 3 * lu.len() + 5,
                matrix: [
                    [matrix[0][0].to_string(), matrix[0][1].to_string()],
                    [matrix[1][0].to_string(), matrix[1][1].to_string()],
                ],
                entries,
            });
            Ok(())
        }
        Command::Search(args) => {
            let workers = resolve_workers(args.workers)?;
            let cfg = SearchConfig {
                n: args.n,
                ops: op_set(&args.ops, args.n)?,
                seeds: args.seeds,
                max_len: args.max_len,
                iterations: args.iters,
                rng_seed: args.rng_seed,
                workers,
                low_power_bias: args.bias,
            };
            let records = random_search(&cfg)?;
            for record in &records {
                emit(record);
            }
            Ok(())
        }
        Command::Zaremba { cmd } => match cmd {
            ZarembaCmd::Density { a_max, n, workers } => {
                let workers = resolve_workers(workers)?;
                let d = density(a_max, n, workers)?;
                let count = torsion::zaremba::representable_set(a_max, n, workers)?.len();
                emit(&DensityReport {
                    schema_version: torsion::SCHEMA_VERSION.to_string(),
                    a_max,
                    n,
                    count,
                    density: format!("{}/{}", d.numer(), d.denom()),
                });
                Ok(())
            }
            ZarembaCmd::Primes { a_max, theta, n, workers } => {
                let workers = resolve_workers(workers)?;
                emit(&prime_records(a_max, theta, n, workers)?);
                Ok(())
            }
            ZarembaCmd::Growth { l } => {
                emit(&growth_witness(l)?);
                Ok(())
            }
            ZarembaCmd::Bridge { word } => {
                let lr = parse_lr_word(&word)?;
                emit(&torsion_bridge(&lr)?);
                Ok(())
            }
        },
        Command::Selftest => match torsion::selftest::run_selftest() {
            Ok(lines) => {
                for line in lines {
                    println!("{}", line);
                }
                Ok(())
            }
            Err(message) => Err(Failure { code: EXIT_INTEGRITY, message }),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e);
                return ExitCode::SUCCESS;
            }
            eprint!("{}", e);
            return ExitCode::from(EXIT_INVALID);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
