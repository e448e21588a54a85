//! `sl2gen`: factor, verify, search chains, run the bounded oracle and
//! collect length statistics from the command line.
//!
//! Exit status is 0 on success, 2 when a search ran out of budget and 1 on
//! parse errors and failed invariants. `verify` exits 1 when the word does
//! not evaluate to the matrix.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sl2gen::oracle::{Oracle, OracleParams};
use sl2gen::stats::run_stats;
use sl2gen::{factor, find_terminating_chain, verify, Error, Ring, RingElement, SearchBudget};

#[derive(Parser)]
#[command(name = "sl2gen", version, about = "Short elementary factorizations in SL2 over S-integer rings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factor a matrix into elementary matrices.
    Factor {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        budget: BudgetArgs,
        /// `[[a,b],[c,d]]`, or `-` for stdin.
        matrix: String,
    },
    /// Check that a word evaluates to a matrix.
    Verify {
        #[command(flatten)]
        common: Common,
        matrix: String,
        /// Letter array, `{"letters": [...]}` or the JSON printed by
        /// `factor`; `-` for stdin.
        word: String,
    },
    /// Search a terminating division chain starting at `(a, b)`.
    Chain {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Shortest alternating word over a finite parameter set.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Comma separated parameters; defaults to `+-1, ..., +-height`.
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
        #[arg(long, default_value_t = 3)]
        height: i64,
        matrix: String,
    },
    /// Factor seeded random matrices and print length histograms as CSV.
    Stats {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        word_length: usize,
        #[arg(long, default_value_t = 10)]
        height: u32,
        /// Retries with a larger budget after a failed search.
        #[arg(long, default_value_t = 2)]
        escalate: u32,
    },
}

#[derive(Args)]
struct Common {
    /// `Q`, `Q[1/p,...]`, `Q(sqrt d)`, `Q(sqrt d; half)[1/p]`, ...
    #[arg(long)]
    ring: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct BudgetArgs {
    /// Longest chain searched [default: recommended depth + 2]
    #[arg(long)]
    max_k: Option<usize>,
    #[arg(long, default_value_t = 8)]
    radius: u32,
    #[arg(long, default_value_t = 12)]
    unit_exp: u32,
    #[arg(long, default_value_t = 1_000_000)]
    nodes: u64,
}

impl BudgetArgs {
    fn budget(&self, ring: &Ring) -> SearchBudget {
        let base = SearchBudget::for_ring(ring.spec());
        SearchBudget {
            max_k: self.max_k.unwrap_or(base.max_k),
            quotient_radius: self.radius,
            unit_exp_bound: self.unit_exp,
            node_limit: self.nodes,
            ..base
        }
    }
}

enum Failure {
    Budget(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExhausted { .. } | Error::NotFound { .. } | Error::OracleOverflow { .. } => {
                Failure::Budget(e.to_string())
            }
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Budget(msg)) => {
            eprintln!("sl2gen: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("sl2gen: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Reads stdin for `-`. At most one argument may do so.
fn input(arg: &str, stdin_used: &mut bool) -> Result<String, Failure> {
    if arg != "-" {
        return Ok(arg.to_string());
    }
    if *stdin_used {
        return Err(Failure::Invalid("only one argument can be read from stdin".into()));
    }
    *stdin_used = true;
    let mut s = String::new();
    std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Invalid(format!("reading stdin: {e}")))?;
    Ok(s.trim().to_string())
}

fn ring(common: &Common) -> Result<Ring, Failure> {
    Ring::parse(&common.ring).map_err(|e| Failure::Invalid(format!("--ring: {e}")))
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    let mut stdin_used = false;
    match cmd {
        Cmd::Factor { common, budget, matrix } => {
            let r = ring(&common)?;
            let m = r.parse_matrix(&input(&matrix, &mut stdin_used)?)?;
            let f = factor(&r, &m, &budget.budget(&r))?;
            match common.format {
                Format::Json => println!("{}", f.to_json()),
                Format::Text => {
                    println!("word: {}", f.word);
                    println!("canonical: {}", f.canonical_word);
                    println!("raw_length: {}", f.raw_length);
                    println!("canonical_length: {}", f.canonical_word.len());
                    println!("chain_k: {}", f.chain_length_used);
                    println!("starts_lower: {}", f.starts_lower);
                    println!("verified: {}", f.verified);
                }
            }
            Ok(())
        }
        Cmd::Verify { common, matrix, word } => {
            let r = ring(&common)?;
            let m = r.parse_matrix(&input(&matrix, &mut stdin_used)?)?;
            let text = input(&word, &mut stdin_used)?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("word: {e}")))?;
            // the output of `factor --format json` carries the word under "word"
            let w = r.word_from_value(v.get("word").unwrap_or(&v))?;
            let ok = verify(&r, &m, &w);
            match common.format {
                Format::Json => println!("{}", json!({ "verified": ok, "length": w.len() })),
                Format::Text => println!("verified: {ok}"),
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::Invalid(format!("{w} does not evaluate to {m}")))
            }
        }
        Cmd::Chain { common, budget, a, b } => {
            let r = ring(&common)?;
            let a = r.parse_element(&input(&a, &mut stdin_used)?)?;
            let b = r.parse_element(&input(&b, &mut stdin_used)?)?;
            let ch = find_terminating_chain(&r, &a, &b, &budget.budget(&r))?;
            match common.format {
                Format::Json => println!("{}", ch.to_json()),
                Format::Text => {
                    println!("k: {}", ch.len());
                    println!("q: {}", list(&ch.q));
                    println!("r: {}", list(&ch.r));
                }
            }
            Ok(())
        }
        Cmd::Oracle { common, max_len, params, height, matrix } => {
            let r = ring(&common)?;
            let m = r.parse_matrix(&input(&matrix, &mut stdin_used)?)?;
            let p = match params {
                Some(s) => {
                    let set = s.split(',').map(|t| r.parse_element(t.trim())).collect::<Result<Vec<_>, _>>()?;
                    OracleParams::new(max_len, set)?
                }
                None => OracleParams::integers(&r, max_len, height),
            };
            let o = Oracle::new(&r, p)?;
            let w = o.min_word(&m);
            match common.format {
                Format::Json => println!(
                    "{}",
                    json!({
                        "max_len": max_len,
                        "length": w.as_ref().map(|w| w.len()),
                        "word": w.as_ref().map(|w| w.letters_json()),
                    })
                ),
                Format::Text => match &w {
                    Some(w) => {
                        println!("length: {}", w.len());
                        println!("word: {w}");
                    }
                    None => println!("length: >{max_len}"),
                },
            }
            Ok(())
        }
        Cmd::Stats { common, budget, count, seed, word_length, height, escalate } => {
            let r = ring(&common)?;
            if word_length == 0 || height == 0 {
                return Err(Failure::Invalid("--word-length and --height must be positive".into()));
            }
            let rep = run_stats(&r, &budget.budget(&r), count, seed, word_length, height, escalate);
            print!("{}", rep.to_csv());
            Ok(())
        }
    }
}

fn list(xs: &[RingElement]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}
