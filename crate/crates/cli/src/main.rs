//! `nonrep`: construct, verify and analyze sequences that are nonrepetitive
//! on arithmetic progressions.
//!
//! Exit codes: 0 success / PASS, 1 verification failure or exhausted budget,
//! 2 usage or configuration error.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use nonrep_core::generator::{generate, ExecutionTrace, GeneratorConfig};
use nonrep_core::geometry::{color_configuration, verify_coloring, Configuration};
use nonrep_core::logcodec::{crossing_m, decode, encode, Log};
use nonrep_core::search::{Checkpoint, Search, CHECKPOINT_EVERY, DEFAULT_BUDGET};
use nonrep_core::{
    is_nonrepetitive, theorem_list_size, CheckMode, DifferenceSet, Error, ListAssignment,
    PartialSequence, Relabeling,
};

#[derive(Parser)]
#[command(
    name = "nonrep",
    version,
    about = "Sequences nonrepetitive on arithmetic progressions"
)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct DiffArgs {
    /// Differences {1, ..., k}.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated difference set, e.g. 2,5,9.
    #[arg(long)]
    diffs: Option<String>,
}

impl DiffArgs {
    fn resolve(&self) -> Result<DifferenceSet, Error> {
        match (&self.k, &self.diffs) {
            (Some(k), _) => DifferenceSet::up_to(*k),
            (None, Some(csv)) => DifferenceSet::parse_csv(csv),
            (None, None) => Err(Error::Config("need --k or --diffs".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a sequence with the erase-and-retry generator.
    Generate {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        diffs: DiffArgs,
        /// Uniform list size; defaults to ceil(2k + 10 sqrt(k)).
        #[arg(long)]
        list_size: Option<usize>,
        /// JSON file with one list of symbols per position.
        #[arg(long, conflicts_with = "list_size")]
        lists: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Choice cap; defaults to 200 * n * k.
        #[arg(long)]
        max_choices: Option<usize>,
        /// Write the execution trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the run configuration (input to `log decode`).
        #[arg(long)]
        config_out: Option<PathBuf>,
    },
    /// Check a sequence for repetitions. Reads stdin without --input.
    Verify {
        #[command(flatten)]
        diffs: DiffArgs,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Exhaustive search for the longest nonrepetitive sequence over q symbols.
    Search {
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        diffs: DiffArgs,
        #[arg(long)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Checkpoint file: resumed from if present, rewritten periodically.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Point-line configurations.
    #[command(subcommand)]
    Geom(GeomCommand),
    /// Run logs and the log-counting bound.
    #[command(subcommand)]
    Log(LogCommand),
    /// Termination statistics over many seeded runs.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Directory for trials.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GeomCommand {
    /// Color a configuration so that no line carries a repetition.
    Color {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        colors: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        max_choices: Option<usize>,
    },
    /// Check a coloring (one line of colors, point order).
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
    },
}

#[derive(Subcommand)]
enum LogCommand {
    /// Turn an execution trace into its log.
    Encode {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the random ranks of a run from its log.
    Decode {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Smallest M at which rank sequences outnumber logs.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: Option<u64>,
    },
}

/// Run configuration as stored on disk for `log decode`.
#[derive(Serialize, Deserialize)]
struct RunConfig {
    n: usize,
    diffs: DifferenceSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    list_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lists: Option<ListAssignment>,
    seed: u64,
}

impl RunConfig {
    fn to_generator(&self) -> GeneratorConfig {
        match (&self.lists, self.list_size) {
            (Some(lists), _) => {
                GeneratorConfig::with_lists(self.n, self.diffs.clone(), lists.clone(), self.seed)
            }
            (None, Some(q)) => {
                GeneratorConfig::with_list_size(self.n, self.diffs.clone(), q, self.seed)
            }
            (None, None) => GeneratorConfig::new(self.n, self.diffs.clone(), self.seed),
        }
    }
}

enum Failure {
    /// Verification failed or the budget ran out; message already printed.
    Negative,
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse(_) | Error::Range(_) => Failure::Usage(e.to_string()),
            Error::BudgetExceeded { .. } | Error::Corruption(_) | Error::Decode(_) => {
                Failure::Data(e.to_string())
            }
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) if p != Path::new("-") => read_file(p),
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

/// Numeric words use the sequence text format; anything else is relabeled.
fn parse_word(text: &str) -> Result<PartialSequence, Failure> {
    if text.split_whitespace().all(|t| t.parse::<u32>().is_ok()) {
        Ok(PartialSequence::parse_text(text)?)
    } else {
        Ok(Relabeling::new().encode_word(text))
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string(value).expect("json"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let json = cli.json;
    match cli.command {
        Command::Generate {
            n,
            diffs,
            list_size,
            lists,
            seed,
            max_choices,
            trace,
            config_out,
        } => {
            let diffs = diffs.resolve()?;
            let lists = match lists {
                Some(path) => Some(ListAssignment::from_json(&read_file(&path)?)?),
                None => None,
            };
            let run_cfg = RunConfig {
                n,
                diffs,
                list_size,
                lists,
                seed,
            };
            let mut cfg = run_cfg.to_generator().record_trace(trace.is_some());
            if let Some(cap) = max_choices {
                cfg = cfg.max_choices(cap);
            }
            let (seq, tr) = generate(&cfg)?;
            if let Some(path) = trace {
                write_file(&path, &tr.to_json_lines())?;
            }
            if let Some(path) = config_out {
                write_file(
                    &path,
                    &serde_json::to_string_pretty(&run_cfg).expect("config json"),
                )?;
            }
            if json {
                print_json(&json!({ "sequence": seq.snapshot(), "choices": tr.choices }));
            } else {
                println!("{seq}");
            }
            Ok(())
        }

        Command::Verify { diffs, input } => {
            let diffs = diffs.resolve()?;
            let seq = parse_word(&read_input(input.as_deref())?)?;
            let report = is_nonrepetitive(&seq, &diffs, CheckMode::Fast);
            let witness = report.witnesses.first();
            if json {
                print_json(&json!({ "pass": report.nonrepetitive, "witness": witness }));
            } else {
                match witness {
                    None => println!("PASS"),
                    Some(w) => println!("{w}"),
                }
            }
            if report.nonrepetitive {
                Ok(())
            } else {
                Err(Failure::Negative)
            }
        }

        Command::Search {
            q,
            diffs,
            cap,
            budget,
            resume,
        } => {
            let diffs = diffs.resolve()?;
            let search = match &resume {
                Some(path) if path.exists() => {
                    let ck = Checkpoint::load(path)?;
                    if ck.q != q || ck.diffs != diffs || ck.length_cap != cap {
                        return Err(Failure::Usage(format!(
                            "{} was written for a different search",
                            path.display()
                        )));
                    }
                    Search::resume(ck)
                }
                _ => Search::new(q, diffs, cap),
            };
            let search = match &resume {
                Some(path) => search.checkpoint_to(path, CHECKPOINT_EVERY),
                None => search,
            };
            let out = search.budget(budget).run()?;
            print_json(&serde_json::to_value(&out).expect("outcome json"));
            if out.exhausted {
                Ok(())
            } else {
                eprintln!("node budget of {budget} exhausted before the search finished");
                Err(Failure::Negative)
            }
        }

        Command::Geom(GeomCommand::Color {
            config,
            colors,
            seed,
            max_choices,
        }) => {
            let cfg = Configuration::from_json(&read_file(&config)?)?;
            let cap = max_choices.unwrap_or(1000 * cfg.points.max(1));
            let run = color_configuration(&cfg, colors, seed, cap)?;
            if json {
                print_json(
                    &json!({ "coloring": run.colors, "choices": run.choices, "erasures": run.erasures }),
                );
            } else {
                let seq = PartialSequence::from_symbols(&run.colors)?;
                println!("{seq}");
            }
            Ok(())
        }

        Command::Geom(GeomCommand::Verify { config, coloring }) => {
            let cfg = Configuration::from_json(&read_file(&config)?)?;
            let colors = PartialSequence::parse_text(&read_file(&coloring)?)?.snapshot();
            let report = verify_coloring(&cfg, &colors)?;
            if json {
                print_json(&serde_json::to_value(&report).expect("report json"));
            } else {
                match report.witnesses.first() {
                    None => println!("PASS"),
                    Some(w) => println!("line {}: {}", w.line, w.rep),
                }
            }
            if report.nonrepetitive {
                Ok(())
            } else {
                Err(Failure::Negative)
            }
        }

        Command::Log(LogCommand::Encode { trace, out }) => {
            let tr = ExecutionTrace::from_json_lines(&read_file(&trace)?)?;
            let log = encode(&tr)?;
            write_file(&out, &log.to_json())?;
            if json {
                print_json(&json!({ "choices": log.choices(), "peaks": log.diffs.len() }));
            }
            Ok(())
        }

        Command::Log(LogCommand::Decode { log, config }) => {
            let log = Log::from_json(&read_file(&log)?)?;
            let run_cfg: RunConfig = serde_json::from_str(&read_file(&config)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
            let ranks = decode(&log, &run_cfg.to_generator())?;
            if json {
                print_json(&json!({ "ranks": ranks }));
            } else {
                let text: Vec<String> = ranks.iter().map(ToString::to_string).collect();
                println!("{}", text.join(" "));
            }
            Ok(())
        }

        Command::Log(LogCommand::Bound { n, k, q }) => {
            if n == 0 || k == 0 || q == Some(0) {
                return Err(Failure::Usage("n, k and q must be positive".into()));
            }
            let q = q.unwrap_or(theorem_list_size(k as usize) as u64);
            let m = crossing_m(n, k, q)
                .ok_or_else(|| Failure::Data("no crossing below 2^48".into()))?;
            if json {
                print_json(&json!({ "n": n, "k": k, "q": q, "crossing_m": m }));
            } else {
                println!("{m}");
            }
            Ok(())
        }

        Command::Bench {
            n,
            k,
            q,
            trials,
            seed,
            out,
        } => {
            let diffs = DifferenceSet::up_to(k)?;
            let (rows, stats) = nonrep_bench::run_trials(n, &diffs, q, trials, seed)?;
            if let Some(dir) = out {
                nonrep_bench::write_report(&dir, &rows, &stats)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
            }
            print_json(&serde_json::to_value(&stats).expect("stats json"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
