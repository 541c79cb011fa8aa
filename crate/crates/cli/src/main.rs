use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use hcgame_core::game::{consistency_ok, parity_ok};
use hcgame_core::nosignalling::in_z;
use hcgame_core::report::{check_rows, figure3_csv, parse_m_range, rows_to_csv, rows_to_json, value_rows, MAX_TABLE_M};
use hcgame_core::suites::SUITES;
use hcgame_core::{build_ns_correlation, predicate, relaxed_predicate, run_suite, Answer, Error, SuiteOptions};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "hcgame", version, about = "Classical, quantum and no-signalling values of the Hypercube game")]
struct Cli {
    /// Worker threads; 1 makes every output bitwise reproducible.
    #[arg(long, global = true, env = "HCGAME_JOBS")]
    jobs: Option<usize>,

    /// Base seed for randomized checks, echoed in every report.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Override the default tolerance of the selected suite.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Number of randomized trials.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Smaller verification profile: m <= 4, 100 randomized trials.
    #[arg(long, global = true)]
    quick: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value table: classical, quantum, no-signalling.
    Values {
        #[arg(long, conflicts_with = "m_range")]
        m: Option<usize>,
        /// Inclusive range, e.g. `2..12`.
        #[arg(long)]
        m_range: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Figure data as `m,classical,quantum,nosignalling` CSV for m = 2..=m_max.
    Figure3 {
        #[arg(long, default_value_t = 12)]
        m_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and print its JSON report.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long)]
        m: Option<usize>,
        /// Largest exponent for `lemma3`.
        #[arg(long)]
        m_max: Option<usize>,
        /// Largest matrix dimension for `lemma2`.
        #[arg(long)]
        dim: Option<usize>,
        /// Largest exponent for `lemma2`.
        #[arg(long)]
        max_power: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the winning predicates on an answer given as JSON.
    Eval {
        /// Array of facet objects `{"player", "question_bit", "values"}`, one per player.
        #[arg(long)]
        input: PathBuf,
    },
    /// Write the no-signalling correlation as JSON lines.
    ExportNs {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure kinds mapped onto exit codes.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn core_error(e: Error) -> Failure {
    match e {
        Error::Dimension { .. } | Error::Player { .. } | Error::Malformed(_) => Failure::Usage(e.to_string()),
        other => Failure::Runtime(other.into()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Values { m, m_range, format, out } => {
            let (lo, hi) = match (m, m_range) {
                (Some(m), _) => (m, m),
                (None, Some(r)) => parse_m_range(&r).map_err(core_error)?,
                (None, None) => (2, 12),
            };
            if lo < 2 || hi > MAX_TABLE_M {
                return Err(Failure::Usage(format!("m range {lo}..{hi} outside 2..{MAX_TABLE_M}")));
            }
            let rows = value_rows(lo, hi).map_err(core_error)?;
            let text = match format {
                Format::Csv => rows_to_csv(&rows),
                Format::Json => rows_to_json(&rows),
            };
            emit(out.as_deref(), &text)?;
            let failed: Vec<_> = check_rows(&rows).into_iter().filter(|c| !c.pass).collect();
            for c in &failed {
                eprintln!("row check failed: {} (expected {}, got {})", c.name, c.expected, c.actual);
            }
            Ok(failed.is_empty())
        }
        Command::Figure3 { m_max, out } => {
            if !(2..=MAX_TABLE_M).contains(&m_max) {
                return Err(Failure::Usage(format!("--m-max {m_max} outside 2..{MAX_TABLE_M}")));
            }
            let rows = value_rows(2, m_max).map_err(core_error)?;
            emit(out.as_deref(), &figure3_csv(&rows))?;
            Ok(true)
        }
        Command::Verify { suite, m, m_max, dim, max_power, out } => {
            let opts = SuiteOptions {
                m,
                m_max,
                trials: cli.trials,
                dim,
                max_power,
                tol: cli.tol,
                seed: cli.seed,
                quick: cli.quick,
            };
            let report = run_suite(&suite, &opts)
                .ok_or_else(|| Failure::Usage(format!("unknown suite {suite}")))?
                .map_err(core_error)?;
            emit(out.as_deref(), &report.to_json())?;
            let failures = report.failures().count();
            eprintln!(
                "verify {}: {} ({} checks, {} failed, seed {})",
                report.suite,
                if report.pass { "PASS" } else { "FAIL" },
                report.checks.len(),
                failures,
                report.seed
            );
            Ok(report.pass)
        }
        Command::Eval { input } => {
            let text = fs::read_to_string(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let answer: Answer =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad answer JSON: {e}")))?;
            let q = answer.question();
            let result = serde_json::json!({
                "question": q,
                "parity": answer.assignments().iter().map(parity_ok).collect::<Vec<_>>(),
                "consistency": consistency_ok(&answer, &q),
                "predicate": predicate(&answer, &q),
                "relaxed": relaxed_predicate(&answer, &q),
                "in_z": in_z(&answer, &q),
            });
            emit(None, &format!("{}\n", serde_json::to_string_pretty(&result).expect("serializable")))?;
            Ok(true)
        }
        Command::ExportNs { m, out } => {
            let corr = build_ns_correlation(m).map_err(core_error)?;
            let mut buf = Vec::new();
            corr.write_json_lines(&mut buf).context("serializing correlation")?;
            emit(out.as_deref(), std::str::from_utf8(&buf).expect("JSON is UTF-8"))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
