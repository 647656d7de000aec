use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zmetrics::error::{Error, Result};
use zmetrics::pairing::{Aggregation, DEFAULT_EDIT_DISTANCE};
use zmetrics::pipeline::{self, FitOptions, PairOptions, PairsTable, RunAllOptions};
use zmetrics::regression::{
    backward_eliminate, emit_formula, ols_fit, simulate_cl, EliminationMode, RegressionModel,
    DEFAULT_THRESHOLD, REFERENCE_CL_INTERCEPT, REFERENCE_CL_TERMS,
};
use zmetrics::spec_metrics::SpecMetrics;

/// Specification and code measures, trace pairing, correlation and
/// regression.
#[derive(Parser, Debug)]
#[command(name = "zmetrics", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format of tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (directory for run-all). Standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for simulated data.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggregateArg {
    Strict,
    Sum,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure a specification or code files.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Pair code units with schemas through their trace comments.
    Pair {
        /// Specification file.
        spec: PathBuf,
        /// Code files.
        #[arg(required = true)]
        code: Vec<PathBuf>,
        #[command(flatten)]
        pairing: PairingArgs,
        /// Also write the pairing report (JSON) to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Pearson, Spearman and Kendall tests for every spec/code measure pair.
    Correlate {
        /// Pairs table written by `pair`.
        pairs: PathBuf,
    },
    /// Backward-eliminated least-squares model for one code measure.
    Fit {
        /// Pairs table written by `pair`.
        pairs: PathBuf,
        /// Code measure to model, e.g. CL.
        #[arg(long)]
        target: String,
        /// Elimination threshold on predictor p-values, in (0, 1).
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Comma-separated predictors; all spec measures by default.
        #[arg(long, value_delimiter = ',')]
        predictors: Option<Vec<String>>,
        /// Drop only the worst predictor per round.
        #[arg(long)]
        one_at_a_time: bool,
        /// Exclude constant, dependent and surplus predictors first.
        #[arg(long)]
        screen: bool,
    },
    /// Apply a fitted model to every schema of a specification.
    Predict {
        /// Model JSON written by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// Specification file.
        spec: PathBuf,
    },
    /// Measure, pair, correlate and fit in one go.
    RunAll {
        /// Specification file.
        spec: PathBuf,
        /// Directory holding the `.mil` code files.
        code_dir: PathBuf,
        #[command(flatten)]
        pairing: PairingArgs,
        /// Elimination threshold on predictor p-values, in (0, 1).
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Drop only the worst predictor per round.
        #[arg(long)]
        one_at_a_time: bool,
    },
    /// Write a pairs table simulated from the reference CL formula.
    Simulate {
        #[arg(long, default_value_t = 70)]
        n: usize,
        /// Standard deviation of the added normal noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Check coefficient recovery and elimination on simulated data.
    Selftest {
        #[arg(long, default_value_t = 100)]
        runs: u64,
    },
}

#[derive(Subcommand, Debug)]
enum MeasureCommand {
    Spec { file: PathBuf },
    Code {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PairingArgs {
    /// Largest edit distance for spelling suggestions.
    #[arg(long, default_value_t = DEFAULT_EDIT_DISTANCE)]
    edit_distance: usize,
    /// How schemas traced by several units are handled.
    #[arg(long, value_enum, default_value_t = AggregateArg::Strict)]
    aggregate: AggregateArg,
}

impl PairingArgs {
    fn options(&self) -> PairOptions {
        PairOptions {
            max_edit_distance: self.edit_distance,
            aggregation: match self.aggregate {
                AggregateArg::Strict => Aggregation::Strict,
                AggregateArg::Sum => Aggregation::Sum,
            },
        }
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("threshold {t} must lie strictly between 0 and 1")))
    }
}

fn mode(one_at_a_time: bool) -> EliminationMode {
    if one_at_a_time {
        EliminationMode::OneAtATime
    } else {
        EliminationMode::AllAbove
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => pipeline::write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let json = cli.format == Format::Json;
    match cli.command {
        Command::Measure(MeasureCommand::Spec { file }) => {
            let (_, rows) = pipeline::measure_spec_file(&file)?;
            let text = if json {
                pipeline::spec_metrics_json(&rows)
            } else {
                pipeline::spec_metrics_csv(&rows)
            };
            emit(out, &text)?;
            eprintln!("measured {} schemas", rows.len());
        }
        Command::Measure(MeasureCommand::Code { files }) => {
            let rows = pipeline::load_code(&files)?.metrics();
            let text = if json {
                pipeline::code_metrics_json(&rows)
            } else {
                pipeline::code_metrics_csv(&rows)
            };
            emit(out, &text)?;
            eprintln!("measured {} units", rows.len());
        }
        Command::Pair {
            spec,
            code,
            pairing,
            report,
        } => {
            let (_, spec_rows) = pipeline::measure_spec_file(&spec)?;
            let corpus = pipeline::load_code(&code)?;
            let (rep, obs) = pipeline::pair(&spec_rows, &corpus, pairing.options())?;
            if let Some(path) = report {
                pipeline::write_atomic(&path, pipeline::to_json(&rep).as_bytes())?;
            }
            let text = if json {
                pipeline::to_json(&obs)
            } else {
                pipeline::pairs_csv(&obs)
            };
            emit(out, &text)?;
            eprintln!(
                "{} pairs, {} dangling, {} suggestions, {} conflicts, {} unreferenced",
                rep.pairs.len(),
                rep.dangling.len(),
                rep.suggestions.len(),
                rep.conflicts.len(),
                rep.unreferenced.len()
            );
        }
        Command::Correlate { pairs } => {
            let rows = pipeline::correlate_table(&PairsTable::read(&pairs)?)?;
            let text = if json {
                pipeline::to_json(&rows)
            } else {
                pipeline::correlations_csv(&rows)
            };
            emit(out, &text)?;
            eprintln!("{} correlation rows", rows.len());
        }
        Command::Fit {
            pairs,
            target,
            threshold,
            predictors,
            one_at_a_time,
            screen,
        } => {
            check_threshold(threshold)?;
            let opts = FitOptions {
                target,
                predictors,
                threshold,
                mode: mode(one_at_a_time),
                screen,
            };
            let model = pipeline::fit_table(&PairsTable::read(&pairs)?, &opts)?;
            emit(out, &pipeline::to_json(&model))?;
            for w in &model.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("{}", emit_formula(&model));
        }
        Command::Predict { model, spec } => {
            let text = pipeline::read_text(&model)?;
            let model: RegressionModel = serde_json::from_str(&text)
                .map_err(|e| Error::parse(&model, Some(e.line()), e))?;
            let (_, rows) = pipeline::measure_spec_file(&spec)?;
            let preds = pipeline::predict_rows(&model, &rows)?;
            let text = if json {
                let named: Vec<_> = preds
                    .iter()
                    .map(|(s, y)| serde_json::json!({ "schema": s, model.target.as_str(): y }))
                    .collect();
                pipeline::to_json(&named)
            } else {
                pipeline::predictions_csv(&model.target, &preds)
            };
            emit(out, &text)?;
            eprintln!("predicted {} for {} schemas", model.target, preds.len());
        }
        Command::RunAll {
            spec,
            code_dir,
            pairing,
            threshold,
            one_at_a_time,
        } => {
            check_threshold(threshold)?;
            let opts = RunAllOptions {
                pair: pairing.options(),
                threshold,
                mode: mode(one_at_a_time),
            };
            let bundle = pipeline::run_all(&spec, &code_dir, opts)?;
            let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("report"));
            bundle.write_to(&dir)?;
            eprintln!(
                "{} observations, {} correlation rows, {} models written to {}",
                bundle.observations,
                bundle.correlations,
                bundle.models.len(),
                dir.display()
            );
        }
        Command::Simulate { n, noise } => {
            if !(noise >= 0.0 && noise.is_finite()) {
                return Err(Error::usage("noise must be a non-negative number"));
            }
            let data = simulate_cl(n, cli.seed, noise);
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["pair_id", "schema", "unit"];
            header.extend(SpecMetrics::NAMES);
            header.push("CL");
            w.write_record(&header).expect("in-memory write");
            for (i, (row, y)) in data.rows.iter().zip(&data.response).enumerate() {
                let mut rec = vec![(i + 1).to_string(), format!("S{}", i + 1), format!("U{}", i + 1)];
                rec.extend(row.iter().map(f64::to_string));
                rec.push(y.to_string());
                w.write_record(&rec).expect("in-memory write");
            }
            let text = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
            emit(out, &text)?;
            eprintln!("simulated {n} observations with seed {}", cli.seed);
        }
        Command::Selftest { runs } => selftest(cli.seed, runs)?,
    }
    Ok(())
}

fn selftest(seed: u64, runs: u64) -> Result<()> {
    let names: Vec<String> = REFERENCE_CL_TERMS.iter().map(|(n, _)| n.to_string()).collect();
    let exact = ols_fit(&simulate_cl(70, seed, 0.0).select(&names))?;
    let recovered = REFERENCE_CL_TERMS
        .iter()
        .zip(&exact.terms)
        .all(|((_, c), t)| (t.estimate.coeff - c).abs() < 1e-6)
        && (exact.intercept.coeff - REFERENCE_CL_INTERCEPT).abs() < 1e-6
        && (exact.r2 - 1.0).abs() < 1e-9;
    println!(
        "coefficient recovery: {} ({})",
        if recovered { "pass" } else { "FAIL" },
        emit_formula(&exact)
    );
    let mut retained = 0;
    let mut max_rounds = 0;
    for s in seed..seed + runs {
        let m = backward_eliminate(&simulate_cl(70, s, 1.0), DEFAULT_THRESHOLD)?;
        let kept = m.term_names();
        if names.iter().all(|n| kept.contains(&n.as_str())) {
            retained += 1;
        }
        max_rounds = max_rounds.max(m.trace.len());
    }
    let ok = 100 * retained >= 95 * runs && max_rounds <= 11;
    println!(
        "backward elimination: {} (true predictors kept in {retained}/{runs} runs, at most {max_rounds} rounds)",
        if ok { "pass" } else { "FAIL" }
    );
    if recovered && ok {
        Ok(())
    } else {
        Err(Error::new(zmetrics::error::ErrorKind::Numeric, "selftest failed"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
