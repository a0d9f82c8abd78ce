//! Command-line front end for the `chaninfo` binary.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ace::{ace_fit, AceConfig, CurveSet, Dataset};
use crate::channels::{BscParams, MscParams, SimplexSampling};
use crate::error::{Error, Result};
use crate::experiments::{
    compare_curve_sets, run_experiment, simulate, ChannelKind, ExperimentConfig, NumericTable,
};
use crate::gates::{evaluate_gates, summary_text, timing_gate, GateOutcome};
use crate::measures::{evaluate_bsc, evaluate_msc, LogBase, MeasureKind, DEFAULT_ALPHA_TOL};

#[derive(Parser, Debug)]
#[command(
    name = "chaninfo",
    version,
    about = "Shannon and Chernoff channel information with ACE decomposition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Bsc,
    Msc,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Bsc => ChannelKind::Bsc,
            ChannelArg::Msc => ChannelKind::Msc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    Bsc,
    Msc,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimplexArg {
    Rejection,
    Normalized,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw random channels and write the measure table as CSV.
    Simulate {
        #[arg(long, value_enum)]
        channel: ChannelArg,
        /// Number of draws (default 20000 for bsc, 60000 for msc).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Measure to evaluate; repeat for several (default: shannon_mi and chernoff_mi).
        #[arg(long = "measure")]
        measures: Vec<MeasureKind>,
        /// Alphabet size for msc.
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, value_enum, default_value_t = SimplexArg::Rejection)]
        simplex: SimplexArg,
        /// Use the closed-form BSC variants instead of the mutual informations.
        #[arg(long)]
        paper_variant: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an additive ACE model to columns of a CSV file.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        response: String,
        /// Comma-separated predictor columns.
        #[arg(long, value_delimiter = ',', required = true)]
        predictors: Vec<String>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_outer: Option<usize>,
        #[arg(long)]
        max_inner: Option<usize>,
        #[arg(long)]
        curves_out: PathBuf,
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Compare two curve files written by `decompose`.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one measure for one channel.
    EvalMeasure {
        #[arg(long)]
        measure: MeasureKind,
        #[arg(long, value_enum)]
        channel: ChannelArg,
        /// Input probability of symbol 0 (bsc).
        #[arg(long)]
        lambda: Option<f64>,
        /// Full input distribution, comma-separated (msc).
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        epsilon: f64,
        /// Report in bits instead of nats.
        #[arg(long)]
        bits: bool,
        #[arg(long, default_value_t = DEFAULT_ALPHA_TOL)]
        alpha_tol: f64,
    },
    /// Run the BSC and/or MSC experiments end to end and check every gate.
    RunPaper {
        #[arg(long, value_enum, default_value_t = ExperimentArg::All)]
        experiment: ExperimentArg,
        #[arg(long)]
        outdir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Use the closed-form BSC variants for the BSC experiment.
        #[arg(long)]
        paper_variant: bool,
        /// Override the number of draws.
        #[arg(long)]
        n: Option<usize>,
    },
}

/// Parses the process arguments, runs the command and maps errors to exit codes:
/// 2 for usage problems, 1 for everything else.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

/// Runs one command. `Ok(false)` means the command completed but a gate failed.
pub fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Simulate {
            channel,
            n,
            seed,
            measures,
            m,
            simplex,
            paper_variant,
            out,
        } => {
            let mut config = base_config(channel.into(), seed, m)?;
            if !measures.is_empty() {
                config = config.with_measures(measures);
            }
            if paper_variant {
                config = config.with_paper_variant();
            }
            if let Some(n) = n {
                config = config.with_n(n);
            }
            config.simplex_sampling = match simplex {
                SimplexArg::Rejection => SimplexSampling::Rejection,
                SimplexArg::Normalized => SimplexSampling::Normalized,
            };
            let table = simulate(&config)?;
            table.write_csv(BufWriter::new(File::create(&out)?))?;
            eprintln!(
                "wrote {} rows to {} ({} rejected)",
                table.n(),
                out.display(),
                table.rejections
            );
            Ok(true)
        }
        Command::Decompose {
            input,
            response,
            predictors,
            bins,
            tol,
            max_outer,
            max_inner,
            curves_out,
            summary_out,
        } => {
            let table = NumericTable::read_csv(BufReader::new(File::open(&input)?))?;
            let y = table.column(&response)?.to_vec();
            let xs = predictors
                .iter()
                .map(|p| table.column(p).map(<[f64]>::to_vec))
                .collect::<Result<Vec<_>>>()?;
            let data = Dataset::new(predictors, xs, response, y)?;
            let mut config = AceConfig::for_sample_size(data.n());
            config.bins = bins.unwrap_or(config.bins);
            config.tol = tol.unwrap_or(config.tol);
            config.max_outer = max_outer.unwrap_or(config.max_outer);
            config.max_inner = max_inner.unwrap_or(config.max_inner);
            let fit = ace_fit(&data, &config)?;
            fit.curve_set()
                .write_csv(BufWriter::new(File::create(&curves_out)?))?;
            let summary = DecomposeSummary {
                response: &fit.response_name,
                predictors: &fit.predictor_names,
                correlation: fit.correlation,
                e2: fit.e2,
                outer_iterations: fit.outer_iterations,
                e2_trace: &fit.e2_trace,
                bins_used: fit.bins_used,
                config,
            };
            let json = serde_json::to_string_pretty(&summary)? + "\n";
            match summary_out {
                Some(path) => fs::write(path, json)?,
                None => io::stdout().write_all(json.as_bytes())?,
            }
            Ok(true)
        }
        Command::Compare { a, b, out } => {
            let ca = CurveSet::read_csv(BufReader::new(File::open(&a)?))?;
            let cb = CurveSet::read_csv(BufReader::new(File::open(&b)?))?;
            let report = compare_curve_sets(&ca, &cb)?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            match out {
                Some(path) => fs::write(path, json)?,
                None => io::stdout().write_all(json.as_bytes())?,
            }
            Ok(true)
        }
        Command::EvalMeasure {
            measure,
            channel,
            lambda,
            lambdas,
            epsilon,
            bits,
            alpha_tol,
        } => {
            let value = match channel {
                ChannelArg::Bsc => {
                    let lambda = lambda.ok_or_else(|| {
                        Error::InvalidParameter("--lambda is required for bsc".into())
                    })?;
                    evaluate_bsc(measure, &BscParams::new(lambda, epsilon)?, alpha_tol)?
                }
                ChannelArg::Msc => {
                    let lambdas = lambdas.ok_or_else(|| {
                        Error::InvalidParameter("--lambdas is required for msc".into())
                    })?;
                    evaluate_msc(measure, &MscParams::new(lambdas, epsilon)?, alpha_tol)?
                }
            };
            let value = if bits {
                value.in_base(LogBase::Bits)
            } else {
                value
            };
            let line = serde_json::to_string(&EvalOutput {
                measure,
                value: value.value,
                log_base: value.log_base,
                alpha_star: value.alpha_star,
            })?;
            println!("{line}");
            Ok(true)
        }
        Command::RunPaper {
            experiment,
            outdir,
            seed,
            paper_variant,
            n,
        } => {
            fs::create_dir_all(&outdir)?;
            let channels: &[ChannelKind] = match experiment {
                ExperimentArg::Bsc => &[ChannelKind::Bsc],
                ExperimentArg::Msc => &[ChannelKind::Msc],
                ExperimentArg::All => &[ChannelKind::Bsc, ChannelKind::Msc],
            };
            let mut outcomes: Vec<GateOutcome> = Vec::new();
            let mut timing = Vec::new();
            for &channel in channels {
                let mut config = match channel {
                    ChannelKind::Bsc => ExperimentConfig::bsc(seed),
                    ChannelKind::Msc => ExperimentConfig::msc(seed),
                };
                if paper_variant && channel == ChannelKind::Bsc {
                    config = config.with_paper_variant();
                }
                if let Some(n) = n {
                    config = config.with_n(n);
                }
                eprintln!(
                    "running {} experiment (n = {}, seed = {seed})",
                    channel.name(),
                    config.n
                );
                let run = run_experiment(&config)?;
                let dir = outdir.join(channel.name());
                write_run_outputs(&dir, &run)?;
                let secs = run.report.wall_clock_seconds.unwrap_or(0.0);
                timing.push(TimingEntry {
                    experiment: channel.name(),
                    seconds: secs,
                });
                outcomes.extend(evaluate_gates(&run.report));
                outcomes.push(timing_gate(channel, secs));
            }
            fs::write(
                outdir.join("timing.json"),
                serde_json::to_string_pretty(&timing)? + "\n",
            )?;
            let summary = summary_text(&outcomes);
            fs::write(outdir.join("summary.txt"), &summary)?;
            print!("{summary}");
            Ok(!outcomes.iter().any(GateOutcome::failed))
        }
    }
}

fn base_config(channel: ChannelKind, seed: u64, m: usize) -> Result<ExperimentConfig> {
    Ok(match channel {
        ChannelKind::Bsc => ExperimentConfig::bsc(seed),
        ChannelKind::Msc => {
            let mut c = ExperimentConfig::msc(seed);
            c.m = m;
            c
        }
    })
}

fn write_run_outputs(dir: &Path, run: &crate::experiments::ExperimentRun) -> Result<()> {
    fs::create_dir_all(dir)?;
    run.table
        .write_csv(BufWriter::new(File::create(dir.join("dataset.csv"))?))?;
    for (kind, fit) in run.report.config.measures.iter().zip(&run.fits) {
        let path = dir.join(format!("curves_{kind}.csv"));
        fit.curve_set()
            .write_csv(BufWriter::new(File::create(path)?))?;
    }
    fs::write(dir.join("report.json"), run.report.to_deterministic_json()?)?;
    Ok(())
}

#[derive(Serialize)]
struct DecomposeSummary<'a> {
    response: &'a str,
    predictors: &'a [String],
    correlation: f64,
    e2: f64,
    outer_iterations: usize,
    e2_trace: &'a [f64],
    bins_used: usize,
    config: AceConfig,
}

#[derive(Serialize)]
struct EvalOutput {
    measure: MeasureKind,
    value: f64,
    log_base: LogBase,
    alpha_star: Option<f64>,
}

#[derive(Serialize)]
struct TimingEntry {
    experiment: &'static str,
    seconds: f64,
}
