use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flicker::campaign::{compare, format_results, monte_carlo, MonteCarloSpec};
use flicker::config::{load, BaselineDoc, PipelineDoc, WaveformDoc};
use flicker::io::{format_trace, read_series, write_atomic, write_series};
use flicker::report::{build_report, estimate, RunOptions};
use flicker::{Error, Result};
use flicker_core::signal::synthesize;
use flicker_core::WaveformSpec;

/// Voltage-flicker estimation: H-infinity envelopes + ADALINE decomposition.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a waveform to `time_s,voltage_pu` CSV.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate harmonics and flicker from a CSV series.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-step envelopes as `time_s,envelope_1..envelope_N`.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Waveform spec the input was generated from, for error statistics.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Monte Carlo campaign with random harmonic and flicker amplitudes.
    Mc {
        /// Template waveform (orders, sampling, noise level).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the estimator and the spectral baseline side by side.
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

fn load_spec(path: &std::path::Path) -> Result<WaveformSpec> {
    load::<WaveformDoc>(path)?.to_spec()
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Data(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { spec, out } => {
            let spec = load_spec(&spec)?;
            write_series(&out, &synthesize(&spec)?)
        }
        Command::Estimate {
            input,
            config,
            out,
            trace,
            truth,
        } => {
            let config = load::<PipelineDoc>(&config)?.to_config()?;
            let truth = truth.as_deref().map(load_spec).transpose()?;
            let series = read_series(&input)?;
            let options = RunOptions {
                full_trace: trace.is_some(),
            };
            let est = estimate(&series, &config, options)?;
            let report = build_report(&est, &config, truth.as_ref())?;
            if let Some(path) = trace {
                write_atomic(&path, &format_trace(series.rate, &est.trace)?)?;
            }
            write_atomic(&out, &to_json(&report)?)
        }
        Command::Mc {
            spec,
            config,
            runs,
            seed,
            out,
            workers,
        } => {
            let base = load_spec(&spec)?;
            let config = load::<PipelineDoc>(&config)?.to_config()?;
            let mut mc = MonteCarloSpec::new(base, runs, seed);
            mc.workers = workers;
            let results = monte_carlo(&mc, &config)?;
            let failed = results.iter().filter(|r| r.failure.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} of {runs} runs failed; see the failure column");
            }
            write_atomic(&out, &format_results(&results)?)
        }
        Command::Compare {
            input,
            config,
            baseline,
            out,
            truth,
        } => {
            let config = load::<PipelineDoc>(&config)?.to_config()?;
            let baseline = load::<BaselineDoc>(&baseline)?.to_config()?;
            let truth = truth.as_deref().map(load_spec).transpose()?;
            let series = read_series(&input)?;
            let report = compare(&series, &config, &baseline, truth.as_ref())?;
            write_atomic(&out, &to_json(&report)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
