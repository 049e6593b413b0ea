use std::path::PathBuf;
use std::process::ExitCode;

use apfrelay::harness::{diagnostic, plot, ScenarioConfig, SweepResult};
use apfrelay::{harness, Error};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "apfrelay", version, about = "Cooperative OFDM relaying with all-pass virtual channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the configured Es/N0 grid and write one CSV row per point.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// SER-versus-Es/N0 plot.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    Study {
        #[command(subcommand)]
        study: Study,
    },
    Report {
        #[command(subcommand)]
        report: Report,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Result CSV; rows are appended to an existing file.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Study {
    /// SER over a grid of pole moduli, filter orders and truncation lengths.
    Poles {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        moduli: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "6,12")]
        taps: Vec<usize>,
        #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
        esn0: f64,
    },
}

#[derive(Subcommand, Debug)]
enum Report {
    /// Magnitude statistics of the composite channel per UAV count.
    Flatness {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,7")]
        uavs: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        realizations: usize,
        /// Replace every propagation channel by the unit impulse.
        #[arg(long)]
        ideal_channel: bool,
        /// Write the sampled |H_eq(0,k)| traces as CSV.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Uncoded QPSK over AWGN against the closed-form error rates.
    Awgn {
        #[arg(long, value_delimiter = ',', default_value = "0,4,8", allow_negative_numbers = true)]
        esn0: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        symbols: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn workers(n: Option<usize>) -> usize {
    n.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn summarize(result: &SweepResult) {
    for (row, wall) in result.rows.iter().zip(&result.wall_times) {
        println!(
            "{} {} U={} M={} Mp={} Tc={} Es/N0={} dB: SER {:.3e} +- {:.1e} ({} symbol errors in {} blocks), BER {:.3e} [{:.1} s]",
            row.scheme,
            row.estimator,
            row.uavs,
            row.order,
            row.pole_modulus,
            row.taps,
            row.esn0_db,
            row.ser,
            row.ser_ci95,
            row.symbol_errors,
            row.blocks,
            row.ber,
            wall.as_secs_f64()
        );
    }
}

fn write_traces(report: &harness::FlatnessReport, path: &PathBuf) -> apfrelay::Result<()> {
    let mut text = String::from("U,k,magnitude\n");
    for e in &report.entries {
        for (k, m) in e.trace.iter().enumerate() {
            text.push_str(&format!("{},{k},{m}\n", e.uavs));
        }
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source })
}

fn run(cli: Cli) -> apfrelay::Result<()> {
    match cli.command {
        Command::Simulate { run, plot: plot_path } => {
            let cfg = ScenarioConfig::load(&run.config)?;
            let result = harness::run_sweep(&cfg, workers(run.workers))?;
            harness::write_results(&result, &run.out)?;
            if let Some(p) = plot_path {
                plot::write_svg(&result, &p)?;
            }
            summarize(&result);
        }
        Command::Study { study: Study::Poles { run, moduli, orders, taps, esn0 } } => {
            let cfg = ScenarioConfig::load(&run.config)?;
            let result = harness::pole_modulus_study(&cfg, &moduli, &orders, &taps, esn0, workers(run.workers))?;
            harness::write_results(&result, &run.out)?;
            summarize(&result);
        }
        Command::Report { report: Report::Flatness { config, uavs, realizations, ideal_channel, traces } } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = harness::flatness_report(&cfg, &uavs, realizations, ideal_channel)?;
            println!("U,maxDeviation,meanDeviation,selectivity");
            for e in &report.entries {
                println!("{},{:.6e},{:.6e},{:.6e}", e.uavs, e.max_deviation, e.mean_deviation, e.selectivity);
            }
            if let Some(p) = traces {
                write_traces(&report, &p)?;
            }
        }
        Command::Report { report: Report::Awgn { esn0, symbols, seed } } => {
            println!("EsN0Db,symbols,ser,serTheory,ber,berTheory,zScore");
            for es in esn0 {
                let c = diagnostic::awgn_qpsk(es, symbols, seed)?;
                let (ser, theory) = (c.ser(), diagnostic::qpsk_ser_theory(es));
                let z = (ser - theory) / (theory * (1.0 - theory) / c.symbols as f64).sqrt();
                println!(
                    "{es},{},{ser:.6e},{theory:.6e},{:.6e},{:.6e},{z:.2}",
                    c.symbols,
                    c.ber(),
                    diagnostic::qpsk_ber_theory(es)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
