//! `jssa` — run, sweep, plot, and verify the two-timescale scheduling and
//! pilot-allocation simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use jssa_core::config::parse_config;
use jssa_core::engine::{run_simulation, run_sweep, RunMetrics};
use jssa_core::error::{Error, Result};
use jssa_core::lyapunov::{theorem1_report, TrendPoint};
use jssa_core::plot::emit_plots;
use jssa_core::report::{render_summary, write_outputs, SERIES_FILE};
use jssa_core::verify::{oracle_equivalence_suite, slot_inequality_suite, SuiteReport};

#[derive(Parser)]
#[command(
    name = "jssa",
    version,
    about = "Massive MIMO downlink simulator: joint user scheduling and dynamic SRS allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write summary, series, frames, and manifest.
    Run {
        /// Configuration file (flat key = value; empty file for defaults).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configuration at several V values with common random numbers.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated V values, e.g. 200,2000,20000.
        #[arg(long = "v-grid", value_delimiter = ',', required = true)]
        v_grid: Vec<f64>,
        /// Number of seeds per V (seeds = rng_seed, rng_seed+1, ...).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render throughput and total-queue figures from emitted series.
    Plot {
        /// Run directory (containing series.csv) or sweep directory
        /// (containing run subdirectories); repeatable.
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the certification suites (selection oracle, slot inequality).
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::Sweep {
            config,
            v_grid,
            seeds,
            out,
        } => cmd_sweep(&config, &v_grid, seeds, &out),
        Command::Plot { inputs, out } => cmd_plot(&inputs, &out),
        Command::Verify { config } => cmd_verify(&config),
    }
}

fn cmd_run(config: &Path, out: &Path) -> Result<()> {
    let cfg = parse_config(config)?;
    let start = Instant::now();
    let metrics = run_simulation(&cfg)?;
    write_outputs(&metrics, &cfg, out, start.elapsed().as_secs_f64())?;
    print!("{}", render_summary(&metrics));
    println!("outputs: {}", out.display());
    Ok(())
}

fn run_label(m: &RunMetrics) -> String {
    format!("v{}_s{}", m.v_param, m.rng_seed)
}

fn cmd_sweep(config: &Path, v_grid: &[f64], seeds: u64, out: &Path) -> Result<()> {
    if seeds == 0 {
        return Err(Error::InvalidInput("--seeds must be at least 1".into()));
    }
    let base = parse_config(config)?;
    let seed_list: Vec<u64> = (0..seeds).map(|i| base.rng_seed + i).collect();
    let start = Instant::now();
    let runs = run_sweep(&base, v_grid, &seed_list)?;
    let per_run_s = start.elapsed().as_secs_f64() / runs.len() as f64;

    for metrics in &runs {
        let mut cfg = base.clone();
        cfg.v_param = metrics.v_param;
        cfg.rng_seed = metrics.rng_seed;
        let dir = out.join(run_label(metrics));
        write_outputs(metrics, &cfg, &dir, per_run_s)?;
        println!(
            "v={:<8} seed={:<4} reconfig_rate={:.4} avg_cost_per_s={:.4} \
             avg_throughput_bps={:.4e} avg_total_queue_bits={:.4e}",
            metrics.v_param,
            metrics.rng_seed,
            metrics.reconfig_rate,
            metrics.avg_cost_per_s,
            metrics.avg_throughput_bps,
            metrics.avg_total_queue_bits,
        );
    }

    // Per-V averages over seeds feed the tradeoff report.
    let mut points = Vec::new();
    for &v in v_grid {
        let of_v: Vec<&RunMetrics> = runs.iter().filter(|m| m.v_param == v).collect();
        let n = of_v.len() as f64;
        points.push(TrendPoint {
            v,
            avg_cost_per_s: of_v.iter().map(|m| m.avg_cost_per_s).sum::<f64>() / n,
            reconfig_rate: of_v.iter().map(|m| m.reconfig_rate).sum::<f64>() / n,
            avg_total_queue_bits: of_v.iter().map(|m| m.avg_total_queue_bits).sum::<f64>() / n,
        });
    }
    match theorem1_report(&points, 0.02) {
        Ok(report) => {
            println!(
                "tradeoff: cost non-increasing in V: {}; queue non-decreasing in V: {}",
                report.cost_nonincreasing, report.queue_nondecreasing
            );
            for p in &report.points {
                println!(
                    "  V={:<8} reconfig_rate={:.4} avg_cost_per_s={:.4} avg_total_queue_bits={:.4e}",
                    p.v, p.reconfig_rate, p.avg_cost_per_s, p.avg_total_queue_bits
                );
            }
        }
        Err(e) => println!("tradeoff report skipped: {e}"),
    }
    println!("outputs: {}", out.display());
    Ok(())
}

/// A run directory holds `series.csv` directly; a sweep directory holds run
/// subdirectories.
fn collect_series(inputs: &[PathBuf]) -> Result<Vec<(String, PathBuf)>> {
    let mut found = Vec::new();
    for dir in inputs {
        let direct = dir.join(SERIES_FILE);
        if direct.is_file() {
            let label = dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| dir.display().to_string());
            found.push((label, direct));
            continue;
        }
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut subs: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(SERIES_FILE).is_file())
            .collect();
        subs.sort();
        for sub in subs {
            let label = sub
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| sub.display().to_string());
            found.push((label, sub.join(SERIES_FILE)));
        }
    }
    if found.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no {SERIES_FILE} found under the given --in directories; \
             pass run directories produced by `jssa run` or `jssa sweep`"
        )));
    }
    Ok(found)
}

fn cmd_plot(inputs: &[PathBuf], out: &Path) -> Result<()> {
    let series = collect_series(inputs)?;
    let files = emit_plots(&series, out)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn print_suite(report: &SuiteReport) {
    println!(
        "{:<20} {} — {} trial(s), {} failure(s); {}",
        report.name,
        if report.passed() { "PASS" } else { "FAIL" },
        report.trials,
        report.failures,
        report.detail
    );
}

fn cmd_verify(config: &Path) -> Result<()> {
    let cfg = parse_config(config)?;
    let oracle = oracle_equivalence_suite(12, 4, 1000, cfg.rng_seed);
    print_suite(&oracle);
    let slots = slot_inequality_suite(21, 10.0, 100_000, cfg.rng_seed.wrapping_add(1));
    print_suite(&slots);
    if oracle.passed() && slots.passed() {
        Ok(())
    } else {
        Err(Error::InvalidInput("verification suites failed".into()))
    }
}
