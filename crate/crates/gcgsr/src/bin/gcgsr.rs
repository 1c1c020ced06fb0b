//! Benchmark CLI: run experiment specs, calibrate step sizes, time solver
//! iterations, and materialize the bundled sensor dataset.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gcgsr::experiment::{
    bench_iteration_cost, bench_to_csv, calibrate_step_sizes, emit_results, load_spec,
    run_experiment, SolverEntry,
};
use gcgsr::solver::{Algorithm, KernelMode, SolverConfig};

#[derive(Parser)]
#[command(
    name = "gcgsr",
    about = "Robust graph signal recovery benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo experiment described by a TOML spec file.
    Run(RunArgs),
    /// Report per-solver step sizes matched to a target initial NMSD drop.
    Calibrate(CalibrateArgs),
    /// Time solver iterations across graph sizes and emit a CSV table.
    Bench(BenchArgs),
    /// Write the bundled sensor dataset (and document the real source).
    FetchData(FetchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment spec (TOML).
    spec: PathBuf,
    /// Override the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the spec's Monte-Carlo run count.
    #[arg(long)]
    runs: Option<usize>,
    /// Override the spec's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Path to the experiment spec (TOML).
    spec: PathBuf,
    /// Target NMSD drop (dB) over the first 10 iterations.
    #[arg(long, default_value_t = 3.0)]
    target_drop: f64,
    /// Override the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated graph sizes.
    #[arg(long, value_delimiter = ',', default_value = "81,162,324,648")]
    sizes: Vec<usize>,
    /// Steps timed per (solver, size) pair.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Directory for bench.csv; stdout only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FetchArgs {
    /// Destination for the sensor CSV.
    #[arg(long, default_value = "data/sensors.csv")]
    out: PathBuf,
}

/// The 54-sensor fixture, bundled so experiments never need a download.
const SENSOR_FIXTURE: &str = include_str!("../../data/sensors_fixture.csv");

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> gcgsr::Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::FetchData(args) => cmd_fetch(args),
    }
}

fn cmd_run(args: RunArgs) -> gcgsr::Result<()> {
    let mut spec = load_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    if let Some(runs) = args.runs {
        spec.monte_carlo_runs = runs;
    }
    if let Some(out) = args.out {
        spec.output_dir = Some(out);
    }
    let result = run_experiment(&spec)?;
    println!(
        "experiment {} on {} nodes, {} runs",
        spec.name, result.n_nodes, spec.monte_carlo_runs
    );
    for t in &result.traces {
        println!(
            "  {}: final NMSD {:.4} dB (std {:.4})",
            t.solver,
            t.final_mean_db().unwrap_or(f64::NAN),
            t.final_std_db()
        );
    }
    if let Some(dir) = &spec.output_dir {
        emit_results(&result, dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> gcgsr::Result<()> {
    let mut spec = load_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    let steps = calibrate_step_sizes(&spec, args.target_drop)?;
    println!("step sizes for a {} dB drop over 10 iterations:", args.target_drop);
    for (label, xi) in steps {
        println!("  {label}: step_size = {xi}");
    }
    Ok(())
}

fn default_bench_solvers() -> Vec<SolverEntry> {
    let base = SolverConfig {
        algorithm: Algorithm::GcGsr,
        step_size: 0.01,
        gamma: 1.0,
        kernel: KernelMode::Fixed {
            alpha: 2.0,
            beta: 1.0,
        },
        max_iters: 1,
        stop_tol: 0.0,
    };
    vec![
        SolverEntry {
            label: "gc-gsr".into(),
            config: base,
        },
        SolverEntry {
            label: "lms".into(),
            config: SolverConfig {
                algorithm: Algorithm::Lms,
                ..base
            },
        },
        SolverEntry {
            label: "lmp".into(),
            config: SolverConfig {
                algorithm: Algorithm::Lmp { p: 1.3 },
                ..base
            },
        },
    ]
}

fn cmd_bench(args: BenchArgs) -> gcgsr::Result<()> {
    let rows = bench_iteration_cost(&args.sizes, args.steps, &default_bench_solvers())?;
    let csv = bench_to_csv(&rows);
    print!("{csv}");
    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir).map_err(|e| gcgsr::Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let path = dir.join("bench.csv");
        std::fs::write(&path, csv).map_err(|e| gcgsr::Error::Io {
            path: path.clone(),
            source: e,
        })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_fetch(args: FetchArgs) -> gcgsr::Result<()> {
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| gcgsr::Error::Io {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
    }
    std::fs::write(&args.out, SENSOR_FIXTURE).map_err(|e| gcgsr::Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    println!("wrote bundled sensor snapshot to {}", args.out.display());
    println!(
        "This is a synthetic stand-in with the layout sensor_id,x,y,temperature,timestamp."
    );
    println!(
        "The real 54-sensor temperature dataset is published by the Intel Berkeley"
    );
    println!(
        "Research lab (http://db.csail.mit.edu/labdata/labdata.html); join mote"
    );
    println!(
        "locations with one reading per sensor at a chosen timestamp to reproduce"
    );
    println!("the same CSV layout.");
    Ok(())
}
