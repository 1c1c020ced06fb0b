//! Monte-Carlo experiment harness: declarative specs, seeded trial
//! orchestration, step-size calibration, a per-iteration timing benchmark,
//! and CSV emission.
//!
//! Everything an experiment does is a pure function of its spec: the graph
//! comes from `base_seed`, run `r` derives its signal/mask/noise streams
//! from `base_seed + r`, and runs are ordered by index before aggregation,
//! so the emitted files are byte-identical across repeats regardless of the
//! worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, load_adjacency_csv, GraphModel, SamplingMask};
use crate::metrics::{NmsdTrace, TraceAveraging};
use crate::noise::{sample_alpha_stable, sample_ggd, scale_to_snr, AlphaStableNoise, GgdNoise};
use crate::sensor::{build_sensor_graph, load_sensor_csv, SensorDataset};
use crate::solver::{run, stability_bound, SolverConfig};
use crate::synth::{bandlimited_signal, choose_mask, kronecker_probability, sample_adjacency, BandlimitedConfig, KroneckerConfig};

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum GraphSource {
    /// Kronecker-power random graph; `order` factors of the 3×3 seed.
    Kronecker { order: usize },
    /// Headerless N×N adjacency CSV.
    AdjacencyCsv { path: PathBuf },
    /// Sensor CSV; k-NN Gaussian graph on the coordinates. A missing
    /// `width` means the mean k-NN distance.
    Sensor {
        path: PathBuf,
        k_neighbors: usize,
        width: Option<f64>,
    },
}

/// Ground-truth signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum SignalSource {
    /// Fresh bandlimited draw per run.
    Bandlimited { bandwidth: usize },
    /// The sensor dataset's temperature snapshot (requires a sensor graph).
    Snapshot,
}

/// Observation noise. `target_snr_db`, when set, rescales each draw so the
/// full-vector SNR hits the target; otherwise the raw scale applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NoiseSpec {
    None,
    Ggd {
        nu: f64,
        eta: f64,
        target_snr_db: Option<f64>,
    },
    AlphaStable {
        p: f64,
        mu: f64,
        tau: f64,
        target_snr_db: Option<f64>,
    },
}

/// Whether each solver iteration sees a fresh noise draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseRefresh {
    /// Streaming observations: `y[n] = Φ(x + v[n])` with independent noise
    /// every iteration. This is the adaptive-filtering regime and the
    /// default.
    PerIteration,
    /// One noisy observation per run, iterated to its fixed point.
    PerRun,
}

impl Default for NoiseRefresh {
    fn default() -> Self {
        NoiseRefresh::PerIteration
    }
}

/// One solver to run, with a display label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEntry {
    pub label: String,
    pub config: SolverConfig,
}

/// Declarative description of a full experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub graph: GraphSource,
    pub signal: SignalSource,
    pub noise: NoiseSpec,
    /// Number of observed nodes M.
    pub mask_size: usize,
    pub monte_carlo_runs: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub noise_refresh: NoiseRefresh,
    #[serde(default)]
    pub averaging: TraceAveraging,
    /// Worker threads for concurrent runs; absent means rayon's default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub solvers: Vec<SolverEntry>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.monte_carlo_runs == 0 {
            return Err(Error::Spec("monte_carlo_runs must be at least 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Spec("solver list is empty".into()));
        }
        if self.mask_size == 0 {
            return Err(Error::Spec("mask_size must be at least 1".into()));
        }
        if matches!(self.signal, SignalSource::Snapshot)
            && !matches!(self.graph, GraphSource::Sensor { .. })
        {
            return Err(Error::Spec(
                "snapshot signal requires a sensor graph source".into(),
            ));
        }
        for entry in &self.solvers {
            entry.config.validate()?;
        }
        match &self.noise {
            NoiseSpec::Ggd { nu, eta, .. } => {
                GgdNoise::new(*nu, *eta)?;
            }
            NoiseSpec::AlphaStable { p, mu, tau, .. } => {
                AlphaStableNoise::new(*p, *mu, *tau)?;
            }
            NoiseSpec::None => {}
        }
        Ok(())
    }
}

/// Parses a TOML spec file.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spec(&text)
}

/// Parses a TOML spec from text.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec =
        toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Serializes a spec to TOML; `parse_spec` of the output gives the spec
/// back.
pub fn spec_to_toml(spec: &ExperimentSpec) -> String {
    toml::to_string_pretty(spec).expect("spec serializes")
}

// Sub-stream derivation: one u64 seed per purpose per run, spread by
// splitmix64 so adjacent run seeds do not produce overlapping streams.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_SIGNAL: u64 = 1;
const STREAM_MASK: u64 = 2;
const STREAM_NOISE: u64 = 3;

fn sub_seed(run_seed: u64, stream: u64) -> u64 {
    splitmix64(run_seed.wrapping_mul(4).wrapping_add(stream))
}

/// Graph plus the fixed (snapshot) ground truth when one exists.
struct Instance {
    graph: GraphModel,
    snapshot: Option<Array1<f64>>,
}

fn build_instance(spec: &ExperimentSpec) -> Result<Instance> {
    match &spec.graph {
        GraphSource::Kronecker { order } => {
            let cfg = KroneckerConfig {
                order: *order,
                ..KroneckerConfig::standard(spec.base_seed)
            };
            let p = kronecker_probability(&cfg)?;
            let graph = sample_adjacency(&p, spec.base_seed)?;
            Ok(Instance {
                graph,
                snapshot: None,
            })
        }
        GraphSource::AdjacencyCsv { path } => {
            let graph = build_graph(load_adjacency_csv(path)?)?;
            Ok(Instance {
                graph,
                snapshot: None,
            })
        }
        GraphSource::Sensor {
            path,
            k_neighbors,
            width,
        } => {
            let ds: SensorDataset = load_sensor_csv(path)?;
            let width = width.unwrap_or_else(|| ds.mean_knn_distance(*k_neighbors));
            let graph = build_sensor_graph(&ds, *k_neighbors, width)?;
            Ok(Instance {
                graph,
                snapshot: Some(ds.snapshot),
            })
        }
    }
}

fn draw_signal(spec: &ExperimentSpec, inst: &Instance, run_seed: u64) -> Result<Array1<f64>> {
    match &spec.signal {
        SignalSource::Bandlimited { bandwidth } => bandlimited_signal(
            &inst.graph,
            &BandlimitedConfig {
                bandwidth: *bandwidth,
                rng_seed: sub_seed(run_seed, STREAM_SIGNAL),
            },
        ),
        SignalSource::Snapshot => inst
            .snapshot
            .clone()
            .ok_or_else(|| Error::Spec("snapshot signal without sensor dataset".into())),
    }
}

fn draw_noise(spec: &ExperimentSpec, x_true: &Array1<f64>, seed: u64) -> Result<Array1<f64>> {
    let n = x_true.len();
    match &spec.noise {
        NoiseSpec::None => Ok(Array1::zeros(n)),
        NoiseSpec::Ggd {
            nu,
            eta,
            target_snr_db,
        } => {
            let v = sample_ggd(&GgdNoise::new(*nu, *eta)?, n, seed);
            match target_snr_db {
                Some(snr) => scale_to_snr(x_true, &v, *snr),
                None => Ok(v),
            }
        }
        NoiseSpec::AlphaStable {
            p,
            mu,
            tau,
            target_snr_db,
        } => {
            let v = sample_alpha_stable(&AlphaStableNoise::new(*p, *mu, *tau)?, n, seed);
            match target_snr_db {
                Some(snr) => scale_to_snr(x_true, &v, *snr),
                None => Ok(v),
            }
        }
    }
}

/// Everything one Monte-Carlo run produces: the per-solver NMSD traces.
type RunTraces = Vec<Vec<f64>>;

/// Masked observation `y = Φ(x + v)`: unsampled entries stay zero.
fn observation(mask: &SamplingMask, x_true: &Array1<f64>, v: &Array1<f64>) -> Array1<f64> {
    Array1::from_iter((0..x_true.len()).map(|i| mask.factor(i) * (x_true[i] + v[i])))
}

/// One solver on one Monte-Carlo run, honoring the spec's noise-refresh
/// mode. Returns the per-iteration NMSD trace.
fn simulate(
    spec: &ExperimentSpec,
    inst: &Instance,
    cfg: &SolverConfig,
    run_index: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let run_seed = spec.base_seed.wrapping_add(run_index as u64);
    let x_true = draw_signal(spec, inst, run_seed)?;
    let n = x_true.len();
    if spec.mask_size > n {
        return Err(Error::BadMaskSize {
            m: spec.mask_size,
            n,
        });
    }
    let mask = choose_mask(n, spec.mask_size, sub_seed(run_seed, STREAM_MASK))?;
    let noise_base = sub_seed(run_seed, STREAM_NOISE);

    match spec.noise_refresh {
        NoiseRefresh::PerRun => {
            let v = draw_noise(spec, &x_true, noise_base)?;
            let y = observation(&mask, &x_true, &v);
            let (_, trace) = run(&inst.graph, cfg, &mask, &y, Some(&x_true))?;
            Ok(trace)
        }
        NoiseRefresh::PerIteration => {
            let v = draw_noise(spec, &x_true, splitmix64(noise_base.wrapping_add(1)))?;
            let mut y = observation(&mask, &x_true, &v);
            let mut state = crate::solver::RecoveryState::initial(cfg, &mask, &y)?;
            let mut trace = Vec::with_capacity(cfg.max_iters);
            for iter in 1..=cfg.max_iters {
                if iter > 1 {
                    let v =
                        draw_noise(spec, &x_true, splitmix64(noise_base.wrapping_add(iter as u64)))?;
                    y = observation(&mask, &x_true, &v);
                }
                let prev_x = state.x().clone();
                state = crate::solver::step(&inst.graph, cfg, &mask, &y, &state)?;
                trace.push(crate::metrics::nmsd(&x_true, state.x())?);
                let delta = state
                    .x()
                    .iter()
                    .zip(prev_x.iter())
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                if cfg.stop_tol > 0.0 && delta < cfg.stop_tol {
                    break;
                }
            }
            Ok(trace)
        }
    }
}

fn execute_run(spec: &ExperimentSpec, inst: &Instance, run_index: usize) -> Result<RunTraces> {
    spec.solvers
        .iter()
        .map(|entry| simulate(spec, inst, &entry.config, run_index))
        .collect()
}

/// Result bundle of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub n_nodes: usize,
    /// One aggregated trace per solver, in spec order.
    pub traces: Vec<NmsdTrace>,
}

/// Runs the full Monte-Carlo protocol described by the spec. Runs execute
/// concurrently (bounded by `workers`) and are re-ordered by run index, so
/// the output is deterministic for a given spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let inst = build_instance(spec)?;

    let execute_all = || -> Result<Vec<RunTraces>> {
        (0..spec.monte_carlo_runs)
            .into_par_iter()
            .map(|r| {
                execute_run(spec, &inst, r).map_err(|e| Error::RunFailed {
                    run: r,
                    source: Box::new(e),
                })
            })
            .collect()
    };

    let per_run: Vec<RunTraces> = match spec.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Spec(format!("worker pool: {e}")))?
            .install(execute_all),
        None => execute_all(),
    }?;

    let traces = spec
        .solvers
        .iter()
        .enumerate()
        .map(|(s, entry)| {
            let runs: Vec<Vec<f64>> = per_run.iter().map(|r| r[s].clone()).collect();
            NmsdTrace::aggregate(entry.label.clone(), runs, spec.averaging)
        })
        .collect();

    Ok(ExperimentResult {
        spec: spec.clone(),
        n_nodes: inst.graph.n_nodes(),
        traces,
    })
}

/// NMSD drop (positive dB) of one solver over its first `iters` iterations
/// on the calibration instance (run index 0).
fn initial_drop(
    spec: &ExperimentSpec,
    inst: &Instance,
    cfg: &SolverConfig,
    step_size: f64,
    iters: usize,
) -> Result<f64> {
    let mut probe = *cfg;
    probe.step_size = step_size;
    probe.max_iters = iters;
    probe.stop_tol = 0.0;
    match simulate(spec, inst, &probe, 0) {
        // x starts at zero, i.e. 0 dB, so the drop is minus the final NMSD.
        Ok(trace) => Ok(-trace.last().copied().unwrap_or(0.0)),
        // A diverging probe counts as no drop at all.
        Err(Error::Diverged { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// NMSD drop of one solver configuration on the spec's calibration
/// instance, over the configured iteration budget. Exposed for diagnosing
/// calibration behavior.
pub fn probe_initial_drop(spec: &ExperimentSpec, cfg: &SolverConfig) -> Result<f64> {
    let inst = build_instance(spec)?;
    initial_drop(spec, &inst, cfg, cfg.step_size, cfg.max_iters)
}

/// Calibrated step size per solver: binary search over ξ in (0, 2/λ_max)
/// until the NMSD drop over the first 10 iterations matches the target
/// within 10%. Saturates at the search bounds when the target is out of
/// reach.
pub fn calibrate_step_sizes(
    spec: &ExperimentSpec,
    target_initial_drop_db: f64,
) -> Result<Vec<(String, f64)>> {
    spec.validate()?;
    if !(target_initial_drop_db.is_finite() && target_initial_drop_db >= 0.0) {
        return Err(Error::invalid(
            "target_initial_drop_db",
            format!("must be >= 0, got {target_initial_drop_db}"),
        ));
    }
    let inst = build_instance(spec)?;
    let bound = stability_bound(&inst.graph)?;
    let lo_bound = bound * 1e-6;
    let hi_bound = bound * 0.999;
    const ITERS: usize = 10;

    let mut out = Vec::with_capacity(spec.solvers.len());
    for entry in &spec.solvers {
        let drop_at = |xi: f64| initial_drop(spec, &inst, &entry.config, xi, ITERS);
        let mut lo = lo_bound;
        let mut hi = hi_bound;
        if target_initial_drop_db <= drop_at(lo)?.max(0.0) {
            // The smallest step already meets the target; nothing to soak.
            out.push((entry.label.clone(), lo));
            continue;
        }
        let mut xi = {
            // The drop grows with ξ while the iteration is stable and
            // collapses (to −∞ on divergence) past that; bisect with
            // unstable probes treated as oversized steps.
            let mut xi = 0.5 * (lo + hi);
            for _ in 0..60 {
                let d = drop_at(xi)?;
                if d.is_finite()
                    && (d - target_initial_drop_db).abs() <= 0.1 * target_initial_drop_db
                {
                    break;
                }
                if d.is_finite() && d < target_initial_drop_db {
                    lo = xi;
                } else {
                    hi = xi;
                }
                xi = 0.5 * (lo + hi);
            }
            xi
        };
        // Back off while the full experiment horizon shows no sustained
        // progress. An oversized step either diverges outright or settles
        // into a limit cycle whose transient mimics the requested initial
        // drop; instabilities of width-learning runs can even wait until
        // the widths have tightened, so nothing shorter than the real
        // horizon is trustworthy.
        let soak_iters = entry.config.max_iters.clamp(ITERS, 20_000);
        for _ in 0..40 {
            let short = drop_at(xi)?;
            let soak = initial_drop(spec, &inst, &entry.config, xi, soak_iters)?;
            let sustained = short.is_finite()
                && soak.is_finite()
                && soak > 0.0
                && (soak >= short + 1.0 || soak >= 3.0 * target_initial_drop_db + 1.0);
            if sustained {
                break;
            }
            xi *= 0.7;
        }
        out.push((entry.label.clone(), xi));
    }
    Ok(out)
}

/// One row of the per-iteration timing table.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub algorithm: String,
    pub n_nodes: usize,
    pub median_step_seconds: f64,
}

/// Deterministic connected graph for timing: a ring with long chords. The
/// step cost of the dense recursions depends on N, not on the edge set.
fn bench_graph(n: usize) -> Result<GraphModel> {
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let j = (i + 1) % n;
        w[[i, j]] = 1.0;
        w[[j, i]] = 1.0;
        let k = (i + n / 3).max(i + 1) % n;
        if k != i {
            w[[i, k]] = 0.5;
            w[[k, i]] = 0.5;
        }
    }
    build_graph(w)
}

/// Times `steps` solver iterations for every `(algorithm, size)` pair and
/// reports the median per-step wall time.
pub fn bench_iteration_cost(
    sizes: &[usize],
    steps: usize,
    solvers: &[SolverEntry],
) -> Result<Vec<BenchRow>> {
    if sizes.is_empty() {
        return Err(Error::EmptyInput("bench size list"));
    }
    if solvers.is_empty() {
        return Err(Error::EmptyInput("bench solver list"));
    }
    let mut rows = Vec::new();
    for entry in solvers {
        for &n in sizes {
            if n < 3 {
                return Err(Error::invalid("sizes", format!("need n >= 3, got {n}")));
            }
            let g = bench_graph(n)?;
            let mask = SamplingMask::full(n)?;
            let y = Array1::from_elem(n, 1.0);
            // Keep the iteration stable regardless of graph size: λ_max is
            // bounded by twice the maximum degree.
            let max_degree = g.degree().iter().fold(0.0_f64, |m, &d| m.max(d));
            let mut cfg = entry.config;
            cfg.step_size = 0.4 / (2.0 * max_degree);
            cfg.max_iters = steps;
            cfg.stop_tol = 0.0;
            cfg.validate()?;

            let mut state = crate::solver::RecoveryState::initial(&cfg, &mask, &y)?;
            // Untimed warmup settles the allocator and caches so the
            // medians reflect the steady per-step cost.
            for _ in 0..steps.min(100) {
                state = crate::solver::step(&g, &cfg, &mask, &y, &state)?;
            }
            let mut samples = Vec::with_capacity(steps);
            for _ in 0..steps {
                let t0 = Instant::now();
                state = crate::solver::step(&g, &cfg, &mask, &y, &state)?;
                samples.push(t0.elapsed().as_secs_f64());
            }
            samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.push(BenchRow {
                algorithm: entry.label.clone(),
                n_nodes: n,
                median_step_seconds: samples[samples.len() / 2],
            });
        }
    }
    Ok(rows)
}

/// Renders the bench table as CSV.
pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("algorithm,n,median_step_seconds\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.algorithm, r.n_nodes, r.median_step_seconds)
            .expect("string write");
    }
    out
}

/// Writes `trace.csv`, `summary.csv`, and `spec.echo` into `dir`, creating
/// it if needed. Emission is pure formatting, so re-emitting the same
/// bundle produces identical bytes.
pub fn emit_results(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut trace = String::from("solver,run,iteration,nmsd_db\n");
    for t in &result.traces {
        for (run_idx, run_trace) in t.runs.iter().enumerate() {
            for (iter_idx, db) in run_trace.iter().enumerate() {
                writeln!(trace, "{},{},{},{}", t.solver, run_idx, iter_idx + 1, db)
                    .expect("string write");
            }
        }
    }
    let trace_path = dir.join("trace.csv");
    std::fs::write(&trace_path, trace).map_err(|e| Error::io(&trace_path, e))?;

    let mut summary = String::from("solver,mean_final_nmsd_db,std_final_nmsd_db\n");
    for t in &result.traces {
        writeln!(
            summary,
            "{},{},{}",
            t.solver,
            t.final_mean_db().unwrap_or(f64::NAN),
            t.final_std_db()
        )
        .expect("string write");
    }
    let summary_path = dir.join("summary.csv");
    std::fs::write(&summary_path, summary).map_err(|e| Error::io(&summary_path, e))?;

    let echo_path = dir.join("spec.echo");
    std::fs::write(&echo_path, spec_to_toml(&result.spec)).map_err(|e| Error::io(&echo_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::TraceAveraging;
    use crate::solver::{Algorithm, KernelMode};

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            name: "unit".into(),
            graph: GraphSource::Kronecker { order: 2 },
            signal: SignalSource::Bandlimited { bandwidth: 3 },
            noise: NoiseSpec::Ggd {
                nu: 1.3,
                eta: 0.1,
                target_snr_db: Some(25.0),
            },
            mask_size: 7,
            monte_carlo_runs: 3,
            base_seed: 11,
            noise_refresh: NoiseRefresh::PerIteration,
            averaging: TraceAveraging::LinearRatio,
            workers: Some(2),
            output_dir: None,
            solvers: vec![
                SolverEntry {
                    label: "gc-gsr".into(),
                    config: SolverConfig {
                        algorithm: Algorithm::GcGsr,
                        step_size: 0.05,
                        gamma: 100.0,
                        kernel: KernelMode::Fixed {
                            alpha: 2.0,
                            beta: 1.0,
                        },
                        max_iters: 40,
                        stop_tol: 0.0,
                    },
                },
                SolverEntry {
                    label: "lms".into(),
                    config: SolverConfig {
                        algorithm: Algorithm::Lms,
                        step_size: 0.05,
                        gamma: 1.0,
                        kernel: KernelMode::Fixed {
                            alpha: 2.0,
                            beta: 1.0,
                        },
                        max_iters: 40,
                        stop_tol: 0.0,
                    },
                },
            ],
        }
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = small_spec();
        let text = spec_to_toml(&spec);
        let parsed = parse_spec(&text).unwrap();
        assert_eq!(spec, parsed);
    }

    #[test]
    fn spec_validation_catches_basic_mistakes() {
        let mut bad = small_spec();
        bad.monte_carlo_runs = 0;
        assert!(bad.validate().is_err());
        let mut bad = small_spec();
        bad.solvers.clear();
        assert!(bad.validate().is_err());
        let mut bad = small_spec();
        bad.signal = SignalSource::Snapshot;
        assert!(matches!(bad.validate().unwrap_err(), Error::Spec(_)));
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = small_spec();
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.traces.len(), 2);
        for (ta, tb) in a.traces.iter().zip(&b.traces) {
            assert_eq!(ta.runs, tb.runs);
            assert_eq!(ta.mean_db, tb.mean_db);
        }
        // Worker count must not change the numbers either.
        let mut serial = spec.clone();
        serial.workers = Some(1);
        let c = run_experiment(&serial).unwrap();
        for (ta, tc) in a.traces.iter().zip(&c.traces) {
            assert_eq!(ta.runs, tc.runs);
        }
    }

    #[test]
    fn different_seeds_change_the_outcome() {
        let spec = small_spec();
        let mut other = spec.clone();
        other.base_seed = 12;
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&other).unwrap();
        assert_ne!(a.traces[0].runs, b.traces[0].runs);
    }

    #[test]
    fn oversized_mask_is_reported_with_run_index() {
        let mut spec = small_spec();
        spec.mask_size = 10_000;
        match run_experiment(&spec).unwrap_err() {
            Error::RunFailed { run: 0, source } => {
                assert!(matches!(*source, Error::BadMaskSize { .. }));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn emitted_files_are_byte_identical_across_emissions() {
        let spec = small_spec();
        let result = run_experiment(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let d1 = dir.path().join("one");
        let d2 = dir.path().join("two");
        emit_results(&result, &d1).unwrap();
        emit_results(&result, &d2).unwrap();
        for file in ["trace.csv", "summary.csv", "spec.echo"] {
            let a = std::fs::read(d1.join(file)).unwrap();
            let b = std::fs::read(d2.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs");
        }
        // And the echoed spec parses back to the original.
        let echoed = parse_spec(&std::fs::read_to_string(d1.join("spec.echo")).unwrap()).unwrap();
        assert_eq!(echoed, spec);
    }

    #[test]
    fn emit_rejects_unwritable_directory() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("not_a_dir");
        std::fs::write(&blocker, b"file").unwrap();
        let result = run_experiment(&small_spec()).unwrap();
        assert!(matches!(
            emit_results(&result, &blocker).unwrap_err(),
            Error::Io { .. }
        ));
    }

    #[test]
    fn identical_solvers_calibrate_identically() {
        let mut spec = small_spec();
        spec.solvers = vec![
            SolverEntry {
                label: "a".into(),
                config: spec.solvers[1].config,
            },
            SolverEntry {
                label: "b".into(),
                config: spec.solvers[1].config,
            },
        ];
        let xs = calibrate_step_sizes(&spec, 3.0).unwrap();
        assert_eq!(xs[0].1, xs[1].1);
        assert!(xs[0].1 > 0.0);
    }

    #[test]
    fn zero_target_returns_the_smallest_step() {
        let spec = small_spec();
        let xs = calibrate_step_sizes(&spec, 0.0).unwrap();
        let inst = build_instance(&spec).unwrap();
        let bound = stability_bound(&inst.graph).unwrap();
        for (_, xi) in xs {
            assert!((xi - bound * 1e-6).abs() < 1e-15 * bound);
        }
    }

    #[test]
    fn calibrated_step_grows_with_the_target() {
        let spec = small_spec();
        let mut prev = 0.0;
        for target in [1.0, 3.0, 6.0] {
            let xs = calibrate_step_sizes(&spec, target).unwrap();
            let xi = xs[1].1; // the lms entry
            assert!(xi >= prev, "target {target}: {xi} < {prev}");
            prev = xi;
        }
    }

    #[test]
    fn bench_produces_one_row_per_pair() {
        let solvers = vec![small_spec().solvers[1].clone()];
        let rows = bench_iteration_cost(&[24], 50, &solvers).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n_nodes, 24);
        assert!(rows[0].median_step_seconds > 0.0);
        assert!(bench_iteration_cost(&[], 50, &solvers).is_err());
        let csv = bench_to_csv(&rows);
        assert!(csv.starts_with("algorithm,n,median_step_seconds\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
