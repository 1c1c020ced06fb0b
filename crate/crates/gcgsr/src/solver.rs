//! Iterative recovery solvers: the generalized-correntropy recursion plus
//! LMS and LMP baselines, and the step-size bounds that govern them.
//!
//! All three solvers share the smoothing term and differ only in how the
//! masked error enters the data term:
//!
//! ```text
//! gc-gsr:  x[n+1] = x[n] − ξLx[n] + ξ(γα/2)·zᵢρᵢ·gᵢ(e[n])
//! lms:     x[n+1] = x[n] − ξLx[n] + ξγ·Φe[n]
//! lmp:     x[n+1] = x[n] − ξLx[n] + ξγ·Φ(|e[n]|^{p−1}∘sign e[n])
//! ```
//!
//! so a comparison between them isolates the influence function. The
//! correntropy weight `exp(−ρ|e|^α)` is what caps the damage an impulsive
//! error can do: past the kernel width the update *shrinks* as the error
//! grows, while LMS scales linearly with it.
//!
//! Step sizes: descent of the smoothness term is uniformly stable for
//! `ξ < 2/λ_max` and the mean recursion contracts for `ξ < 1/λ_max`
//! ([`stability_bound`], [`mean_bound`]).

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphModel, SamplingMask};
use crate::kernel::{error_vector, gradient, KernelParams};
use crate::metrics::nmsd;
use crate::synth::choose_mask;
use crate::width::{init_learner, update_widths, WidthLearnerState};

/// Iterates whose magnitude passes this are reported as divergence; with an
/// unstable step size the growth is geometric, so the cap is reached within
/// a couple hundred iterations while still leaving headroom below overflow.
pub const DIVERGENCE_LIMIT: f64 = 1e150;

/// Power-iteration defaults used by the bound helpers.
pub const SPECTRAL_TOL: f64 = 1e-9;
pub const SPECTRAL_MAX_ITER: usize = 100_000;

/// Which recursion to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Algorithm {
    GcGsr,
    Lms,
    /// Least mean p-th power; `p` in (1, 2].
    Lmp { p: f64 },
}

/// Kernel width handling for the correntropy solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum KernelMode {
    /// One fixed width for all nodes.
    Fixed { alpha: f64, beta: f64 },
    /// Per-node widths learned each iteration from the error vector.
    /// `d0`/`a0` are the prior hyperparameters; note that the classic
    /// defaults of 1e-6 drive every width to the same huge floor value
    /// (see the width module), so benchmarks usually set `a0` near 1.
    Learned { alpha: f64, d0: f64, a0: f64 },
}

impl KernelMode {
    pub fn alpha(&self) -> f64 {
        match *self {
            KernelMode::Fixed { alpha, .. } | KernelMode::Learned { alpha, .. } => alpha,
        }
    }
}

/// Full solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Step size ξ.
    pub step_size: f64,
    /// Data-term weight γ.
    pub gamma: f64,
    /// Kernel setup; only the gc-gsr algorithm reads it.
    pub kernel: KernelMode,
    pub max_iters: usize,
    /// Stop when ‖x[n+1] − x[n]‖_∞ drops below this; 0 disables the check.
    #[serde(default)]
    pub stop_tol: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::invalid(
                "step_size",
                format!("must be > 0, got {}", self.step_size),
            ));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be >= 0, got {}", self.gamma),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        if self.stop_tol.is_nan() || self.stop_tol < 0.0 {
            return Err(Error::invalid(
                "stop_tol",
                format!("must be >= 0, got {}", self.stop_tol),
            ));
        }
        if let Algorithm::Lmp { p } = self.algorithm {
            if !(p > 1.0 && p <= 2.0) {
                return Err(Error::invalid(
                    "lmp_p",
                    format!("must be in (1, 2], got {p}"),
                ));
            }
        }
        match self.kernel {
            KernelMode::Fixed { alpha, beta } => {
                KernelParams::new(alpha, beta)?;
            }
            KernelMode::Learned { alpha, d0, a0 } => {
                init_learner(1, alpha, d0, a0)?;
            }
        }
        Ok(())
    }
}

/// Mutable core of a solve: current estimate, its error, the iteration
/// counter, and the width-learner state when widths are learned.
#[derive(Debug, Clone)]
pub struct RecoveryState {
    x: Array1<f64>,
    e: Array1<f64>,
    iter: usize,
    widths: Option<WidthLearnerState>,
}

impl RecoveryState {
    /// Start state: `x = 0`, so the initial error is the observation
    /// itself. Width learning starts from unit widths.
    pub fn initial(
        cfg: &SolverConfig,
        mask: &SamplingMask,
        y: &Array1<f64>,
    ) -> Result<RecoveryState> {
        RecoveryState::with_initial_x(cfg, mask, y, Array1::zeros(y.len()))
    }

    /// Start from a caller-supplied estimate.
    pub fn with_initial_x(
        cfg: &SolverConfig,
        mask: &SamplingMask,
        y: &Array1<f64>,
        x0: Array1<f64>,
    ) -> Result<RecoveryState> {
        if x0.len() != y.len() || mask.n_nodes() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                actual: x0.len().min(mask.n_nodes()),
            });
        }
        let widths = match (cfg.algorithm, cfg.kernel) {
            (Algorithm::GcGsr, KernelMode::Learned { alpha, d0, a0 }) => {
                Some(init_learner(y.len(), alpha, d0, a0)?)
            }
            _ => None,
        };
        let e = error_vector(mask, y, &x0);
        Ok(RecoveryState {
            x: x0,
            e,
            iter: 1,
            widths,
        })
    }

    pub fn x(&self) -> &Array1<f64> {
        &self.x
    }

    /// Error at the current estimate, `eᵢ = yᵢ − Φᵢᵢxᵢ`.
    pub fn e(&self) -> &Array1<f64> {
        &self.e
    }

    pub fn iter(&self) -> usize {
        self.iter
    }

    pub fn widths(&self) -> Option<&WidthLearnerState> {
        self.widths.as_ref()
    }
}

fn check_dims(g: &GraphModel, mask: &SamplingMask, y: &Array1<f64>, s: &RecoveryState) -> Result<()> {
    let n = g.n_nodes();
    if y.len() != n || mask.n_nodes() != n || s.x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len().min(mask.n_nodes()).min(s.x.len()),
        });
    }
    Ok(())
}

fn finish_step(
    mask: &SamplingMask,
    y: &Array1<f64>,
    x_next: Array1<f64>,
    s: &RecoveryState,
    widths: Option<WidthLearnerState>,
) -> Result<RecoveryState> {
    for &v in x_next.iter() {
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { iteration: s.iter });
        }
    }
    let e = error_vector(mask, y, &x_next);
    Ok(RecoveryState {
        x: x_next,
        e,
        iter: s.iter + 1,
        widths,
    })
}

/// One correntropy-descent step. In learned-width mode the widths are
/// refreshed from the incoming error first (skipped on the very first
/// iteration, which runs on the initial unit widths), then the masked,
/// kernel-weighted error direction moves the estimate.
pub fn gc_gsr_step(
    g: &GraphModel,
    cfg: &SolverConfig,
    mask: &SamplingMask,
    y: &Array1<f64>,
    s: &RecoveryState,
) -> Result<RecoveryState> {
    check_dims(g, mask, y, s)?;
    let (grad, widths) = match cfg.kernel {
        KernelMode::Fixed { alpha, beta } => {
            let k = KernelParams::new(alpha, beta)?;
            (gradient(g, &k, cfg.gamma, mask, y, &s.x)?, None)
        }
        KernelMode::Learned { alpha, d0, a0 } => {
            let widths = match &s.widths {
                Some(w) if s.iter >= 2 => update_widths(w, &s.e)?,
                Some(w) => w.clone(),
                None => init_learner(g.n_nodes(), alpha, d0, a0)?,
            };
            let k = widths.kernel()?;
            (gradient(g, &k, cfg.gamma, mask, y, &s.x)?, Some(widths))
        }
    };
    let x_next = &s.x - &(grad * cfg.step_size);
    finish_step(mask, y, x_next, s, widths)
}

/// One least-mean-squares step: identity influence on the masked error.
pub fn lms_step(
    g: &GraphModel,
    cfg: &SolverConfig,
    mask: &SamplingMask,
    y: &Array1<f64>,
    s: &RecoveryState,
) -> Result<RecoveryState> {
    check_dims(g, mask, y, s)?;
    let e = error_vector(mask, y, &s.x);
    let lx = g.laplacian().dot(&s.x);
    let xi = cfg.step_size;
    let x_next = Array1::from_iter((0..s.x.len()).map(|i| {
        s.x[i] - xi * lx[i] + xi * cfg.gamma * mask.factor(i) * e[i]
    }));
    finish_step(mask, y, x_next, s, None)
}

/// One least-mean-p-th-power step: signed (p−1)-power influence, zero at
/// zero error.
pub fn lmp_step(
    g: &GraphModel,
    cfg: &SolverConfig,
    mask: &SamplingMask,
    y: &Array1<f64>,
    s: &RecoveryState,
) -> Result<RecoveryState> {
    check_dims(g, mask, y, s)?;
    let p = match cfg.algorithm {
        Algorithm::Lmp { p } => p,
        _ => {
            return Err(Error::invalid(
                "algorithm",
                "lmp_step requires an lmp configuration",
            ))
        }
    };
    let e = error_vector(mask, y, &s.x);
    let lx = g.laplacian().dot(&s.x);
    let xi = cfg.step_size;
    let x_next = Array1::from_iter((0..s.x.len()).map(|i| {
        let ei = e[i];
        let powered = if ei == 0.0 {
            0.0
        } else {
            let sign = if ei > 0.0 { 1.0 } else { -1.0 };
            ei.abs().powf(p - 1.0) * sign
        };
        s.x[i] - xi * lx[i] + xi * cfg.gamma * mask.factor(i) * powered
    }));
    finish_step(mask, y, x_next, s, None)
}

/// Dispatches one step of the configured algorithm.
pub fn step(
    g: &GraphModel,
    cfg: &SolverConfig,
    mask: &SamplingMask,
    y: &Array1<f64>,
    s: &RecoveryState,
) -> Result<RecoveryState> {
    match cfg.algorithm {
        Algorithm::GcGsr => gc_gsr_step(g, cfg, mask, y, s),
        Algorithm::Lms => lms_step(g, cfg, mask, y, s),
        Algorithm::Lmp { .. } => lmp_step(g, cfg, mask, y, s),
    }
}

/// Extra knobs for [`run_with`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Start estimate; zero when absent.
    pub initial_x: Option<Array1<f64>>,
    /// Redraw an equal-size sampling mask every iteration from this seed
    /// instead of keeping the given mask fixed for the whole run.
    pub resample_mask_seed: Option<u64>,
}

/// Runs the configured solver to `max_iters` (or the `stop_tol` criterion)
/// and records the NMSD trace when ground truth is supplied.
pub fn run(
    g: &GraphModel,
    cfg: &SolverConfig,
    mask: &SamplingMask,
    y: &Array1<f64>,
    x_true: Option<&Array1<f64>>,
) -> Result<(RecoveryState, Vec<f64>)> {
    run_with(g, cfg, mask, y, x_true, RunOptions::default())
}

/// [`run`] with explicit start estimate or per-iteration mask resampling.
pub fn run_with(
    g: &GraphModel,
    cfg: &SolverConfig,
    mask: &SamplingMask,
    y: &Array1<f64>,
    x_true: Option<&Array1<f64>>,
    opts: RunOptions,
) -> Result<(RecoveryState, Vec<f64>)> {
    cfg.validate()?;
    if let Ok(bound) = stability_bound(g) {
        if cfg.step_size >= bound {
            eprintln!(
                "warning: step size {} is at or above the uniform stability bound {bound}",
                cfg.step_size
            );
        }
    }
    let mut state = match opts.initial_x {
        Some(x0) => RecoveryState::with_initial_x(cfg, mask, y, x0)?,
        None => RecoveryState::initial(cfg, mask, y)?,
    };
    let mut trace = Vec::new();
    let mut resampled;
    for _ in 0..cfg.max_iters {
        let current_mask = match opts.resample_mask_seed {
            Some(seed) => {
                resampled = choose_mask(
                    mask.n_nodes(),
                    mask.m(),
                    seed.wrapping_add(state.iter as u64),
                )?;
                &resampled
            }
            None => mask,
        };
        let prev_x = state.x.clone();
        state = step(g, cfg, current_mask, y, &state)?;
        if let Some(truth) = x_true {
            trace.push(nmsd(truth, &state.x)?);
        }
        let delta = state
            .x
            .iter()
            .zip(prev_x.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if cfg.stop_tol > 0.0 && delta < cfg.stop_tol {
            break;
        }
    }
    Ok((state, trace))
}

/// Uniform-stability step-size bound `2/λ_max`.
pub fn stability_bound(g: &GraphModel) -> Result<f64> {
    Ok(2.0 / g.spectral_radius(SPECTRAL_TOL, SPECTRAL_MAX_ITER)?)
}

/// Mean-convergence step-size bound `1/λ_max`, half of [`stability_bound`].
pub fn mean_bound(g: &GraphModel) -> Result<f64> {
    Ok(1.0 / g.spectral_radius(SPECTRAL_TOL, SPECTRAL_MAX_ITER)?)
}
