//! Per-node kernel-width learning.
//!
//! The inverse width `θᵢ = 1/βᵢ` gets a generalized Gamma prior whose power
//! parameter is tied to the kernel shape `α`; the MAP point estimate then
//! has a closed form, and one EM pass per solver iteration updates it from
//! the current error vector:
//!
//! ```text
//! d    ← d₀ + 1
//! aᵢ   ← (|eᵢ|^α + a₀^{−α})^{−1/α}
//! θᵢ   ← aᵢ · Γ((d+1)/α) / Γ(d/α)
//! βᵢ   ← 1/θᵢ
//! ```
//!
//! Large errors therefore widen the kernel at their node, which in turn
//! shrinks that node's data-term weight `ρᵢzᵢ` — gross outliers end up
//! nearly ignored. `a₀` caps the width from below at `1/(a₀·Γ-ratio)`:
//! error-free nodes settle there. With the tiny default `a₀ = 1e-6` the
//! floor is enormous (`a₀^{−α}` dominates every realistic error), so
//! benchmark configurations typically override it; see the solver
//! configuration.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::kernel::PerNodeKernel;
use crate::special::gamma;

/// Default prior hyperparameters.
pub const DEFAULT_D0: f64 = 1e-6;
pub const DEFAULT_A0: f64 = 1e-6;

/// Width-learner state: prior hyperparameters plus the current per-node MAP
/// estimates. Values; updates return new states.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthLearnerState {
    alpha: f64,
    d0: f64,
    a0: f64,
    d: f64,
    a: Array1<f64>,
    theta: Array1<f64>,
    beta: Array1<f64>,
}

/// Fresh learner for `n_nodes` nodes. Widths start at `βᵢ = 1` pending the
/// first update; `d0`/`a0` default to 1e-6 via [`WidthLearnerState::default_for`].
pub fn init_learner(n_nodes: usize, alpha: f64, d0: f64, a0: f64) -> Result<WidthLearnerState> {
    if n_nodes == 0 {
        return Err(Error::EmptyInput("width learner needs at least one node"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
    }
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(Error::invalid("d0", format!("must be > 0, got {d0}")));
    }
    if !(a0.is_finite() && a0 > 0.0) {
        return Err(Error::invalid("a0", format!("must be > 0, got {a0}")));
    }
    // a0^{−α} is used verbatim in every update; if it overflows, that is a
    // configuration problem and is reported here, not mid-run.
    if !a0.powf(-alpha).is_finite() {
        return Err(Error::invalid(
            "a0",
            format!("a0^(-alpha) overflows for a0={a0}, alpha={alpha}"),
        ));
    }
    Ok(WidthLearnerState {
        alpha,
        d0,
        a0,
        d: d0,
        a: Array1::from_elem(n_nodes, a0),
        theta: Array1::ones(n_nodes),
        beta: Array1::ones(n_nodes),
    })
}

impl WidthLearnerState {
    /// Learner with the standard hyperparameter defaults.
    pub fn default_for(n_nodes: usize, alpha: f64) -> Result<Self> {
        init_learner(n_nodes, alpha, DEFAULT_D0, DEFAULT_A0)
    }

    pub fn n_nodes(&self) -> usize {
        self.beta.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Current `d` hyperparameter (`d0` until the first update, `d0 + 1`
    /// afterwards).
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn a(&self) -> &Array1<f64> {
        &self.a
    }

    /// Inverse widths `θᵢ`.
    pub fn theta(&self) -> &Array1<f64> {
        &self.theta
    }

    /// Kernel widths `βᵢ`.
    pub fn beta(&self) -> &Array1<f64> {
        &self.beta
    }

    /// Kernel view of the current widths.
    pub fn kernel(&self) -> Result<PerNodeKernel> {
        PerNodeKernel::new(self.alpha, self.beta.clone())
    }
}

/// One EM pass over the error vector; see the module docs for the update
/// equations. Element-wise, so permuting `e` permutes the outputs.
pub fn update_widths(s: &WidthLearnerState, e: &Array1<f64>) -> Result<WidthLearnerState> {
    if e.len() != s.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: s.n_nodes(),
            actual: e.len(),
        });
    }
    let alpha = s.alpha;
    let d = s.d0 + 1.0;
    let gamma_ratio = gamma((d + 1.0) / alpha) / gamma(d / alpha);
    let a0_pow = s.a0.powf(-alpha);

    let a = e.mapv(|ei| (ei.abs().powf(alpha) + a0_pow).powf(-1.0 / alpha));
    let theta = a.mapv(|ai| ai * gamma_ratio);
    let beta = theta.mapv(|t| 1.0 / t);

    for (i, (&t, &b)) in theta.iter().zip(beta.iter()).enumerate() {
        if !(t.is_finite() && t > 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::invalid(
                "e",
                format!("width update produced a non-positive value at node {i}"),
            ));
        }
    }

    Ok(WidthLearnerState {
        alpha,
        d0: s.d0,
        a0: s.a0,
        d,
        a,
        theta,
        beta,
    })
}
