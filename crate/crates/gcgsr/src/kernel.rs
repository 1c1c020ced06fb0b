//! Generalized Gaussian kernel, correntropy loss, and the recovery cost with
//! its analytic gradient.
//!
//! The kernel is `G(e) = z·exp(−ρ|e|^α)` with shape `α`, width `β`,
//! `ρ = β^{−α}`, and normalization `z = α / (2βΓ(1/α))`. The loss on an
//! error vector is the kernel's peak value minus its sample average, so
//! driving errors to zero maximizes correntropy. The full cost couples that
//! loss with the Laplacian smoothness form:
//!
//! ```text
//! f(x) = ½ xᵀLx + (γ/2) · meanᵢ zᵢ (1 − exp(−ρᵢ|eᵢ|^α)),   eᵢ = yᵢ − Φᵢᵢ xᵢ
//! ```
//!
//! Widths may be shared ([`KernelParams`]) or per-node ([`PerNodeKernel`],
//! produced by the width learner); both run through the same arithmetic, so
//! a per-node kernel with equal widths reproduces the shared kernel exactly.
//!
//! Differentiating the cost gives
//!
//! ```text
//! ∇f(x) = Lx − (γα/2) · zᵢρᵢ · gᵢ(e),
//! gᵢ(e) = (1/N) exp(−ρᵢ|eᵢ|^α) |eᵢ|^{α−1} sign(eᵢ) · Φᵢᵢ
//! ```
//!
//! Minus sign on the data term: the correntropy term pulls the estimate
//! toward the observations. The finite-difference tests pin this down.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::graph::{GraphModel, SamplingMask};
use crate::special::gamma;

/// Shared GGD kernel parameters with the derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    beta: f64,
    rho: f64,
    z: f64,
}

impl KernelParams {
    /// Shape `alpha > 0` and width `beta > 0`; `rho` and `z` are derived.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
        }
        Ok(KernelParams {
            alpha,
            beta,
            rho: beta.powf(-alpha),
            z: alpha / (2.0 * beta * gamma(1.0 / alpha)),
        })
    }

    /// Same kernel, parameterized by `rho = β^{−α}` instead of `beta`.
    /// The given `rho` is kept exactly; `beta` and `z` are derived.
    pub fn from_rho(alpha: f64, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::invalid("rho", format!("must be > 0, got {rho}")));
        }
        let mut k = KernelParams::new(alpha, rho.powf(-1.0 / alpha))?;
        k.rho = rho;
        Ok(k)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// Per-node widths sharing one shape parameter. The learner emits one of
/// these every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PerNodeKernel {
    alpha: f64,
    beta: Array1<f64>,
    rho: Array1<f64>,
    z: Array1<f64>,
}

impl PerNodeKernel {
    pub fn new(alpha: f64, beta: Array1<f64>) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
        }
        if beta.is_empty() {
            return Err(Error::EmptyInput("per-node widths"));
        }
        for (i, &b) in beta.iter().enumerate() {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::invalid(
                    "beta",
                    format!("width at node {i} must be > 0, got {b}"),
                ));
            }
        }
        let rho = beta.mapv(|b| b.powf(-alpha));
        let z = beta.mapv(|b| alpha / (2.0 * b * gamma(1.0 / alpha)));
        Ok(PerNodeKernel {
            alpha,
            beta,
            rho,
            z,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &Array1<f64> {
        &self.beta
    }
}

/// Width lookup shared by the loss/cost/gradient implementations. One code
/// path serves both kernel flavors, which keeps them numerically identical
/// when the widths agree.
pub trait KernelWidths {
    fn alpha(&self) -> f64;
    fn rho_at(&self, i: usize) -> f64;
    fn z_at(&self, i: usize) -> f64;
    /// Expected error-vector length, when the kernel is inherently sized.
    fn node_count(&self) -> Option<usize>;
}

impl KernelWidths for KernelParams {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn rho_at(&self, _i: usize) -> f64 {
        self.rho
    }
    fn z_at(&self, _i: usize) -> f64 {
        self.z
    }
    fn node_count(&self) -> Option<usize> {
        None
    }
}

impl KernelWidths for PerNodeKernel {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn rho_at(&self, i: usize) -> f64 {
        self.rho[i]
    }
    fn z_at(&self, i: usize) -> f64 {
        self.z[i]
    }
    fn node_count(&self) -> Option<usize> {
        Some(self.beta.len())
    }
}

fn check_kernel_len(k: &impl KernelWidths, n: usize) -> Result<()> {
    match k.node_count() {
        Some(expected) if expected != n => Err(Error::DimensionMismatch {
            expected,
            actual: n,
        }),
        _ => Ok(()),
    }
}

/// Kernel value `z·exp(−ρ|e|^α)`, in `(0, z]` for finite `e`.
pub fn ggd_kernel(k: &KernelParams, e: f64) -> f64 {
    k.z * (-k.rho * e.abs().powf(k.alpha)).exp()
}

/// Correntropy loss of an error vector: mean over nodes of
/// `zᵢ·(1 − exp(−ρᵢ|eᵢ|^α))`. Zero exactly at `e = 0`, saturating toward
/// the kernel peak as errors grow.
pub fn tgc_loss(k: &impl KernelWidths, e: &Array1<f64>) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptyInput("error vector"));
    }
    check_kernel_len(k, e.len())?;
    let alpha = k.alpha();
    let mut acc = 0.0;
    for (i, &ei) in e.iter().enumerate() {
        acc += k.z_at(i) * (1.0 - (-k.rho_at(i) * ei.abs().powf(alpha)).exp());
    }
    Ok(acc / e.len() as f64)
}

/// Error vector `eᵢ = yᵢ − Φᵢᵢ xᵢ`.
pub fn error_vector(mask: &SamplingMask, y: &Array1<f64>, x: &Array1<f64>) -> Array1<f64> {
    Array1::from_iter(
        y.iter()
            .zip(x.iter())
            .enumerate()
            .map(|(i, (&yi, &xi))| yi - mask.factor(i) * xi),
    )
}

/// Recovery cost `½xᵀLx + (γ/2)·loss(e)` with `eᵢ = yᵢ − Φᵢᵢxᵢ`.
pub fn cost(
    g: &GraphModel,
    k: &impl KernelWidths,
    gamma_reg: f64,
    mask: &SamplingMask,
    y: &Array1<f64>,
    x: &Array1<f64>,
) -> Result<f64> {
    let n = g.n_nodes();
    if y.len() != n || mask.n_nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: if y.len() != n { y.len() } else { mask.n_nodes() },
        });
    }
    let e = error_vector(mask, y, x);
    Ok(0.5 * g.smoothness(x)? + 0.5 * gamma_reg * tgc_loss(k, &e)?)
}

/// Kernel-weighted error direction `g(e)`:
/// `(1/N)·exp(−ρᵢ|eᵢ|^α)·|eᵢ|^{α−1}·sign(eᵢ)` at sampled nodes, zero at
/// unsampled nodes and at `eᵢ = 0` (the odd extension through the origin).
///
/// This sits in the solver's innermost loop; the Gaussian shape skips the
/// generic powf calls.
pub fn influence(k: &impl KernelWidths, mask: &SamplingMask, e: &Array1<f64>) -> Array1<f64> {
    let n = e.len();
    let alpha = k.alpha();
    let inv_n = 1.0 / n as f64;
    let gaussian_shape = alpha == 2.0;
    Array1::from_iter(e.iter().enumerate().map(|(i, &ei)| {
        if ei == 0.0 || !mask.is_sampled(i) {
            0.0
        } else {
            let magnitude = ei.abs();
            let sign = if ei > 0.0 { 1.0 } else { -1.0 };
            let (powered, shifted) = if gaussian_shape {
                (magnitude * magnitude, magnitude)
            } else {
                (magnitude.powf(alpha), magnitude.powf(alpha - 1.0))
            };
            inv_n * (-k.rho_at(i) * powered).exp() * shifted * sign
        }
    }))
}

/// Analytic gradient of [`cost`]:
/// `∇f = Lx − (γα/2)·zᵢρᵢ·gᵢ(e)` with `g` from [`influence`].
pub fn gradient(
    g: &GraphModel,
    k: &impl KernelWidths,
    gamma_reg: f64,
    mask: &SamplingMask,
    y: &Array1<f64>,
    x: &Array1<f64>,
) -> Result<Array1<f64>> {
    let n = g.n_nodes();
    if x.len() != n || y.len() != n || mask.n_nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.len().min(y.len()).min(mask.n_nodes()),
        });
    }
    check_kernel_len(k, n)?;
    let e = error_vector(mask, y, x);
    let g_e = influence(k, mask, &e);
    let mut grad = g.laplacian().dot(x);
    let half_gamma_alpha = 0.5 * gamma_reg * k.alpha();
    for i in 0..n {
        grad[i] -= half_gamma_alpha * k.z_at(i) * k.rho_at(i) * g_e[i];
    }
    Ok(grad)
}

/// Error magnitude below which the loss term stays convex: for `α > 1`
/// this is `((α−1)/(ρα))^{1/α}`; for `α ≤ 1` the term is concave away from
/// the origin and no such radius exists.
pub fn convexity_threshold(k: &KernelParams) -> Option<f64> {
    if k.alpha > 1.0 {
        Some(((k.alpha - 1.0) / (k.rho * k.alpha)).powf(1.0 / k.alpha))
    } else {
        None
    }
}

/// Sign of a scalar second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureSign {
    Negative,
    Zero,
    Positive,
}

/// Sign of the loss term's second derivative with respect to a single
/// error component, from the closed form
/// `ρzα·(α−1−ρα|e|^α)·|e|^{α−2}·exp(−ρ|e|^α)`.
///
/// The prefactor is strictly positive for `e ≠ 0`, so the factor
/// `T(e) = α−1−ρα|e|^α` alone decides. The origin is rejected: the form is
/// singular there for `α < 2`.
pub fn hessian_sign_check(k: &KernelParams, e: f64) -> Result<CurvatureSign> {
    if e == 0.0 {
        return Err(Error::invalid("e", "curvature is singular at e = 0"));
    }
    let t = k.alpha - 1.0 - k.rho * k.alpha * e.abs().powf(k.alpha);
    Ok(if t > 0.0 {
        CurvatureSign::Positive
    } else if t < 0.0 {
        CurvatureSign::Negative
    } else {
        CurvatureSign::Zero
    })
}
