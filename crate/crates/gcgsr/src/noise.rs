//! Impulsive noise families: generalized Gaussian and symmetric alpha-stable.
//!
//! Both samplers take an explicit seed and produce bit-identical streams for
//! identical seeds, which is what makes whole experiments reproducible.

use ndarray::Array1;
use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, Gamma};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generalized Gaussian noise `GGD(ν, η)` with density
/// `(ν/(2ηΓ(1/ν)))·exp(−|v/η|^ν)`. `ν = 2` is Gaussian (variance `η²/2`),
/// `ν = 1` is Laplace; `ν < 2` has heavier-than-Gaussian tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgdNoise {
    pub nu: f64,
    pub eta: f64,
}

impl GgdNoise {
    pub fn new(nu: f64, eta: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::invalid("nu", format!("must be > 0, got {nu}")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid("eta", format!("must be > 0, got {eta}")));
        }
        Ok(GgdNoise { nu, eta })
    }

    /// Absolute moment `E|v|^r = η^r·Γ((r+1)/ν)/Γ(1/ν)`.
    pub fn abs_moment(&self, r: f64) -> f64 {
        self.eta.powf(r) * crate::special::gamma((r + 1.0) / self.nu)
            / crate::special::gamma(1.0 / self.nu)
    }
}

/// Symmetric alpha-stable noise with characteristic function
/// `φ(t) = exp(jμt − τ|t|^p)`; `p = 2` is Gaussian with variance `2τ`,
/// `p = 1` is Cauchy with scale `τ`. Smaller `p` means more impulsive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaStableNoise {
    pub p: f64,
    pub mu: f64,
    pub tau: f64,
}

impl AlphaStableNoise {
    pub fn new(p: f64, mu: f64, tau: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0 && p <= 2.0) {
            return Err(Error::invalid("p", format!("must be in (0, 2], got {p}")));
        }
        if !mu.is_finite() {
            return Err(Error::invalid("mu", format!("must be finite, got {mu}")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
        }
        Ok(AlphaStableNoise { p, mu, tau })
    }

    /// Scale of the standard-parameterization stable draw: `σ = τ^{1/p}`,
    /// so the empirical characteristic function matches `exp(−τ|t|^p)`.
    pub fn sigma(&self) -> f64 {
        self.tau.powf(1.0 / self.p)
    }
}

/// Draws one uniform in the open interval (0, 1).
fn open_unit(rng: &mut Pcg64) -> f64 {
    let eps = 1e-12;
    rng.random_range(0.0..1.0_f64).clamp(eps, 1.0 - eps)
}

/// `n` i.i.d. GGD draws: magnitude `η·G^{1/ν}` with `G ~ Gamma(1/ν, 1)`,
/// sign fair and independent.
pub fn sample_ggd(m: &GgdNoise, n: usize, rng_seed: u64) -> Array1<f64> {
    let mut rng = Pcg64::seed_from_u64(rng_seed);
    let gamma_dist = Gamma::new(1.0 / m.nu, 1.0).expect("validated shape");
    Array1::from_iter((0..n).map(|_| {
        let g: f64 = gamma_dist.sample(&mut rng);
        let magnitude = m.eta * g.powf(1.0 / m.nu);
        if rng.random_range(0.0..1.0) < 0.5 {
            -magnitude
        } else {
            magnitude
        }
    }))
}

/// `n` i.i.d. symmetric alpha-stable draws via the Chambers–Mallows–Stuck
/// transform, shifted by `μ` and scaled by `τ^{1/p}`.
pub fn sample_alpha_stable(m: &AlphaStableNoise, n: usize, rng_seed: u64) -> Array1<f64> {
    let mut rng = Pcg64::seed_from_u64(rng_seed);
    let p = m.p;
    let sigma = m.sigma();
    Array1::from_iter((0..n).map(|_| {
        let v = std::f64::consts::PI * (open_unit(&mut rng) - 0.5);
        let w = -open_unit(&mut rng).ln();
        let standard = if p == 1.0 {
            v.tan()
        } else {
            // Symmetric CMS: sin(pV)/cos(V)^{1/p} · (cos((1−p)V)/W)^{(1−p)/p}
            let s = (p * v).sin() / v.cos().powf(1.0 / p);
            let tail = (((1.0 - p) * v).cos() / w).powf((1.0 - p) / p);
            s * tail
        };
        m.mu + sigma * standard
    }))
}

/// Rescales `noise` so that `10·log10(‖signal‖²/‖scaled‖²)` equals the
/// target SNR in dB. The scaling is defined on the full vectors, before any
/// sampling mask is applied.
pub fn scale_to_snr(
    signal: &Array1<f64>,
    noise: &Array1<f64>,
    target_snr_db: f64,
) -> Result<Array1<f64>> {
    let noise_energy = noise.dot(noise);
    if noise_energy == 0.0 {
        return Err(Error::invalid("noise", "all-zero noise cannot be scaled"));
    }
    let signal_energy = signal.dot(signal);
    let target_ratio = 10.0_f64.powf(target_snr_db / 10.0);
    let c = (signal_energy / (target_ratio * noise_energy)).sqrt();
    Ok(noise * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &Array1<f64>) -> f64 {
        v.sum() / v.len() as f64
    }

    fn quantile(sorted: &[f64], q: f64) -> f64 {
        let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
        sorted[idx]
    }

    #[test]
    fn fixed_seed_reproduces_streams() {
        let g = GgdNoise::new(1.3, 0.1).unwrap();
        let a = sample_ggd(&g, 64, 99);
        let b = sample_ggd(&g, 64, 99);
        assert_eq!(a, b);
        let s = AlphaStableNoise::new(1.3, 0.0, 0.005).unwrap();
        let a = sample_alpha_stable(&s, 64, 99);
        let b = sample_alpha_stable(&s, 64, 99);
        assert_eq!(a, b);
        let c = sample_alpha_stable(&s, 64, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn ggd_nu_two_is_standard_normal_at_eta_sqrt2() {
        // Variance of GGD(2, η) is η²·Γ(3/2)/Γ(1/2) = η²/2.
        let g = GgdNoise::new(2.0, 2.0_f64.sqrt()).unwrap();
        let v = sample_ggd(&g, 100_000, 7);
        let var = v.dot(&v) / v.len() as f64;
        assert!((var - 1.0).abs() < 0.02, "sample variance {var}");
    }

    #[test]
    fn ggd_nu_one_is_laplace() {
        // E|v| = η·Γ(2)/Γ(1) = η.
        let g = GgdNoise::new(1.0, 0.7).unwrap();
        let v = sample_ggd(&g, 100_000, 11);
        let mean_abs = v.mapv(f64::abs).sum() / v.len() as f64;
        assert!((mean_abs - 0.7).abs() / 0.7 < 0.02, "mean abs {mean_abs}");
    }

    #[test]
    fn ggd_is_sign_symmetric() {
        let g = GgdNoise::new(1.3, 1.0).unwrap();
        let v = sample_ggd(&g, 100_000, 13);
        // Standard error of the mean is σ/√n with σ² = E v².
        let sd = (v.dot(&v) / v.len() as f64).sqrt();
        let se = sd / (v.len() as f64).sqrt();
        assert!(mean(&v).abs() < 4.0 * se);
    }

    #[test]
    fn ggd_moments_match_closed_form() {
        for nu in [1.0, 1.3, 2.0] {
            let g = GgdNoise::new(nu, 0.4).unwrap();
            let v = sample_ggd(&g, 100_000, 1000 + (nu * 10.0) as u64);
            for r in [1.0, 2.0] {
                let empirical = v.mapv(|x| x.abs().powf(r)).sum() / v.len() as f64;
                let oracle = g.abs_moment(r);
                let rel = (empirical - oracle).abs() / oracle;
                assert!(rel < 0.03, "nu={nu} r={r}: rel {rel}");
            }
        }
    }

    #[test]
    fn stable_p_two_is_gaussian_with_variance_two_tau() {
        let tau = 0.3;
        let s = AlphaStableNoise::new(2.0, 0.0, tau).unwrap();
        let v = sample_alpha_stable(&s, 100_000, 21);
        let var = v.dot(&v) / v.len() as f64;
        assert!((var - 2.0 * tau).abs() / (2.0 * tau) < 0.03, "variance {var}");
    }

    #[test]
    fn stable_p_one_is_cauchy_with_scale_tau() {
        let tau = 0.5;
        let s = AlphaStableNoise::new(1.0, 0.0, tau).unwrap();
        let v = sample_alpha_stable(&s, 100_000, 23);
        let mut sorted: Vec<f64> = v.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = quantile(&sorted, 0.5);
        let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
        assert!(median.abs() < 0.02, "median {median}");
        // Cauchy quartiles sit at ±τ, so IQR = 2τ.
        assert!((iqr - 2.0 * tau).abs() / (2.0 * tau) < 0.03, "iqr {iqr}");
    }

    #[test]
    fn stable_ecf_matches_characteristic_function() {
        // Empirical cos-average vs exp(−τ|t|^p) at a few frequencies.
        let s = AlphaStableNoise::new(1.3, 0.0, 0.005).unwrap();
        let v = sample_alpha_stable(&s, 100_000, 31);
        for t in [0.5, 1.0, 2.0] {
            let ecf = v.mapv(|x| (t * x).cos()).sum() / v.len() as f64;
            let cf = (-s.tau * t.abs().powf(s.p)).exp();
            assert!((ecf - cf).abs() < 0.02, "t={t}: ecf {ecf} vs cf {cf}");
        }
    }

    #[test]
    fn stable_tail_is_heavier_than_gaussian() {
        let tau = 0.005;
        let heavy = AlphaStableNoise::new(1.3, 0.0, tau).unwrap();
        let gauss = AlphaStableNoise::new(2.0, 0.0, tau).unwrap();
        let vh = sample_alpha_stable(&heavy, 100_000, 41).mapv(f64::abs);
        let vg = sample_alpha_stable(&gauss, 100_000, 43).mapv(f64::abs);
        let mut vh: Vec<f64> = vh.to_vec();
        let mut vg: Vec<f64> = vg.to_vec();
        vh.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vg.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let qh = quantile(&vh, 0.999);
        let qg = quantile(&vg, 0.999);
        assert!(qh >= 3.0 * qg, "99.9th percentile {qh} vs Gaussian {qg}");
    }

    #[test]
    fn snr_scaling_hits_the_target() {
        let signal = Array1::from_vec(vec![1.0, 2.0, -1.0, 0.5]);
        let noise = Array1::from_vec(vec![0.3, -0.7, 0.1, 0.9]);

        let at0 = scale_to_snr(&signal, &noise, 0.0).unwrap();
        assert!((at0.dot(&at0) - signal.dot(&signal)).abs() < 1e-12);

        let at10 = scale_to_snr(&signal, &noise, 10.0).unwrap();
        assert!((at10.dot(&at10) - signal.dot(&signal) / 10.0).abs() < 1e-12);

        // Rescaling an already-scaled vector to the same target is a no-op.
        let again = scale_to_snr(&signal, &at10, 10.0).unwrap();
        for i in 0..4 {
            assert!((again[i] - at10[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn snr_scaling_rejects_zero_noise() {
        let signal = Array1::from_vec(vec![1.0, 2.0]);
        let zero = Array1::zeros(2);
        assert!(scale_to_snr(&signal, &zero, 10.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(GgdNoise::new(0.0, 1.0).is_err());
        assert!(GgdNoise::new(1.0, 0.0).is_err());
        assert!(AlphaStableNoise::new(2.5, 0.0, 1.0).is_err());
        assert!(AlphaStableNoise::new(0.0, 0.0, 1.0).is_err());
        assert!(AlphaStableNoise::new(1.3, f64::NAN, 1.0).is_err());
        assert!(AlphaStableNoise::new(1.3, 0.0, 0.0).is_err());
    }
}
