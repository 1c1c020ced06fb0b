//! Recovery-quality metrics and trace containers.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Floor substituted for −∞ dB when the deviation is exactly zero.
pub const NMSD_DB_FLOOR: f64 = -300.0;

/// Normalized mean-square deviation in dB:
/// `10·log10(‖x_true − x_est‖² / ‖x_true‖²)`, floored at
/// [`NMSD_DB_FLOOR`] for exact recovery.
pub fn nmsd(x_true: &Array1<f64>, x_est: &Array1<f64>) -> Result<f64> {
    if x_true.len() != x_est.len() {
        return Err(Error::DimensionMismatch {
            expected: x_true.len(),
            actual: x_est.len(),
        });
    }
    let denom = x_true.dot(x_true);
    if denom == 0.0 {
        return Err(Error::invalid("x_true", "ground truth is all-zero"));
    }
    let diff = x_true - x_est;
    let ratio = diff.dot(&diff) / denom;
    Ok((10.0 * ratio.log10()).max(NMSD_DB_FLOOR))
}

/// How per-run NMSD curves are combined into a mean curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceAveraging {
    /// Average the linear deviation ratios across runs, then convert the
    /// mean to dB. This is how mean curves are conventionally plotted.
    LinearRatio,
    /// Average the dB values directly (sensitivity-check mode).
    DbDomain,
}

impl Default for TraceAveraging {
    fn default() -> Self {
        TraceAveraging::LinearRatio
    }
}

/// Per-iteration NMSD (dB) for every run of one solver, plus the aggregate
/// mean curve.
#[derive(Debug, Clone)]
pub struct NmsdTrace {
    pub solver: String,
    /// One inner vector per Monte-Carlo run, one value per iteration.
    pub runs: Vec<Vec<f64>>,
    /// Aggregate curve; length equals the longest run.
    pub mean_db: Vec<f64>,
}

impl NmsdTrace {
    /// Aggregates per-run curves. Runs that stopped early are carried
    /// forward at their final value so the mean stays defined.
    pub fn aggregate(solver: impl Into<String>, runs: Vec<Vec<f64>>, mode: TraceAveraging) -> Self {
        let longest = runs.iter().map(Vec::len).max().unwrap_or(0);
        let mut mean_db = Vec::with_capacity(longest);
        for i in 0..longest {
            let mut acc = 0.0;
            for run in &runs {
                let db = run
                    .get(i)
                    .or_else(|| run.last())
                    .copied()
                    .unwrap_or(NMSD_DB_FLOOR);
                acc += match mode {
                    TraceAveraging::LinearRatio => 10.0_f64.powf(db / 10.0),
                    TraceAveraging::DbDomain => db,
                };
            }
            let avg = acc / runs.len().max(1) as f64;
            mean_db.push(match mode {
                TraceAveraging::LinearRatio => (10.0 * avg.log10()).max(NMSD_DB_FLOOR),
                TraceAveraging::DbDomain => avg,
            });
        }
        NmsdTrace {
            solver: solver.into(),
            runs,
            mean_db,
        }
    }

    /// Final value of the aggregate curve.
    pub fn final_mean_db(&self) -> Option<f64> {
        self.mean_db.last().copied()
    }

    /// Standard deviation of the per-run final dB values.
    pub fn final_std_db(&self) -> f64 {
        let finals: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.last().copied())
            .collect();
        if finals.len() < 2 {
            return 0.0;
        }
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        let var =
            finals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / finals.len() as f64;
        var.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn exact_recovery_hits_the_floor() {
        let x = array![1.0, -2.0, 0.5];
        assert_eq!(nmsd(&x, &x.clone()).unwrap(), NMSD_DB_FLOOR);
    }

    #[test]
    fn zero_estimate_gives_zero_db() {
        let x = array![1.0, -2.0, 0.5];
        let z = Array1::zeros(3);
        assert!(nmsd(&x, &z).unwrap().abs() < 1e-12);
    }

    #[test]
    fn doubled_estimate_gives_zero_db() {
        let x = array![1.0, -2.0, 0.5];
        let d = &x * 2.0;
        assert!(nmsd(&x, &d).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_ground_truth() {
        let z = Array1::zeros(3);
        assert!(nmsd(&z, &z.clone()).is_err());
    }

    #[test]
    fn depends_only_on_the_deviation_ratio() {
        // nmsd(c·x, c·x + c·d) is the same for any scale c ≠ 0.
        let x = array![1.0, 2.0, -1.0];
        let d = array![0.1, -0.3, 0.2];
        let base = nmsd(&x, &(&x + &d)).unwrap();
        for c in [0.5, 3.0, -7.0] {
            let sx = &x * c;
            let est = &sx + &(&d * c);
            assert!((nmsd(&sx, &est).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_pads_short_runs_with_final_value() {
        let t = NmsdTrace::aggregate(
            "s",
            vec![vec![-10.0, -20.0], vec![-10.0]],
            TraceAveraging::DbDomain,
        );
        assert_eq!(t.mean_db.len(), 2);
        assert!((t.mean_db[0] + 10.0).abs() < 1e-12);
        assert!((t.mean_db[1] + 15.0).abs() < 1e-12);
    }

    #[test]
    fn linear_ratio_averaging_matches_hand_computation() {
        // ratios 0.1 and 0.001 → mean 0.0505 → ≈ −12.967 dB.
        let t = NmsdTrace::aggregate(
            "s",
            vec![vec![-10.0], vec![-30.0]],
            TraceAveraging::LinearRatio,
        );
        let expected = 10.0 * (0.0505_f64).log10();
        assert!((t.mean_db[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn final_std_is_zero_for_single_run() {
        let t = NmsdTrace::aggregate("s", vec![vec![-5.0]], TraceAveraging::LinearRatio);
        assert_eq!(t.final_std_db(), 0.0);
        assert_eq!(t.final_mean_db().unwrap(), -5.0);
    }
}
