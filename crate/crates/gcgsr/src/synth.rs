//! Synthetic benchmark generation: Kronecker random graphs, bandlimited
//! graph signals, and sampling-mask selection. All draws are seeded.

use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, GraphModel, SamplingMask};

/// The 3×3 seed matrix used by the synthetic benchmarks. Its order-4
/// Kronecker power gives the 81-node probability matrix.
pub fn default_seed_matrix() -> Array2<f64> {
    ndarray::array![[0.6, 0.1, 0.7], [0.3, 0.1, 0.5], [0.0, 1.0, 0.1]]
}

/// Kronecker-product random-graph configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerConfig {
    /// 3×3 matrix of probabilities, row-major.
    pub seed_matrix: [[f64; 3]; 3],
    /// Number of Kronecker factors; the graph has 3^order nodes.
    pub order: usize,
    pub rng_seed: u64,
}

impl KroneckerConfig {
    /// Order-4 graph (81 nodes) on the default seed matrix.
    pub fn standard(rng_seed: u64) -> Self {
        let m = default_seed_matrix();
        let mut seed_matrix = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                seed_matrix[i][j] = m[[i, j]];
            }
        }
        KroneckerConfig {
            seed_matrix,
            order: 4,
            rng_seed,
        }
    }

    fn seed_array(&self) -> Array2<f64> {
        let flat: Vec<f64> = self.seed_matrix.iter().flatten().copied().collect();
        Array2::from_shape_vec((3, 3), flat).expect("3x3 seed")
    }
}

/// `order`-fold Kronecker power of the seed matrix: an N×N matrix of edge
/// probabilities with `N = 3^order`.
pub fn kronecker_probability(cfg: &KroneckerConfig) -> Result<Array2<f64>> {
    if cfg.order == 0 {
        return Err(Error::invalid("order", "must be at least 1"));
    }
    let seed = cfg.seed_array();
    for i in 0..3 {
        for j in 0..3 {
            let p = seed[[i, j]];
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadProbability { i, j, value: p });
            }
        }
    }
    let mut p = seed.clone();
    for _ in 1..cfg.order {
        p = ndarray::linalg::kron(&p, &seed);
    }
    Ok(p)
}

/// Draws a Bernoulli adjacency from a probability matrix.
///
/// One draw per unordered pair with probability `max(P_ij, P_ji)`, mirrored
/// to keep the adjacency symmetric; the diagonal stays zero. Seeds yielding
/// isolated nodes are retried (fresh seed offset) up to 10 times, after
/// which the last draw is accepted with a warning — the solvers tolerate
/// isolated nodes, they just split the Laplacian null space.
pub fn sample_adjacency(p: &Array2<f64>, rng_seed: u64) -> Result<GraphModel> {
    let (rows, cols) = p.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    for i in 0..rows {
        for j in 0..cols {
            let prob = p[[i, j]];
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::BadProbability { i, j, value: prob });
            }
        }
    }
    let n = rows;
    let mut last = None;
    for attempt in 0..10u64 {
        let mut rng = Pcg64::seed_from_u64(rng_seed.wrapping_add(attempt));
        let mut w = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let prob = p[[i, j]].max(p[[j, i]]);
                if rng.random_range(0.0..1.0) < prob {
                    w[[i, j]] = 1.0;
                    w[[j, i]] = 1.0;
                }
            }
        }
        let g = build_graph(w)?;
        let isolated = (0..n).any(|i| g.degree()[i] == 0.0);
        if !isolated {
            return Ok(g);
        }
        last = Some(g);
    }
    eprintln!("warning: adjacency draw kept isolated nodes after 10 attempts");
    Ok(last.expect("at least one attempt"))
}

/// Bandlimited-signal configuration: `bandwidth` standard-normal
/// coefficients on the lowest Laplacian eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandlimitedConfig {
    pub bandwidth: usize,
    pub rng_seed: u64,
}

/// Draws `x = Σ_{i<ω} γ⁽ⁱ⁾ c⁽ⁱ⁾` with `γ⁽ⁱ⁾ ~ N(0,1)` and `c⁽ⁱ⁾` the
/// eigenvectors of the `ω` smallest Laplacian eigenvalues.
pub fn bandlimited_signal(g: &GraphModel, cfg: &BandlimitedConfig) -> Result<Array1<f64>> {
    let (_, vectors) = g.smallest_eigenvectors(cfg.bandwidth)?;
    let mut rng = Pcg64::seed_from_u64(cfg.rng_seed);
    let coeffs: Array1<f64> =
        Array1::from_iter((0..cfg.bandwidth).map(|_| StandardNormal.sample(&mut rng)));
    Ok(vectors.dot(&coeffs))
}

/// Like [`bandlimited_signal`] but also returns the spectral coefficients
/// and their eigenvalues, for spectral-identity checks.
pub fn bandlimited_signal_with_spectrum(
    g: &GraphModel,
    cfg: &BandlimitedConfig,
) -> Result<(Array1<f64>, Array1<f64>, Array1<f64>)> {
    let (values, vectors) = g.smallest_eigenvectors(cfg.bandwidth)?;
    let mut rng = Pcg64::seed_from_u64(cfg.rng_seed);
    let coeffs: Array1<f64> =
        Array1::from_iter((0..cfg.bandwidth).map(|_| StandardNormal.sample(&mut rng)));
    Ok((vectors.dot(&coeffs), coeffs, values))
}

/// Uniformly random `m`-subset mask over `n` nodes (partial Fisher–Yates),
/// reproducible by seed.
pub fn choose_mask(n: usize, m: usize, rng_seed: u64) -> Result<SamplingMask> {
    if m == 0 || m > n {
        return Err(Error::BadMaskSize { m, n });
    }
    let mut rng = Pcg64::seed_from_u64(rng_seed);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.random_range(i..n);
        indices.swap(i, j);
    }
    let mut sampled = vec![false; n];
    for &i in &indices[..m] {
        sampled[i] = true;
    }
    SamplingMask::new(sampled)
}
