//! Undirected weighted graphs: Laplacian construction, smoothness, and the
//! spectral utilities the solvers and signal generators rely on.
//!
//! Storage is dense throughout. Every graph in the intended workloads has a
//! few hundred nodes at most, and the solver recursions are O(N²) per step
//! anyway, so sparse machinery would buy nothing.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Absolute tolerance for accepting an input adjacency matrix as symmetric.
/// Inputs inside the tolerance are symmetrized as (W + Wᵀ)/2 so downstream
/// math sees exact symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Immutable graph triple: adjacency `W`, degree `D`, Laplacian `L = D − W`.
///
/// Construction validates symmetry, nonnegativity, and a zero diagonal, so a
/// `GraphModel` always satisfies: `L` has zero row sums and is positive
/// semidefinite. Values are never mutated after construction; the type is
/// safe to share across concurrent trials.
#[derive(Debug, Clone)]
pub struct GraphModel {
    n_nodes: usize,
    adjacency: Array2<f64>,
    degree: Array1<f64>,
    laplacian: Array2<f64>,
}

/// Builds a [`GraphModel`] from a square, symmetric, nonnegative adjacency
/// matrix with a zero diagonal.
///
/// Rejections name the offending index. Entries symmetric within
/// [`SYMMETRY_TOL`] are averaged into exact symmetry.
pub fn build_graph(adjacency: Array2<f64>) -> Result<GraphModel> {
    let (rows, cols) = adjacency.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    for i in 0..n {
        for j in 0..n {
            let w = adjacency[[i, j]];
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { i, j });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { i, j, value: w });
            }
        }
        let d = adjacency[[i, i]];
        if d != 0.0 {
            return Err(Error::NonzeroDiagonal { i, value: d });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let a = adjacency[[i, j]];
            let b = adjacency[[j, i]];
            if (a - b).abs() > SYMMETRY_TOL {
                return Err(Error::Asymmetric { i, j, a, b });
            }
        }
    }

    let mut w = adjacency;
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (w[[i, j]] + w[[j, i]]);
            w[[i, j]] = avg;
            w[[j, i]] = avg;
        }
    }

    let degree: Array1<f64> = w.rows().into_iter().map(|r| r.sum()).collect();
    let mut laplacian = -&w;
    for i in 0..n {
        laplacian[[i, i]] += degree[i];
    }

    Ok(GraphModel {
        n_nodes: n,
        adjacency: w,
        degree,
        laplacian,
    })
}

impl GraphModel {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    pub fn degree(&self) -> &Array1<f64> {
        &self.degree
    }

    pub fn laplacian(&self) -> &Array2<f64> {
        &self.laplacian
    }

    /// True when every weight is zero.
    pub fn is_empty(&self) -> bool {
        self.degree.iter().all(|&d| d == 0.0)
    }

    /// Breadth-first reachability over nonzero weights.
    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes;
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && self.adjacency[[i, j]] > 0.0 {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }

    /// Smoothness quadratic form `xᵀLx`.
    ///
    /// Equals the edge sum Σ W_ij (x_j − x_i)² with each undirected edge
    /// counted once; small signals on tightly connected graphs score low.
    pub fn smoothness(&self, x: &Array1<f64>) -> Result<f64> {
        if x.len() != self.n_nodes {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes,
                actual: x.len(),
            });
        }
        Ok(self.laplacian.dot(x).dot(x))
    }

    /// Largest Laplacian eigenvalue, by power iteration.
    ///
    /// The start vector is deterministic: all ones plus a fixed perturbation
    /// on the first non-isolated coordinate, so results are reproducible and
    /// the iterate is never orthogonal to the top eigenvector in practice.
    /// Convergence means the residual ‖Lv − λv‖ has dropped below `tol·λ`.
    pub fn spectral_radius(&self, tol: f64, max_iter: usize) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::NoEdges);
        }
        let n = self.n_nodes;
        let mut v = Array1::<f64>::ones(n);
        // An all-ones start is exactly the Laplacian null space; the bump
        // gives the iterate weight on every non-null eigenvector.
        let bump = (0..n).find(|&i| self.degree[i] > 0.0).unwrap_or(0);
        v[bump] += 0.5;
        let norm = v.dot(&v).sqrt();
        v.mapv_inplace(|a| a / norm);

        let mut rayleigh = 0.0;
        for _ in 0..max_iter {
            let w = self.laplacian.dot(&v);
            rayleigh = v.dot(&w);
            let residual = (&w - &(&v * rayleigh)).dot(&(&w - &(&v * rayleigh)).view()).sqrt();
            if residual <= tol * rayleigh.max(f64::MIN_POSITIVE) {
                return Ok(rayleigh);
            }
            let wn = w.dot(&w).sqrt();
            if wn == 0.0 {
                // Iterate fell into the null space; restart off the bump.
                v = Array1::zeros(n);
                v[bump] = 1.0;
                continue;
            }
            v = w / wn;
        }
        Err(Error::NoConvergence {
            iterations: max_iter,
            last_estimate: rayleigh,
        })
    }

    /// The `k` algebraically smallest Laplacian eigenpairs.
    ///
    /// Returns eigenvalues ascending and the matching eigenvectors as the
    /// columns of an N×k matrix, orthonormal, each with its first nonzero
    /// component made positive so generated signals are reproducible.
    pub fn smallest_eigenvectors(&self, k: usize) -> Result<(Array1<f64>, Array2<f64>)> {
        let n = self.n_nodes;
        if k == 0 || k > n {
            return Err(Error::EigenCountOutOfRange { k, n });
        }
        let (values, vectors) = symmetric_eigen(&self.laplacian);
        let eigenvalues = values.slice(ndarray::s![..k]).to_owned();
        let eigenvectors = vectors.slice(ndarray::s![.., ..k]).to_owned();
        Ok((eigenvalues, eigenvectors))
    }
}

/// Dense symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns (eigenvalues ascending, eigenvectors as columns). Ties keep the
/// order the sweep produced. Each eigenvector's first nonzero component is
/// made positive.
pub(crate) fn symmetric_eigen(matrix: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "symmetric_eigen requires a square matrix");
    let mut a = matrix.clone();
    let mut v = Array2::<f64>::eye(n);

    let frobenius: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frobenius == 0.0 {
        return (Array1::zeros(n), v);
    }
    let stop = 1e-15 * frobenius;

    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[[i, j]] * a[[i, j]];
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[[p, p]];
                let aqq = a[[q, q]];
                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[[r, p]];
                        let arq = a[[r, q]];
                        a[[r, p]] = arp - s * (arq + tau * arp);
                        a[[p, r]] = a[[r, p]];
                        a[[r, q]] = arq + s * (arp - tau * arq);
                        a[[q, r]] = a[[r, q]];
                    }
                }
                for r in 0..n {
                    let vrp = v[[r, p]];
                    let vrq = v[[r, q]];
                    v[[r, p]] = vrp - s * (vrq + tau * vrp);
                    v[[r, q]] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].partial_cmp(&a[[j, j]]).unwrap());

    let mut values = Array1::<f64>::zeros(n);
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[[src, src]];
        let col = v.column(src);
        let max_abs = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let flip = col
            .iter()
            .find(|x| x.abs() > 1e-8 * max_abs)
            .map_or(1.0, |&first| if first < 0.0 { -1.0 } else { 1.0 });
        for r in 0..n {
            vectors[[r, dst]] = flip * col[r];
        }
    }
    (values, vectors)
}

/// Diagonal 0/1 sampling operator, stored as a boolean vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    n_nodes: usize,
    sampled: Vec<bool>,
    m: usize,
}

impl SamplingMask {
    /// At least one node must be sampled.
    pub fn new(sampled: Vec<bool>) -> Result<Self> {
        let n_nodes = sampled.len();
        let m = sampled.iter().filter(|&&s| s).count();
        if m == 0 || n_nodes == 0 {
            return Err(Error::BadMaskSize { m, n: n_nodes });
        }
        Ok(SamplingMask {
            n_nodes,
            sampled,
            m,
        })
    }

    /// Mask observing every node.
    pub fn full(n: usize) -> Result<Self> {
        SamplingMask::new(vec![true; n])
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of sampled nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_sampled(&self, i: usize) -> bool {
        self.sampled[i]
    }

    /// Indicator of node `i` as a float factor (1.0 sampled, 0.0 not).
    pub fn factor(&self, i: usize) -> f64 {
        if self.sampled[i] {
            1.0
        } else {
            0.0
        }
    }

    /// Zeroes the components of `x` at unsampled nodes, in place.
    pub fn apply(&self, x: &mut Array1<f64>) {
        for (i, xi) in x.iter_mut().enumerate() {
            if !self.sampled[i] {
                *xi = 0.0;
            }
        }
    }
}

/// Reads an N×N adjacency matrix from a headerless CSV of decimal reals.
pub fn load_adjacency_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("bad number {:?}: {e}", cell.trim()),
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("adjacency csv"));
    }
    let n = rows.len();
    for (lineno, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("expected {n} columns, found {}", row.len()),
            });
        }
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((n, n), flat).expect("shape checked above"))
}

/// Writes an adjacency matrix as headerless CSV, round-trippable through
/// [`load_adjacency_csv`].
pub fn write_adjacency_csv(path: impl AsRef<Path>, w: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for row in w.rows() {
        let mut first = true;
        for x in row {
            if !first {
                out.push(',');
            }
            write!(out, "{x}").expect("string write");
            first = false;
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
