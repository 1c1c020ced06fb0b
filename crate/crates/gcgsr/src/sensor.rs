//! Sensor-network dataset ingestion and k-NN graph construction.
//!
//! The CSV layout is `sensor_id,x,y,temperature[,timestamp]` with a header
//! row; coordinates are meters, temperatures degrees Celsius. An empty
//! temperature cell marks a missing reading, which the snapshot imputes
//! from the spatial neighbors. A 54-sensor fixture with plausible values
//! ships in `data/sensors_fixture.csv` so nothing here depends on an
//! external download; `fetch-data` in the CLI documents the real source.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, GraphModel};

/// Neighbor count used for the default graph and for imputation.
pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// One sensor reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    pub sensor_id: u32,
    pub x: f64,
    pub y: f64,
    /// Missing readings are imputed when the snapshot is built.
    pub temperature: Option<f64>,
    pub timestamp: Option<String>,
}

/// Parsed dataset: records in file order plus the imputed snapshot vector.
#[derive(Debug, Clone)]
pub struct SensorDataset {
    pub records: Vec<SensorRecord>,
    /// One temperature per record, missing values imputed from neighbors.
    pub snapshot: Array1<f64>,
    /// Number of malformed rows skipped during parsing.
    pub skipped_rows: usize,
}

impl SensorDataset {
    pub fn n_sensors(&self) -> usize {
        self.records.len()
    }

    fn euclidean(&self, i: usize, j: usize) -> f64 {
        let dx = self.records[i].x - self.records[j].x;
        let dy = self.records[i].y - self.records[j].y;
        (dx * dx + dy * dy).sqrt()
    }

    /// Indices of the `k` nearest other sensors, nearest first.
    fn nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.records.len()).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            self.euclidean(i, a)
                .partial_cmp(&self.euclidean(i, b))
                .unwrap()
                .then(a.cmp(&b))
        });
        order.truncate(k);
        order
    }

    /// Mean distance to the k nearest neighbors, averaged over sensors.
    /// The shipped default kernel width.
    pub fn mean_knn_distance(&self, k: usize) -> f64 {
        let n = self.records.len();
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            for j in self.nearest(i, k) {
                acc += self.euclidean(i, j);
                count += 1;
            }
        }
        acc / count.max(1) as f64
    }
}

fn build_dataset(records: Vec<SensorRecord>, skipped_rows: usize) -> SensorDataset {
    let mut ds = SensorDataset {
        snapshot: Array1::zeros(records.len()),
        records,
        skipped_rows,
    };
    // Impute missing readings from the k nearest sensors that have one;
    // fall back to the global mean if a whole neighborhood is missing.
    let known: Vec<f64> = ds.records.iter().filter_map(|r| r.temperature).collect();
    let global_mean = known.iter().sum::<f64>() / known.len().max(1) as f64;
    let snapshot: Vec<f64> = (0..ds.records.len())
        .map(|i| match ds.records[i].temperature {
            Some(t) => t,
            None => {
                let neighbor_temps: Vec<f64> = ds
                    .nearest(i, DEFAULT_K_NEIGHBORS)
                    .into_iter()
                    .filter_map(|j| ds.records[j].temperature)
                    .collect();
                if neighbor_temps.is_empty() {
                    global_mean
                } else {
                    neighbor_temps.iter().sum::<f64>() / neighbor_temps.len() as f64
                }
            }
        })
        .collect();
    ds.snapshot = Array1::from_vec(snapshot);
    ds
}

fn parse_row(line: &str) -> std::result::Result<SensorRecord, String> {
    let cells: Vec<&str> = line.split(',').map(str::trim).collect();
    if cells.len() < 4 {
        return Err(format!("expected at least 4 columns, found {}", cells.len()));
    }
    let sensor_id: u32 = cells[0]
        .parse()
        .map_err(|e| format!("bad sensor_id {:?}: {e}", cells[0]))?;
    let x: f64 = cells[1]
        .parse()
        .map_err(|e| format!("bad x {:?}: {e}", cells[1]))?;
    let y: f64 = cells[2]
        .parse()
        .map_err(|e| format!("bad y {:?}: {e}", cells[2]))?;
    if !x.is_finite() || !y.is_finite() {
        return Err("non-finite coordinate".to_string());
    }
    let temperature = if cells[3].is_empty() {
        None
    } else {
        Some(
            cells[3]
                .parse::<f64>()
                .map_err(|e| format!("bad temperature {:?}: {e}", cells[3]))?,
        )
    };
    let timestamp = cells.get(4).filter(|s| !s.is_empty()).map(|s| s.to_string());
    Ok(SensorRecord {
        sensor_id,
        x,
        y,
        temperature,
        timestamp,
    })
}

/// Loads a sensor CSV. Malformed rows are skipped and tallied; a file with
/// no valid rows is an error.
pub fn load_sensor_csv(path: impl AsRef<Path>) -> Result<SensorDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut skipped = 0usize;
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue; // header
        }
        match parse_row(line) {
            Ok(r) => records.push(r),
            Err(_) => skipped += 1,
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("sensor csv has no valid rows"));
    }
    Ok(build_dataset(records, skipped))
}

/// Gaussian-kernel k-NN graph on sensor coordinates:
/// `W_ij = exp(−d_ij²/width²)` when `j` is among `i`'s `k` nearest
/// neighbors (or vice versa — symmetrized by max), else 0. Coincident
/// sensors get weight 1.
pub fn build_sensor_graph(ds: &SensorDataset, k_neighbors: usize, width: f64) -> Result<GraphModel> {
    let n = ds.n_sensors();
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(Error::invalid(
            "k_neighbors",
            format!("must be in 1..{n}, got {k_neighbors}"),
        ));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::invalid("width", format!("must be > 0, got {width}")));
    }
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in ds.nearest(i, k_neighbors) {
            let d = ds.euclidean(i, j);
            let weight = (-d * d / (width * width)).exp();
            if weight > w[[i, j]] {
                w[[i, j]] = weight;
                w[[j, i]] = weight;
            }
        }
    }
    build_graph(w)
}

/// The shipped default: `k = 5`, Gaussian width equal to the mean k-NN
/// distance.
pub fn default_sensor_graph(ds: &SensorDataset) -> Result<GraphModel> {
    build_sensor_graph(ds, DEFAULT_K_NEIGHBORS, ds.mean_knn_distance(DEFAULT_K_NEIGHBORS))
}

/// Path of the bundled 54-sensor fixture.
pub fn fixture_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join("sensors_fixture.csv")
}
