//! Item features learned from a historical click matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::ProblemInstance;
use crate::error::{structural, Error, Result};
use crate::linear::matrix::{dot, norm, Matrix};
use crate::linear::svd::truncated_svd;

/// `d x L` feature matrix; column `i` is `x(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    d: usize,
    columns: Vec<Vec<f64>>,
    /// Factor applied to the raw `S V^T` features.
    scale: f64,
}

/// On-disk form: `X` lists one length-`d` column per item.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureFile {
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Columns as given; all must have length `d >= 1`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let d = columns.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(structural(
                "feature matrix needs d >= 1 and at least one item",
            ));
        }
        if columns.iter().any(|c| c.len() != d) {
            return Err(structural("feature columns have differing lengths"));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(structural("feature matrix contains a non-finite entry"));
        }
        Ok(Self {
            d,
            columns,
            scale: 1.0,
        })
    }

    /// Loads a feature file and checks `max ||x(i)|| <= 1/sqrt(K)`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<(Self, usize)> {
        let file: FeatureFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let k = file.k;
        let fm = Self::from_columns(file.x)?;
        if fm.d != file.d {
            return Err(structural(format!(
                "feature file declares d={} but columns have length {}",
                file.d, fm.d
            )));
        }
        if k == 0 || fm.max_column_norm() > (1.0 / (k as f64).sqrt()) * (1.0 + 1e-9) {
            return Err(structural(format!(
                "feature columns exceed the 1/sqrt(K) bound for K={k}"
            )));
        }
        Ok((fm, k))
    }

    pub fn to_file(&self, k: usize) -> FeatureFile {
        FeatureFile {
            d: self.d,
            k,
            x: self.columns.clone(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of items.
    pub fn l(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_column_norm(&self) -> f64 {
        self.columns.iter().map(|c| norm(c)).fold(0.0, f64::max)
    }

    /// `x(i)^T v` for every item.
    pub fn scores(&self, v: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|c| dot(c, v)).collect()
    }

    /// Multiplies every column by one scalar so the largest norm is
    /// `1/sqrt(K)`.
    pub fn rescale_for_list_length(mut self, k: usize) -> Result<Self> {
        let max = self.max_column_norm();
        if max == 0.0 {
            return Err(structural("cannot rescale an all-zero feature matrix"));
        }
        let factor = 1.0 / ((k as f64).sqrt() * max);
        self.columns.iter_mut().flatten().for_each(|v| *v *= factor);
        self.scale *= factor;
        Ok(self)
    }
}

/// `X = diag(S) V^T` from a rank-`d` SVD of the click matrix, rescaled so the
/// largest column norm is `1/sqrt(K)`.
pub fn generate_features(a_train: &Matrix, d: usize, k: usize) -> Result<FeatureMatrix> {
    if k == 0 {
        return Err(structural("K must be at least 1"));
    }
    if let Some(v) = (0..a_train.rows())
        .flat_map(|i| a_train.row(i).iter())
        .find(|&&v| v != 0.0 && v != 1.0)
    {
        return Err(structural(format!(
            "training matrix entry {v} is not 0 or 1"
        )));
    }
    if a_train.max_abs() == 0.0 {
        return Err(structural("degenerate training matrix: no clicks"));
    }
    let svd = truncated_svd(a_train, d)?;
    let columns = (0..a_train.cols())
        .map(|i| (0..d).map(|j| svd.s[j] * svd.v[(i, j)]).collect())
        .collect();
    FeatureMatrix::from_columns(columns)?.rescale_for_list_length(k)
}

/// Reads a headerless CSV of 0/1 entries, one row per user.
pub fn read_training_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Structural(format!("bad training entry {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(structural("training matrix is empty"));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(structural("training matrix rows have differing lengths"));
    }
    Ok(Matrix::from_rows(&rows))
}

pub fn write_training_csv(path: impl AsRef<Path>, a: &Matrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for i in 0..a.rows() {
        w.write_record(a.row(i).iter().map(|v| format!("{}", *v as u8)))?;
    }
    w.flush()?;
    Ok(())
}

/// Features plus a shared latent vector; `w(i) = x(i)^T beta`.
#[derive(Debug, Clone)]
pub struct LinearInstance {
    features: FeatureMatrix,
    beta: Vec<f64>,
    instance: ProblemInstance,
}

impl LinearInstance {
    pub fn new(features: FeatureMatrix, beta: Vec<f64>, k: usize) -> Result<Self> {
        if beta.len() != features.d() {
            return Err(structural(format!(
                "beta has length {} but features have d={}",
                beta.len(),
                features.d()
            )));
        }
        let w = features.scores(&beta);
        if let Some((i, v)) = w
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(structural(format!(
                "induced weight w({}) = {v} outside [0, 1]",
                i + 1
            )));
        }
        let instance = ProblemInstance::new(w, k)?;
        Ok(Self {
            features,
            beta,
            instance,
        })
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
}
