//! Dataset ingestion and preprocessing for the classification task, plus the
//! Pauli-term Hamiltonian file format.

mod hamiltonian;
mod pca;
mod scaling;

use std::io::Read;
use std::path::Path;

use serde::Serialize;

pub use hamiltonian::{load_hamiltonian, parse_hamiltonian};
pub use pca::{covariance, fit_pca, transform, PcaModel};
pub use scaling::MinMaxScaler;

use crate::distributions::Prng;
use crate::error::{Error, Result};

/// Number of principal components fed to the embedding.
pub const PCA_COMPONENTS: usize = 4;
/// Fraction of each class assigned to the training split.
pub const TRAIN_FRACTION: f64 = 0.8;

const STREAM_SPLIT: u64 = 0x5b1;
const STREAM_SUBSAMPLE: u64 = 0x5b5;

/// Shapes `(rows, features)` of the bundled corpora.
pub fn known_shape(name: &str) -> Option<(usize, usize)> {
    match name {
        "wine" => Some((178, 13)),
        "breast_cancer" => Some((569, 30)),
        "digits" => Some((1797, 64)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(first) = features.first() {
            if let Some(i) = features.iter().position(|r| r.len() != first.len()) {
                return Err(Error::Data(format!(
                    "row {i} has {} features, expected {}",
                    features[i].len(),
                    first.len()
                )));
            }
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Self {
            name: name.into(),
            features,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Rows at `indices`, in that order. Keeps the class count of `self`.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Errors when the name is one of the bundled corpora and the shape is off.
    pub fn check_known_shape(&self) -> Result<()> {
        match known_shape(&self.name) {
            Some(shape) if shape != (self.len(), self.num_features()) => Err(Error::Data(format!(
                "{} should be {:?}, found ({}, {})",
                self.name,
                shape,
                self.len(),
                self.num_features()
            ))),
            _ => Ok(()),
        }
    }
}

/// Reads a headed numeric CSV; `label_column` names the integer label.
pub fn read_csv(reader: impl Read, name: &str, label_column: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().parse::<f64>().is_ok()) {
        return Err(Error::Data(format!("{name}: missing header row")));
    }
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::Data(format!("{name}: no label column `{label_column}`")))?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{name}: {e}")))?;
        let line = row + 2;
        let mut x = Vec::with_capacity(headers.len() - 1);
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Data(format!("{name}: line {line}, column `{}`: non-numeric `{cell}`", &headers[col]))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!("{name}: line {line}: non-finite value")));
            }
            if col == label_idx {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::Data(format!("{name}: line {line}: label {v} is not a class index")));
                }
                labels.push(v as usize);
            } else {
                x.push(v);
            }
        }
        features.push(x);
    }
    Dataset::new(name, features, labels)
}

/// Loads a CSV dataset named after the file stem and checks the shape of the
/// bundled corpora.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let file = std::fs::File::open(path)?;
    let ds = read_csv(file, &name, label_column)?;
    ds.check_known_shape()?;
    Ok(ds)
}

fn indices_by_class(labels: &[usize], num_classes: usize) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    by_class
}

/// Stratified split: `ceil(0.8 n_c)` rows of each class go to train after a
/// seeded shuffle. Both index lists are returned sorted.
pub fn split_indices(labels: &[usize], num_classes: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, mut idx) in indices_by_class(labels, num_classes).into_iter().enumerate() {
        Prng::derive(seed, &[STREAM_SPLIT, c as u64]).shuffle(&mut idx);
        let n_train = (TRAIN_FRACTION * idx.len() as f64 - 1e-9).ceil() as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

pub fn split_80_20(ds: &Dataset, seed: u64) -> (Dataset, Dataset) {
    let (train, test) = split_indices(&ds.labels, ds.num_classes, seed);
    (ds.select(&train), ds.select(&test))
}

/// At most `max_rows` rows, keeping class proportions (largest remainder,
/// lower class first on ties). Sorted indices.
pub fn stratified_subsample(ds: &Dataset, max_rows: usize, seed: u64) -> Dataset {
    if ds.len() <= max_rows {
        return ds.clone();
    }
    let counts = ds.class_counts();
    let n = ds.len() as f64;
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * max_rows as f64 / n).collect();
    let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = max_rows - take.iter().sum::<usize>();
    for &c in order.iter().cycle().take(order.len() * 2) {
        if left == 0 {
            break;
        }
        if take[c] < counts[c] {
            take[c] += 1;
            left -= 1;
        }
    }
    let mut chosen = Vec::with_capacity(max_rows);
    for (c, mut idx) in indices_by_class(&ds.labels, ds.num_classes).into_iter().enumerate() {
        Prng::derive(seed, &[STREAM_SUBSAMPLE, c as u64]).shuffle(&mut idx);
        chosen.extend_from_slice(&idx[..take[c]]);
    }
    chosen.sort_unstable();
    ds.select(&chosen)
}

/// Angle-ready features for the classifier.
#[derive(Debug, Clone, Serialize)]
pub struct PreparedData {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<usize>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<usize>,
    pub num_classes: usize,
    pub explained_variance_ratio: Vec<f64>,
}

/// Split, optional training subsample, PCA and `[0, pi]` scaling. PCA and the
/// scaler are fitted on the training rows only.
pub fn prepare_classification(
    ds: &Dataset,
    components: usize,
    max_train: Option<usize>,
    seed: u64,
) -> Result<PreparedData> {
    let (train, test) = split_80_20(ds, seed);
    let train = match max_train {
        Some(m) => stratified_subsample(&train, m, seed),
        None => train,
    };
    if test.is_empty() {
        return Err(Error::Data(format!("{}: test split is empty", ds.name)));
    }
    let model = fit_pca(&train.features, components)?;
    let train_p = transform(&model, &train.features)?;
    let test_p = transform(&model, &test.features)?;
    let scaler = MinMaxScaler::fit(&train_p)?;
    Ok(PreparedData {
        train_x: scaler.transform(&train_p)?,
        train_y: train.labels,
        test_x: scaler.transform(&test_p)?,
        test_y: test.labels,
        num_classes: ds.num_classes,
        explained_variance_ratio: model.explained_variance_ratio(),
    })
}
