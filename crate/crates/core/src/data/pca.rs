use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SquareMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `components[k]` is the k-th principal axis (unit length).
    pub components: Vec<Vec<f64>>,
    /// Variances along each component, descending.
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
}

impl PcaModel {
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| if self.total_variance > 0.0 { v / self.total_variance } else { 0.0 })
            .collect()
    }
}

fn column_mean(x: &[Vec<f64>]) -> Vec<f64> {
    let d = x[0].len();
    let mut mean = vec![0.0; d];
    for row in x {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= x.len() as f64);
    mean
}

/// Sample covariance (denominator `N - 1`).
pub fn covariance(x: &[Vec<f64>]) -> Result<SquareMatrix> {
    if x.len() < 2 {
        return Err(Error::Pca(format!("covariance needs >= 2 rows, got {}", x.len())));
    }
    let mean = column_mean(x);
    let d = mean.len();
    let mut cov = SquareMatrix::zeros(d);
    for row in x {
        let c: Vec<f64> = row.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..d {
            for j in i..d {
                cov.set(i, j, cov.get(i, j) + c[i] * c[j]);
            }
        }
    }
    let denom = (x.len() - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    Ok(cov)
}

pub fn fit_pca(x: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    if k == 0 {
        return Err(Error::Pca("need at least one component".into()));
    }
    if x.len() <= k {
        return Err(Error::Pca(format!("{} rows cannot support {k} components", x.len())));
    }
    let d = x[0].len();
    if d < k {
        return Err(Error::Pca(format!("{d} features cannot support {k} components")));
    }
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::Pca("ragged feature matrix".into()));
    }
    let cov = covariance(x)?;
    let total_variance = cov.trace();
    let eig = symmetric_eigen(&cov)?;
    let floor = 1e-12 * total_variance.max(f64::MIN_POSITIVE);
    let nonzero = eig.values.iter().filter(|&&v| v > floor).count();
    if nonzero < k {
        return Err(Error::Pca(format!(
            "data is rank deficient: {nonzero} nonzero variances for {k} components"
        )));
    }
    let components = (0..k)
        .map(|c| {
            let mut v = eig.vector(c);
            let lead = v.iter().fold(0.0f64, |a, &b| if b.abs() > a.abs() { b } else { a });
            if lead < 0.0 {
                v.iter_mut().for_each(|e| *e = -*e);
            }
            v
        })
        .collect();
    Ok(PcaModel {
        mean: column_mean(x),
        components,
        explained_variance: eig.values[..k].to_vec(),
        total_variance,
    })
}

pub fn transform(model: &PcaModel, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    x.iter()
        .map(|row| {
            if row.len() != model.mean.len() {
                return Err(Error::Pca(format!(
                    "row has {} features, model fitted on {}",
                    row.len(),
                    model.mean.len()
                )));
            }
            Ok(model
                .components
                .iter()
                .map(|c| c.iter().zip(row).zip(&model.mean).map(|((a, v), m)| a * (v - m)).sum())
                .collect())
        })
        .collect()
}
