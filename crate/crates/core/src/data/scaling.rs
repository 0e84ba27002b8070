use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Column-wise map of the fitted range onto `[0, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let first = x.first().ok_or_else(|| Error::Data("cannot fit a scaler on no rows".into()))?;
        let mut min = first.clone();
        let mut max = first.clone();
        for row in x {
            if row.len() != min.len() {
                return Err(Error::Data("ragged feature matrix".into()));
            }
            for j in 0..row.len() {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Ok(Self { min, max })
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter()
            .map(|row| {
                if row.len() != self.min.len() {
                    return Err(Error::Data(format!(
                        "row has {} columns, scaler fitted on {}",
                        row.len(),
                        self.min.len()
                    )));
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let span = self.max[j] - self.min[j];
                        if span <= 0.0 {
                            PI / 2.0
                        } else {
                            (PI * (v - self.min[j]) / span).clamp(0.0, PI)
                        }
                    })
                    .collect())
            })
            .collect()
    }
}
