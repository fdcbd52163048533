//! Pearson correlation between coefficient columns.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix<T> {
    /// Coefficient indices, `1..=k`.
    pub indices: Vec<usize>,
    /// Row-major `k x k`.
    pub values: Vec<T>,
    /// Indices of zero-variance columns; their rows and columns are 0.
    pub constant: Vec<usize>,
}

impl<T: Scalar> CorrelationMatrix<T> {
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.k() + j]
    }

    /// Long format: `i,j,corr` with 1-based coefficient indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,corr\n");
        for (a, &i) in self.indices.iter().enumerate() {
            for (b, &j) in self.indices.iter().enumerate() {
                out.push_str(&format!("{i},{j},{}\n", self.get(a, b)));
            }
        }
        out
    }
}

/// Correlations of `a_1..a_k` across the records.
pub fn correlation_matrix<T: Scalar>(ds: &Dataset, k: usize) -> Result<CorrelationMatrix<T>> {
    if k == 0 || k > ds.bound() {
        return Err(Error::IndexOutOfRange { index: k, bound: ds.bound() });
    }
    let n = ds.len();
    let mut mean = vec![T::zero(); k];
    for (_, a) in ds.iter() {
        for (m, &v) in mean.iter_mut().zip(&a[..k]) {
            *m += T::lit(v as f64);
        }
    }
    let count = T::lit(n.max(1) as f64);
    mean.iter_mut().for_each(|m| *m /= count);

    let mut cov = vec![T::zero(); k * k];
    let mut centred = vec![T::zero(); k];
    for (_, a) in ds.iter() {
        for i in 0..k {
            centred[i] = T::lit(a[i] as f64) - mean[i];
        }
        for i in 0..k {
            for j in i..k {
                cov[i * k + j] += centred[i] * centred[j];
            }
        }
    }
    let constant: Vec<usize> = (0..k).filter(|&i| cov[i * k + i] <= T::zero()).map(|i| i + 1).collect();
    let mut values = vec![T::zero(); k * k];
    for i in 0..k {
        for j in i..k {
            let (vi, vj) = (cov[i * k + i], cov[j * k + j]);
            if vi <= T::zero() || vj <= T::zero() {
                continue;
            }
            let r = if i == j {
                T::one()
            } else {
                (cov[i * k + j] / (vi * vj).sqrt()).max(-T::one()).min(T::one())
            };
            values[i * k + j] = r;
            values[j * k + i] = r;
        }
    }
    Ok(CorrelationMatrix { indices: (1..=k).collect(), values, constant })
}
