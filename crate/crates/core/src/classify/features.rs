//! Named learning features and feature matrices.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::arithmetic::primes_up_to;
use crate::dataset::{Dataset, FieldRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    /// `a_n`.
    Coefficient(usize),
    Disc,
    Regulator,
    SZeta,
    SChi,
    NumRamified,
    /// `p1`, `p2`, `p3` (1-based slot).
    Ramified(usize),
}

impl Feature {
    pub fn value(&self, r: &FieldRecord, a: &[u8]) -> f64 {
        match *self {
            Feature::Coefficient(n) => a[n - 1] as f64,
            Feature::Disc => r.disc as f64,
            Feature::Regulator => r.regulator,
            Feature::SZeta => r.s_zeta,
            Feature::SChi => r.s_chi,
            Feature::NumRamified => r.n_d as f64,
            Feature::Ramified(1) => r.p1 as f64,
            Feature::Ramified(2) => r.p2 as f64,
            Feature::Ramified(_) => r.p3 as f64,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Coefficient(n) => write!(f, "a{n}"),
            Feature::Disc => f.write_str("D"),
            Feature::Regulator => f.write_str("R"),
            Feature::SZeta => f.write_str("S_zeta"),
            Feature::SChi => f.write_str("S_chi"),
            Feature::NumRamified => f.write_str("n_d"),
            Feature::Ramified(i) => write!(f, "p{i}"),
        }
    }
}

impl Serialize for Feature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownFeature(s.to_string());
        match s {
            "D" => Ok(Feature::Disc),
            "R" => Ok(Feature::Regulator),
            "S_zeta" => Ok(Feature::SZeta),
            "S_chi" => Ok(Feature::SChi),
            "n_d" => Ok(Feature::NumRamified),
            "p1" | "p2" | "p3" => Ok(Feature::Ramified(s[1..].parse().unwrap())),
            _ => {
                let n: usize = s.strip_prefix('a').ok_or_else(unknown)?.parse().map_err(|_| unknown())?;
                if n == 0 {
                    return Err(unknown());
                }
                Ok(Feature::Coefficient(n))
            }
        }
    }
}

/// Parses a comma-separated feature list. Besides single names, accepts
/// `ap` (every prime index up to the bound), `ap:k` (the first `k` prime
/// indices) and `pi` (`p1,p2`).
pub fn parse_features(spec: &str, bound: usize) -> Result<Vec<Feature>> {
    let mut out = Vec::new();
    for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if token == "ap" {
            out.extend(prime_features(bound, usize::MAX));
        } else if let Some(k) = token.strip_prefix("ap:") {
            let k: usize = k.parse().map_err(|_| Error::UnknownFeature(token.to_string()))?;
            out.extend(prime_features(bound, k));
        } else if token == "pi" {
            out.extend([Feature::Ramified(1), Feature::Ramified(2)]);
        } else {
            out.push(token.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!("empty feature list `{spec}`")));
    }
    for f in &out {
        if let Feature::Coefficient(n) = f {
            if *n > bound {
                return Err(Error::IndexOutOfRange { index: *n, bound });
            }
        }
    }
    Ok(out)
}

/// `a_p` for the first `k` primes `p <= bound`.
pub fn prime_features(bound: usize, k: usize) -> Vec<Feature> {
    primes_up_to(bound as u64)
        .into_iter()
        .take(k)
        .map(|p| Feature::Coefficient(p as usize))
        .collect()
}

/// Row-major `f64` feature matrix with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub features: Vec<Feature>,
    pub rows: usize,
    pub values: Vec<f64>,
    pub labels: Vec<u32>,
    pub ids: Vec<u64>,
}

impl FeatureMatrix {
    pub fn from_dataset(ds: &Dataset, features: &[Feature]) -> Result<Self> {
        for f in features {
            if let Feature::Coefficient(n) = f {
                if *n == 0 || *n > ds.bound() {
                    return Err(Error::IndexOutOfRange { index: *n, bound: ds.bound() });
                }
            }
        }
        let mut values = Vec::with_capacity(ds.len() * features.len());
        for (r, a) in ds.iter() {
            values.extend(features.iter().map(|f| f.value(r, a)));
        }
        Ok(Self {
            features: features.to_vec(),
            rows: ds.len(),
            values,
            labels: ds.records().iter().map(|r| r.h).collect(),
            ids: ds.records().iter().map(|r| r.d).collect(),
        })
    }

    pub fn cols(&self) -> usize {
        self.features.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols()..(i + 1) * self.cols()]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}
