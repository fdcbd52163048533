//! Feature-set ablation for the boosted-tree baseline on `h` in {1, 3}.

use rayon::prelude::*;
use serde::Serialize;

use super::features::{parse_features, FeatureMatrix};
use super::gbdt::{gbdt_train, GbdtConfig};
use crate::dataset::{split, Dataset};
use crate::error::{Error, Result};

/// Feature specs in table order.
pub const ABLATION_ROWS: [&str; 14] = [
    "ap",
    "ap,n_d,pi",
    "ap,S_zeta",
    "ap,R",
    "ap,D",
    "ap,D,R",
    "D,R,S_zeta",
    "ap,S_chi",
    "D,R,S_chi",
    "ap:10,D,R",
    "ap:5,D,R",
    "ap:3,D,R",
    "ap:2,D,R",
    "ap:1,D,R",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    /// 1-based row number.
    pub row: usize,
    pub features: String,
    pub feature_count: usize,
    pub accuracy: f64,
}

/// Trains one model per spec on the same split and seed, and reports test accuracy.
pub fn ablation_table(
    ds: &Dataset,
    specs: &[&str],
    train_fraction: f64,
    config: &GbdtConfig,
) -> Result<Vec<AblationRow>> {
    let classes = ds.label_classes();
    if classes.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "ablation needs exactly two classes, found {classes:?}"
        )));
    }
    let mut it = classes.iter();
    let (low, high) = (*it.next().unwrap(), *it.next().unwrap());
    let parsed = specs
        .iter()
        .map(|s| parse_features(s, ds.bound()))
        .collect::<Result<Vec<_>>>()?;
    let (train, test) = split(ds, train_fraction, config.seed)?;
    parsed
        .par_iter()
        .enumerate()
        .map(|(i, features)| {
            let x_train = FeatureMatrix::from_dataset(&train, features)?;
            let x_test = FeatureMatrix::from_dataset(&test, features)?;
            let model = gbdt_train(&x_train, low, high, config)?;
            Ok(AblationRow {
                row: i + 1,
                features: specs[i].to_string(),
                feature_count: features.len(),
                accuracy: model.accuracy(&x_test)?,
            })
        })
        .collect()
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("row,features,feature_count,accuracy\n");
    for r in rows {
        out.push_str(&format!("{},\"{}\",{},{}\n", r.row, r.features, r.feature_count, r.accuracy));
    }
    out
}
