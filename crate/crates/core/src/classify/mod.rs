//! Closed-form class-number classifiers, metrics and the boosted-tree baseline.

pub mod ablation;
pub mod correlation;
pub mod features;
pub mod gbdt;
pub mod metrics;

use serde::Serialize;

use crate::dataset::{Dataset, FieldRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use ablation::{ablation_csv, ablation_table, AblationRow, ABLATION_ROWS};
pub use correlation::{correlation_matrix, CorrelationMatrix};
pub use features::{parse_features, prime_features, Feature, FeatureMatrix};
pub use gbdt::{gbdt_train, permutation_importance, BoostedTreesModel, GbdtConfig, Importance};
pub use metrics::{binary_metrics, mcc, CalibrationBin, MetricsReport, CALIBRATION_BINS};

pub const F12_THRESHOLD: f64 = 1.5115;
pub const F13A_THRESHOLD: f64 = 1.963;
pub const F13B_THRESHOLD: f64 = 15.97;

/// `0.17257 sin(1.5703 p1) + 0.72004 n_d`, for `h` in {1, 2}.
pub fn f12_score<T: Scalar>(n_d: T, p1: T) -> T {
    T::lit(0.17257) * (T::lit(1.5703) * p1).sin() + T::lit(0.72004) * n_d
}

/// Whether `p` lies in a window `(4n - 2.2724, 4n + 0.27174)` for some `n >= 1`.
pub fn parity_window(p: u64) -> bool {
    let p = p as f64;
    // Only the window with the nearest multiple of 4 above p - 0.27174 can hold it.
    let n = ((p - 0.27174) / 4.0).floor() + 1.0;
    n >= 1.0 && 4.0 * n - 2.2724 < p && p < 4.0 * n + 0.27174
}

fn positive_regulator<T: Scalar>(r: T) -> Result<()> {
    if r > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("regulator must be positive, got {r}")))
    }
}

/// `sqrt(D) S_chi / (2 R)`, for `h` in {1, 3}.
pub fn f13a_score<T: Scalar>(disc: T, regulator: T, s_chi: T) -> Result<T> {
    positive_regulator(regulator)?;
    Ok(T::lit(0.5) * disc.sqrt() * s_chi / regulator)
}

/// The coefficient-and-regulator formula for `h` in {1, 3}.
pub fn f13b_score<T: Scalar>(a2: T, a3: T, a5: T, disc: T, regulator: T) -> Result<T> {
    positive_regulator(regulator)?;
    let den = regulator
        * (T::lit(-0.5468) * a2 - T::lit(0.2718) * a3).exp()
        * (T::lit(-0.2556) * a3).sin().cos()
        * (T::lit(-0.1962) * a5).cos()
        * (T::lit(-0.1952) * a5).cos().powi(4);
    Ok(T::lit(1.8858) * disc.sqrt() / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    F12,
    F13a,
    F13b,
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f12" => Ok(Formula::F12),
            "f13a" => Ok(Formula::F13a),
            "f13b" => Ok(Formula::F13b),
            _ => Err(Error::InvalidArgument(format!("unknown formula `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPredictor {
    pub formula: Formula,
    pub threshold: f64,
    pub class_low: u32,
    pub class_high: u32,
}

impl ThresholdPredictor {
    pub fn f12() -> Self {
        Self { formula: Formula::F12, threshold: F12_THRESHOLD, class_low: 1, class_high: 2 }
    }

    pub fn f13a() -> Self {
        Self { formula: Formula::F13a, threshold: F13A_THRESHOLD, class_low: 1, class_high: 3 }
    }

    pub fn f13b() -> Self {
        Self { formula: Formula::F13b, threshold: F13B_THRESHOLD, class_low: 1, class_high: 3 }
    }

    pub fn of(formula: Formula) -> Self {
        match formula {
            Formula::F12 => Self::f12(),
            Formula::F13a => Self::f13a(),
            Formula::F13b => Self::f13b(),
        }
    }

    /// Coefficient indices the score reads.
    pub fn required_bound(&self) -> usize {
        match self.formula {
            Formula::F13b => 5,
            _ => 1,
        }
    }

    pub fn score(&self, r: &FieldRecord, a: &[u8]) -> Result<f64> {
        match self.formula {
            Formula::F12 => Ok(f12_score(r.n_d as f64, r.p1 as f64)),
            Formula::F13a => f13a_score(r.disc as f64, r.regulator, r.s_chi),
            Formula::F13b => {
                if a.len() < 5 {
                    return Err(Error::IndexOutOfRange { index: 5, bound: a.len() });
                }
                f13b_score(a[1] as f64, a[2] as f64, a[4] as f64, r.disc as f64, r.regulator)
            }
        }
    }

    pub fn classify(&self, score: f64) -> u32 {
        if score < self.threshold {
            self.class_low
        } else {
            self.class_high
        }
    }

    pub fn predict(&self, r: &FieldRecord, a: &[u8]) -> Result<u32> {
        Ok(self.classify(self.score(r, a)?))
    }
}

/// A record the predictor got wrong.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Miss {
    pub d: u64,
    pub h: u32,
    pub predicted: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub predictor: ThresholdPredictor,
    pub metrics: MetricsReport,
    pub misses: Vec<Miss>,
}

/// Scores every record; `class_low` is the positive class and the min-max
/// normalised score stands in for `P(class_high)`.
pub fn evaluate(pred: &ThresholdPredictor, ds: &Dataset) -> Result<Evaluation> {
    let mut scores = Vec::with_capacity(ds.len());
    for (r, a) in ds.iter() {
        if r.h != pred.class_low && r.h != pred.class_high {
            return Err(Error::InvalidArgument(format!(
                "d = {} has h = {}, outside {{{}, {}}}",
                r.d, r.h, pred.class_low, pred.class_high
            )));
        }
        scores.push(pred.score(r, a)?);
    }
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let span = hi - lo;
    let mut actual = Vec::with_capacity(ds.len());
    let mut predicted = Vec::with_capacity(ds.len());
    let mut prob = Vec::with_capacity(ds.len());
    let mut misses = Vec::new();
    for (r, &s) in ds.records().iter().zip(&scores) {
        let class = pred.classify(s);
        let norm = if span > 0.0 { (s - lo) / span } else { 0.5 };
        actual.push(r.h == pred.class_low);
        predicted.push(class == pred.class_low);
        prob.push(1.0 - norm);
        if class != r.h {
            misses.push(Miss { d: r.d, h: r.h, predicted: class, score: s });
        }
    }
    let metrics = binary_metrics(pred.class_low, pred.class_high, &actual, &predicted, &prob)?;
    Ok(Evaluation { predictor: *pred, metrics, misses })
}
