//! Binary classification metrics.

use serde::Serialize;

use crate::error::{Error, Result};

pub const CALIBRATION_BINS: usize = 10;
const LOG_LOSS_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
    /// Mean predicted probability of the positive class; `None` for empty bins.
    pub mean_predicted: Option<f64>,
    /// Observed positive frequency; `None` for empty bins.
    pub observed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub positive_class: u32,
    pub negative_class: u32,
    pub total: u64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub auc: f64,
    pub log_loss: f64,
    pub ks: f64,
    pub calibration: Vec<CalibrationBin>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Matthews correlation; 0 when any marginal is empty.
pub fn mcc(tp: u64, fp: u64, tn: u64, fn_: u64) -> f64 {
    let (tp, fp, tn, fn_) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / den.sqrt()
    }
}

/// Computes every metric from true labels, hard predictions and predicted
/// probabilities of the positive class. The result does not depend on the
/// order of the inputs.
pub fn binary_metrics(
    positive_class: u32,
    negative_class: u32,
    actual_positive: &[bool],
    predicted_positive: &[bool],
    probability: &[f64],
) -> Result<MetricsReport> {
    let n = actual_positive.len();
    if predicted_positive.len() != n || probability.len() != n {
        return Err(Error::InvalidArgument("metric inputs differ in length".into()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&a, &p) in actual_positive.iter().zip(predicted_positive) {
        match (a, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    // canonical order so floating-point sums are order independent
    let mut pairs: Vec<(f64, bool)> = probability
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .zip(actual_positive.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    Ok(MetricsReport {
        positive_class,
        negative_class,
        total: n as u64,
        tp,
        fp,
        tn,
        fn_,
        accuracy: ratio(tp + tn, n as u64),
        precision,
        recall,
        f1,
        mcc: mcc(tp, fp, tn, fn_),
        auc: auc_sorted(&pairs),
        log_loss: log_loss_sorted(&pairs),
        ks: ks_sorted(&pairs),
        calibration: calibration_sorted(&pairs),
    })
}

/// Mann-Whitney statistic with average ranks for ties; 0.5 if a class is absent.
fn auc_sorted(pairs: &[(f64, bool)]) -> f64 {
    let positives = pairs.iter().filter(|p| p.1).count() as f64;
    let negatives = pairs.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 {
        return 0.5;
    }
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let average_rank = (i + 1 + j) as f64 / 2.0;
        rank_sum += average_rank * pairs[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }
    (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives)
}

fn log_loss_sorted(pairs: &[(f64, bool)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let total: f64 = pairs
        .iter()
        .map(|&(p, y)| {
            let p = p.clamp(LOG_LOSS_EPS, 1.0 - LOG_LOSS_EPS);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / pairs.len() as f64
}

/// Largest gap between the score CDFs of the two classes.
fn ks_sorted(pairs: &[(f64, bool)]) -> f64 {
    let positives = pairs.iter().filter(|p| p.1).count() as f64;
    let negatives = pairs.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 {
        return 0.0;
    }
    let (mut cp, mut cn, mut best) = (0.0, 0.0, 0.0f64);
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            if pairs[j].1 {
                cp += 1.0;
            } else {
                cn += 1.0;
            }
            j += 1;
        }
        best = best.max((cp / positives - cn / negatives).abs());
        i = j;
    }
    best
}

fn calibration_sorted(pairs: &[(f64, bool)]) -> Vec<CalibrationBin> {
    let mut sums = vec![(0u64, 0.0f64, 0u64); CALIBRATION_BINS];
    for &(p, y) in pairs {
        let bin = ((p * CALIBRATION_BINS as f64) as usize).min(CALIBRATION_BINS - 1);
        sums[bin].0 += 1;
        sums[bin].1 += p;
        sums[bin].2 += y as u64;
    }
    sums.into_iter()
        .enumerate()
        .map(|(b, (count, p_sum, pos))| CalibrationBin {
            lower: b as f64 / CALIBRATION_BINS as f64,
            upper: (b + 1) as f64 / CALIBRATION_BINS as f64,
            count,
            mean_predicted: (count > 0).then(|| p_sum / count as f64),
            observed: (count > 0).then(|| pos as f64 / count as f64),
        })
        .collect()
}

impl MetricsReport {
    /// Confusion matrix and calibration as CSV rows.
    pub fn calibration_csv(&self) -> String {
        let mut out = String::from("lower,upper,count,mean_predicted,observed\n");
        for b in &self.calibration {
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                b.lower,
                b.upper,
                b.count,
                opt(b.mean_predicted),
                opt(b.observed)
            ));
        }
        out
    }

    pub fn confusion_csv(&self) -> String {
        format!(
            "actual,predicted,count\n{p},{p},{}\n{p},{n},{}\n{n},{p},{}\n{n},{n},{}\n",
            self.tp,
            self.fn_,
            self.fp,
            self.tn,
            p = self.positive_class,
            n = self.negative_class
        )
    }
}
