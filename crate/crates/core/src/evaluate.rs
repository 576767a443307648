//! Scoring of detected changepoints against the truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default matching window, in observations.
pub const DEFAULT_TOLERANCE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tolerance: usize,
}

impl EvalReport {
    fn from_counts(tp: usize, n_pred: usize, n_true: usize, tolerance: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, n_pred);
        let recall = ratio(tp, n_true);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            true_positives: tp,
            false_positives: n_pred - tp,
            false_negatives: n_true - tp,
            precision,
            recall,
            f1,
            tolerance,
        }
    }
}

fn check_sorted(name: &str, xs: &[usize]) -> Result<()> {
    if xs.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::invalid_parameter(format!("{name} changepoints must be sorted and unique")))
    }
}

/// Greedy one-to-one matching. Predictions are visited left to right and
/// each takes the nearest unmatched true change within `tol`, ties going to
/// the earlier one.
pub fn match_changepoints(predicted: &[usize], truth: &[usize], tol: usize) -> Result<EvalReport> {
    check_sorted("predicted", predicted)?;
    check_sorted("true", truth)?;
    let mut used = vec![false; truth.len()];
    let mut tp = 0;
    for &p in predicted {
        let lo = truth.partition_point(|&t| t + tol < p);
        let best = truth[lo..]
            .iter()
            .enumerate()
            .take_while(|(_, &t)| t <= p + tol)
            .filter(|(i, _)| !used[lo + i])
            .min_by_key(|(_, &t)| t.abs_diff(p))
            .map(|(i, _)| lo + i);
        if let Some(i) = best {
            used[i] = true;
            tp += 1;
        }
    }
    Ok(EvalReport::from_counts(tp, predicted.len(), truth.len(), tol))
}
