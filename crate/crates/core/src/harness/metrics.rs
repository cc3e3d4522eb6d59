use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Three-class evaluation summary. Rows of `confusion` are gold labels,
/// columns predictions, both in [`Label::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confusion: [[usize; 3]; 3],
    pub per_class: [ClassMetrics; 3],
    pub accuracy: f64,
    pub macro_f1: f64,
    pub count: usize,
}

/// Accumulates a confusion matrix from `(gold, predicted)` pairs.
pub fn confusion_matrix(gold: &[Label], predicted: &[Label]) -> Result<[[usize; 3]; 3]> {
    if gold.len() != predicted.len() {
        return Err(Error::Contract(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    let mut c = [[0usize; 3]; 3];
    for (g, p) in gold.iter().zip(predicted) {
        c[g.index()][p.index()] += 1;
    }
    Ok(c)
}

/// Element-wise sum of confusion matrices from evaluation shards.
pub fn merge_confusion(parts: &[[[usize; 3]; 3]]) -> [[usize; 3]; 3] {
    let mut out = [[0usize; 3]; 3];
    for part in parts {
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += part[i][j];
            }
        }
    }
    out
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    pub fn from_confusion(confusion: [[usize; 3]; 3]) -> Result<Self> {
        let count: usize = confusion.iter().flatten().sum();
        if count == 0 {
            return Err(Error::Contract("cannot score an empty split".into()));
        }
        let mut per_class = [ClassMetrics {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            support: 0,
        }; 3];
        for k in 0..3 {
            let tp = confusion[k][k];
            let predicted: usize = (0..3).map(|g| confusion[g][k]).sum();
            let support: usize = confusion[k].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            per_class[k] = ClassMetrics {
                precision,
                recall,
                f1,
                support,
            };
        }
        let correct: usize = (0..3).map(|k| confusion[k][k]).sum();
        Ok(Self {
            confusion,
            per_class,
            accuracy: correct as f64 / count as f64,
            macro_f1: (per_class[0].f1 + per_class[1].f1 + per_class[2].f1) / 3.0,
            count,
        })
    }

    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[label.index()]
    }
}

pub fn compute_metrics(gold: &[Label], predicted: &[Label]) -> Result<MetricsReport> {
    MetricsReport::from_confusion(confusion_matrix(gold, predicted)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    #[test]
    fn worked_example() {
        let r = compute_metrics(
            &[Positive, Positive, Neutral, Negative],
            &[Positive, Neutral, Neutral, Positive],
        )
        .unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert!((r.class(Positive).f1 - 0.5).abs() < 1e-12);
        assert!((r.class(Neutral).f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.class(Negative).f1, 0.0);
        assert!((r.macro_f1 - 0.3889).abs() < 1e-4);
    }

    #[test]
    fn perfect_and_empty() {
        let g = [Positive, Neutral, Negative, Neutral];
        let r = compute_metrics(&g, &g).unwrap();
        assert_eq!((r.accuracy, r.macro_f1), (1.0, 1.0));
        assert!(compute_metrics(&[], &[]).is_err());
        assert!(compute_metrics(&[Positive], &[]).is_err());
    }
}
