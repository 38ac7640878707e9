//! Confusion matrices, accuracy and the Matthews correlation coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

/// `k x k` counts; rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if let Some(bad) = counts.iter().find(|r| r.len() != k) {
            return Err(MlError::Dimension {
                expected: k,
                actual: bad.len(),
            });
        }
        Ok(Self { counts })
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth][pred]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    /// Fraction of samples on the diagonal; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.trace() as f64 / total as f64
    }

    /// Matthews correlation coefficient. For two classes this is
    /// `(C11 C00 - C01 C10) / sqrt((C11+C01)(C11+C10)(C00+C01)(C00+C10))`;
    /// for more it is the usual multiclass generalization. A zero
    /// denominator gives 0.
    pub fn mcc(&self) -> f64 {
        let k = self.classes();
        if k == 2 {
            let c = |i: usize, j: usize| self.counts[i][j] as f64;
            let num = c(1, 1) * c(0, 0) - c(0, 1) * c(1, 0);
            let den = (c(1, 1) + c(0, 1))
                * (c(1, 1) + c(1, 0))
                * (c(0, 0) + c(0, 1))
                * (c(0, 0) + c(1, 0));
            return if den == 0.0 { 0.0 } else { num / den.sqrt() };
        }
        let s = self.total() as f64;
        let correct = self.trace() as f64;
        let truth: Vec<f64> = self
            .counts
            .iter()
            .map(|r| r.iter().sum::<u64>() as f64)
            .collect();
        let pred: Vec<f64> = (0..k)
            .map(|j| self.counts.iter().map(|r| r[j]).sum::<u64>() as f64)
            .collect();
        let tp: f64 = truth.iter().zip(&pred).map(|(t, p)| t * p).sum();
        let pp: f64 = pred.iter().map(|p| p * p).sum();
        let tt: f64 = truth.iter().map(|t| t * t).sum();
        let den = (s * s - pp) * (s * s - tt);
        if den == 0.0 {
            0.0
        } else {
            (correct * s - tp) / den.sqrt()
        }
    }
}

/// Tally predictions against truths over `classes` labels.
pub fn confusion(preds: &[usize], truths: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if preds.len() != truths.len() {
        return Err(MlError::LengthMismatch(preds.len(), truths.len()));
    }
    let mut cm = ConfusionMatrix::new(classes);
    for (&p, &t) in preds.iter().zip(truths) {
        for label in [p, t] {
            if label >= classes {
                return Err(MlError::LabelOutOfRange { label, classes });
            }
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    cm.accuracy()
}

pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    cm.mcc()
}

/// Mean and standard error of the mean; the error is 0 for one sample.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let cm = confusion(&[1, 0, 1, 1], &[1, 0, 0, 1], 2).unwrap();
        assert_eq!(cm.get(0, 1), 1);
        assert_eq!(cm.accuracy(), 0.75);
        // TP=2 TN=1 FP=1 FN=0: (2 - 0) / sqrt(3 * 2 * 2 * 1)
        assert!((cm.mcc() - 2.0 / 12f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_degenerate() {
        let truths = [0, 1, 2, 3, 1, 0];
        let cm = confusion(&truths, &truths, 4).unwrap();
        assert_eq!(cm.accuracy(), 1.0);
        assert!((cm.mcc() - 1.0).abs() < 1e-15);

        let cm = confusion(&[1, 1, 1, 1], &[0, 1, 0, 1], 2).unwrap();
        assert_eq!(cm.mcc(), 0.0);
        assert_eq!(cm.accuracy(), 0.5);
    }

    #[test]
    fn inverted_predictions() {
        let cm = confusion(&[1, 0, 1, 0], &[0, 1, 0, 1], 2).unwrap();
        assert!((cm.mcc() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn multiclass_formula_agrees_for_two_classes() {
        let cm = ConfusionMatrix::from_counts(vec![vec![50, 7], vec![12, 31]]).unwrap();
        let binary = cm.mcc();
        // Evaluate the general formula by hand.
        let (s, c): (f64, f64) = (100.0, 81.0);
        let (t, p): ([f64; 2], [f64; 2]) = ([57.0, 43.0], [62.0, 38.0]);
        let num = c * s - (t[0] * p[0] + t[1] * p[1]);
        let den =
            ((s * s - (p[0] * p[0] + p[1] * p[1])) * (s * s - (t[0] * t[0] + t[1] * t[1]))).sqrt();
        assert!((binary - num / den).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            confusion(&[0], &[0, 1], 2),
            Err(MlError::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            confusion(&[2], &[0], 2),
            Err(MlError::LabelOutOfRange {
                label: 2,
                classes: 2
            })
        ));
    }

    #[test]
    fn stderr() {
        let (m, e) = mean_and_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((e - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
