use serde::{Deserialize, Serialize};

use super::pca::PcaModel;
use super::svm::{predict_index, Point, SvmModel};
use crate::error::{Error, Result};
use crate::estimation::CsiVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub classes: Vec<String>,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub per_class_recall: Vec<f64>,
    pub total: u64,
}

impl AccuracyReport {
    /// Tallies class-index pairs into a report.
    pub fn from_indices(classes: Vec<String>, pairs: &[(usize, usize)]) -> Result<AccuracyReport> {
        if pairs.is_empty() {
            return Err(Error::invalid("empty test set"));
        }
        let k = classes.len();
        let mut confusion = vec![vec![0u64; k]; k];
        for &(t, p) in pairs {
            if t >= k || p >= k {
                return Err(Error::invalid(format!("class index out of range: ({t}, {p})")));
            }
            confusion[t][p] += 1;
        }
        let total = pairs.len() as u64;
        let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let per_class_recall = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: u64 = row.iter().sum();
                if n == 0 {
                    0.0
                } else {
                    row[i] as f64 / n as f64
                }
            })
            .collect();
        Ok(AccuracyReport {
            classes,
            accuracy: correct as f64 / total as f64,
            confusion,
            per_class_recall,
            total,
        })
    }
}

/// Projects each test vector with the frozen PCA model, classifies it and
/// tallies the confusion matrix.
pub fn evaluate_accuracy(
    model: &SvmModel,
    pca: &PcaModel,
    test: &[CsiVector],
) -> Result<AccuracyReport> {
    if test.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    let pairs = test
        .iter()
        .map(|s| {
            let label = s.label.to_string();
            let truth = model
                .classes
                .iter()
                .position(|c| *c == label)
                .ok_or_else(|| Error::invalid(format!("test label `{label}` unknown to the model")))?;
            let z = pca.project_csi(s)?;
            Ok((truth, predict_index(model, &z)?))
        })
        .collect::<Result<Vec<_>>>()?;
    AccuracyReport::from_indices(model.classes.clone(), &pairs)
}

/// Mean silhouette coefficient with Euclidean distance.
///
/// Points in singleton clusters contribute 0. Returns 0 when fewer than two
/// clusters are present.
pub fn silhouette_score(points: &[Point], labels: &[usize]) -> f64 {
    assert_eq!(points.len(), labels.len());
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return 0.0;
    }
    let dist = |a: &Point, b: &Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let own = labels[i];
        if sizes[own] <= 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for (j, q) in points.iter().enumerate() {
            if i != j {
                sums[labels[j]] += dist(p, q);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn perfect_predictions() {
        let pairs = [(0, 0), (1, 1), (2, 2), (1, 1)];
        let r = AccuracyReport::from_indices(names(3), &pairs).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        assert_eq!(r.per_class_recall, vec![1.0; 3]);
    }

    #[test]
    fn rows_sum_to_class_counts() {
        let pairs = [(0, 1), (0, 0), (1, 1), (2, 0), (2, 2), (2, 2)];
        let r = AccuracyReport::from_indices(names(3), &pairs).unwrap();
        let rows: Vec<u64> = r.confusion.iter().map(|row| row.iter().sum()).collect();
        assert_eq!(rows, vec![2, 1, 3]);
        let trace: u64 = (0..3).map(|i| r.confusion[i][i]).sum();
        assert_eq!(r.accuracy, trace as f64 / 6.0);
        assert_eq!(r.per_class_recall[2], 2.0 / 3.0);
        assert!(AccuracyReport::from_indices(names(3), &[]).is_err());
        assert!(AccuracyReport::from_indices(names(3), &[(3, 0)]).is_err());
    }

    #[test]
    fn silhouette_reference_values() {
        // Two tight pairs far apart: a = 1, b = 10 or so.
        let pts = [[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]];
        let s = silhouette_score(&pts, &[0, 0, 1, 1]);
        // Point 0: a = 1, b = (10 + 11) / 2 = 10.5 -> 0.904762
        // Point 1: a = 1, b = (9 + 10) / 2 = 9.5  -> 0.894737
        let expect = (2.0 * (1.0 - 1.0 / 10.5) + 2.0 * (1.0 - 1.0 / 9.5)) / 4.0;
        assert!((s - expect).abs() < 1e-12);
        assert_eq!(silhouette_score(&pts, &[0, 0, 0, 0]), 0.0);
    }
}
