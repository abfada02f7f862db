use serde::{Deserialize, Serialize};

use super::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::estimation::CsiVector;

/// Two-component PCA model.
///
/// Covariance is the population covariance (divided by the sample count),
/// so duplicating every sample leaves the model unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
    pub eigenvalues: [f64; 2],
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fits the top two principal directions of `rows`.
    ///
    /// Works on whichever of the covariance (`d x d`) or Gram (`n x n`)
    /// matrix is smaller; both share their nonzero spectrum.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<PcaModel> {
        let n = rows.len();
        if n < 3 {
            return Err(Error::invalid(format!("PCA needs at least 3 samples, got {n}")));
        }
        let d = rows[0].as_ref().len();
        if d == 0 {
            return Err(Error::invalid("PCA samples have no features"));
        }
        if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != d) {
            return Err(Error::LengthMismatch {
                expected: d,
                found: bad.as_ref().len(),
            });
        }

        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.as_ref()) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let centered: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().zip(&mean).map(|(x, m)| x - m).collect())
            .collect();

        let (values, mut vectors) = if d <= n {
            let mut cov = vec![0.0; d * d];
            for row in &centered {
                for i in 0..d {
                    let ri = row[i];
                    if ri == 0.0 {
                        continue;
                    }
                    for j in i..d {
                        cov[i * d + j] += ri * row[j];
                    }
                }
            }
            for i in 0..d {
                for j in i..d {
                    let v = cov[i * d + j] / n as f64;
                    cov[i * d + j] = v;
                    cov[j * d + i] = v;
                }
            }
            let (vals, vecs) = symmetric_eigen(&cov, d);
            (vals, vecs.into_iter().take(2).collect::<Vec<_>>())
        } else {
            let mut gram = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = dot(&centered[i], &centered[j]) / n as f64;
                    gram[i * n + j] = v;
                    gram[j * n + i] = v;
                }
            }
            let (vals, vecs) = symmetric_eigen(&gram, n);
            let lifted = vecs
                .iter()
                .take(2)
                .map(|u| {
                    let mut v = vec![0.0; d];
                    for (ui, row) in u.iter().zip(&centered) {
                        for (vj, x) in v.iter_mut().zip(row) {
                            *vj += ui * x;
                        }
                    }
                    v
                })
                .collect();
            (vals, lifted)
        };
        while vectors.len() < 2 {
            vectors.push(vec![0.0; d]);
        }

        let mut first = std::mem::take(&mut vectors[0]);
        let mut second = std::mem::take(&mut vectors[1]);
        if !normalize(&mut first) {
            first = basis_orthogonal_to(&[], d);
        }
        let proj = dot(&second, &first);
        for (s, f) in second.iter_mut().zip(&first) {
            *s -= proj * f;
        }
        if !normalize(&mut second) {
            second = basis_orthogonal_to(&[&first], d);
        }
        fix_sign(&mut first);
        fix_sign(&mut second);

        let eig = |i: usize| values.get(i).copied().unwrap_or(0.0).max(0.0);
        Ok(PcaModel {
            mean,
            components: [first, second],
            eigenvalues: [eig(0), eig(1)],
        })
    }

    pub fn fit_csi(samples: &[CsiVector]) -> Result<PcaModel> {
        let rows: Vec<&[f64]> = samples.iter().map(|s| s.features.as_slice()).collect();
        Self::fit(&rows)
    }

    /// `z = components * (x - mean)`.
    pub fn project(&self, features: &[f64]) -> Result<[f64; 2]> {
        if features.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: features.len(),
            });
        }
        let mut z = [0.0; 2];
        for (zi, comp) in z.iter_mut().zip(&self.components) {
            *zi = features
                .iter()
                .zip(&self.mean)
                .zip(comp)
                .map(|((x, m), c)| (x - m) * c)
                .sum();
        }
        Ok(z)
    }

    pub fn project_csi(&self, sample: &CsiVector) -> Result<[f64; 2]> {
        self.project(&sample.features)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = dot(v, v).sqrt();
    if !(norm > 1e-150) {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

// Degenerate data: complete the basis with the first standard vector that
// survives Gram-Schmidt.
fn basis_orthogonal_to(existing: &[&[f64]], d: usize) -> Vec<f64> {
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        for b in existing {
            let p = dot(&e, b);
            for (x, y) in e.iter_mut().zip(b.iter()) {
                *x -= p * y;
            }
        }
        if normalize(&mut e) {
            return e;
        }
    }
    vec![0.0; d]
}

/// Makes the first non-negligible coordinate positive.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9 * max) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = stream(seed);
        // Anisotropic data so the spectrum has distinct leading values.
        (0..n)
            .map(|_| (0..d).map(|j| rng.gen_range(-1.0..1.0) * (1.0 + j as f64)).collect())
            .collect()
    }

    #[test]
    fn axis_aligned_data() {
        let rows = vec![
            vec![-3.0, 0.5],
            vec![3.0, 0.5],
            vec![-3.0, -0.5],
            vec![3.0, -0.5],
            vec![0.0, 0.0],
        ];
        let m = PcaModel::fit(&rows).unwrap();
        assert!((m.components[0][0] - 1.0).abs() < 1e-12 && m.components[0][1].abs() < 1e-12);
        assert!(m.components[1][0].abs() < 1e-12 && (m.components[1][1] - 1.0).abs() < 1e-12);
        assert!(m.eigenvalues[0] > m.eigenvalues[1]);
    }

    #[test]
    fn duplicated_dataset_gives_same_model() {
        for (n, d) in [(40, 6), (10, 30)] {
            let rows = random_rows(n, d, 5);
            let doubled: Vec<_> = rows.iter().chain(rows.iter()).cloned().collect();
            let a = PcaModel::fit(&rows).unwrap();
            let b = PcaModel::fit(&doubled).unwrap();
            for i in 0..2 {
                assert!((a.eigenvalues[i] - b.eigenvalues[i]).abs() < 1e-10 * a.eigenvalues[0]);
                for (x, y) in a.components[i].iter().zip(&b.components[i]) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
            for (x, y) in a.mean.iter().zip(&b.mean) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_basics() {
        let rows = random_rows(30, 5, 8);
        let m = PcaModel::fit(&rows).unwrap();
        assert_eq!(m.project(&m.mean).unwrap(), [0.0, 0.0]);
        let shifted: Vec<f64> = m.mean.iter().zip(&m.components[0]).map(|(a, b)| a + b).collect();
        let z = m.project(&shifted).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && z[1].abs() < 1e-12);
        let x = &rows[3];
        let z = m.project(x).unwrap();
        for i in 0..2 {
            let mut oracle = 0.0;
            for j in 0..5 {
                oracle += (x[j] - m.mean[j]) * m.components[i][j];
            }
            assert!((z[i] - oracle).abs() < 1e-12);
        }
        assert!(m.project(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn input_guards() {
        assert!(PcaModel::fit(&[vec![1.0], vec![2.0]]).is_err());
        assert!(PcaModel::fit(&[vec![1.0, 2.0], vec![2.0], vec![3.0, 1.0]]).is_err());
    }

    #[test]
    fn degenerate_data_still_orthonormal() {
        let rows = vec![vec![1.0, 2.0, 3.0]; 5];
        let m = PcaModel::fit(&rows).unwrap();
        assert_eq!(m.eigenvalues, [0.0, 0.0]);
        assert!((dot(&m.components[0], &m.components[0]) - 1.0).abs() < 1e-12);
        assert!(dot(&m.components[0], &m.components[1]).abs() < 1e-12);
    }

    #[test]
    fn gram_path_matches_covariance_path() {
        // 8 samples in 12-D goes through the Gram matrix; padding the same
        // data with copies pushes it through the covariance matrix.
        let rows = random_rows(8, 12, 21);
        let gram = PcaModel::fit(&rows).unwrap();
        let padded: Vec<_> = (0..2).flat_map(|_| rows.iter().cloned()).collect();
        let cov = PcaModel::fit(&padded).unwrap();
        for i in 0..2 {
            assert!((gram.eigenvalues[i] - cov.eigenvalues[i]).abs() < 1e-10);
            for (x, y) in gram.components[i].iter().zip(&cov.components[i]) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn orthonormal_and_variance_matches(seed in 0u64..500, n in 5usize..40, d in 2usize..25) {
            let rows = random_rows(n, d, seed);
            let m = PcaModel::fit(&rows).unwrap();
            prop_assert!((dot(&m.components[0], &m.components[0]) - 1.0).abs() < 1e-9);
            prop_assert!((dot(&m.components[1], &m.components[1]) - 1.0).abs() < 1e-9);
            prop_assert!(dot(&m.components[0], &m.components[1]).abs() < 1e-9);
            prop_assert!(m.eigenvalues[0] >= m.eigenvalues[1] && m.eigenvalues[1] >= 0.0);
            for i in 0..2 {
                let var = rows.iter().map(|r| m.project(r).unwrap()[i].powi(2)).sum::<f64>() / n as f64;
                prop_assert!((var - m.eigenvalues[i]).abs() <= 1e-6 * m.eigenvalues[i].max(1e-12));
            }
        }

        #[test]
        fn translation_invariant(seed in 0u64..200, shift in -50.0f64..50.0) {
            let rows = random_rows(20, 6, seed);
            let moved: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| r.iter().enumerate().map(|(j, x)| x + shift * (j as f64 - 2.5)).collect())
                .collect();
            let a = PcaModel::fit(&rows).unwrap();
            let b = PcaModel::fit(&moved).unwrap();
            for (r, s) in rows.iter().zip(&moved) {
                let za = a.project(r).unwrap();
                let zb = b.project(s).unwrap();
                prop_assert!((za[0] - zb[0]).abs() < 1e-9 && (za[1] - zb[1]).abs() < 1e-9);
            }
        }
    }
}
