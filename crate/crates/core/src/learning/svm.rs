//! Soft-margin SVM trained by SMO, combined one-vs-one for multi-class.
//!
//! The binary solver follows the LIBSVM formulation: it minimizes
//! `1/2 a'Qa - e'a` subject to `0 <= a_i <= C` and `y'a = 0`, picking the
//! working pair by maximal violation with second-order gain. It stops once
//! the maximal KKT violation `m(a) - M(a)` drops below the tolerance.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &Point, b: &Point) -> f64 {
        match *self {
            Kernel::Linear => a[0] * b[0] + a[1] * b[1],
            Kernel::Rbf { gamma } => {
                let d0 = a[0] - b[0];
                let d1 = a[1] - b[1];
                (-gamma * (d0 * d0 + d1 * d1)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmParams {
    /// Box constraint.
    pub c: f64,
    pub kernel: Kernel,
    /// KKT violation tolerance at which SMO stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 10.0,
            kernel: Kernel::Linear,
            tolerance: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid(format!("SVM C must be positive, got {}", self.c)));
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::invalid(format!("RBF gamma must be positive, got {gamma}")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("SVM tolerance must be positive"));
        }
        Ok(())
    }
}

/// One binary machine separating `classes[positive]` (+1) from
/// `classes[negative]` (-1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub positive: usize,
    pub negative: usize,
    pub points: Vec<Point>,
    /// +1 / -1 per training point.
    pub labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BinaryMachine {
    /// `f(x) = sum_i a_i y_i K(x_i, x) + b`.
    pub fn decision(&self, x: &Point) -> f64 {
        self.points
            .iter()
            .zip(&self.labels)
            .zip(&self.alphas)
            .filter(|(_, &a)| a > 0.0)
            .map(|((p, y), a)| a * y * self.kernel.eval(p, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn support_vector_count(&self) -> usize {
        self.alphas.iter().filter(|&&a| a > 0.0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<String>,
    pub machines: Vec<BinaryMachine>,
    pub params: SvmParams,
}

/// Trains a binary machine with SMO.
pub fn train_binary(
    points: &[Point],
    labels: &[f64],
    params: &SvmParams,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let n = points.len();
    if n != labels.len() {
        return Err(Error::LengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let c = params.c;
    let kernel = params.kernel;
    let k: Vec<f64> = (0..n * n)
        .map(|idx| kernel.eval(&points[idx / n], &points[idx % n]))
        .collect();
    let kij = |i: usize, j: usize| k[i * n + j];

    let y = labels;
    let mut alpha = vec![0.0; n];
    // Gradient of the dual objective.
    let mut grad = vec![-1.0; n];

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iterations {
        // i: maximal violator in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_gain = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = kij(i, i) + kij(t, t) - 2.0 * kij(i, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let gain = -(b * b) / a;
                    if gain < best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if gmax - gmin < params.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let mut quad = kij(i, i) + kij(j, j) - 2.0 * kij(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = alpha[i] - old_ai;
        let dj = alpha[j] - old_aj;
        // Q_ts = y_t y_s K_ts
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kij(t, i) * di + y[j] * kij(t, j) * dj);
        }
    }

    // Bias: average over free vectors, else the midpoint of the feasible range.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += yg;
            free_count += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok((alpha, -rho, iterations, converged))
}

/// Trains one binary machine per class pair. Classes are ordered by name.
pub fn svm_train(points: &[Point], labels: &[String], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    if points.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            found: labels.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::invalid(format!("non-finite training point {p:?}")));
    }
    let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "SVM needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    let class_of: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label is in class list"))
        .collect();
    for (ci, name) in classes.iter().enumerate() {
        let count = class_of.iter().filter(|&&c| c == ci).count();
        if count < 2 {
            return Err(Error::invalid(format!(
                "class `{name}` has {count} training point(s); at least 2 required"
            )));
        }
    }

    let mut machines = Vec::with_capacity(classes.len() * (classes.len() - 1) / 2);
    for pos in 0..classes.len() {
        for neg in (pos + 1)..classes.len() {
            let mut pts = Vec::new();
            let mut ys = Vec::new();
            for (p, &c) in points.iter().zip(&class_of) {
                if c == pos {
                    pts.push(*p);
                    ys.push(1.0);
                } else if c == neg {
                    pts.push(*p);
                    ys.push(-1.0);
                }
            }
            let (alphas, bias, iterations, converged) = train_binary(&pts, &ys, params)?;
            machines.push(BinaryMachine {
                positive: pos,
                negative: neg,
                points: pts,
                labels: ys,
                alphas,
                bias,
                kernel: params.kernel,
                c: params.c,
                iterations,
                converged,
            });
        }
    }
    Ok(SvmModel {
        classes,
        machines,
        params: *params,
    })
}

/// One-vs-one majority vote.
///
/// Ties go to the class with the largest summed |decision| over the
/// machines it won, then to the earlier class in `model.classes`.
pub fn svm_predict(model: &SvmModel, point: &Point) -> Result<String> {
    predict_index(model, point).map(|i| model.classes[i].clone())
}

pub fn predict_index(model: &SvmModel, point: &Point) -> Result<usize> {
    let k = model.classes.len();
    if k < 2 || model.machines.len() != k * (k - 1) / 2 {
        return Err(Error::invalid("SVM model is not trained"));
    }
    let mut votes = vec![0usize; k];
    let mut margin = vec![0.0f64; k];
    for m in &model.machines {
        let d = m.decision(point);
        let winner = if d >= 0.0 { m.positive } else { m.negative };
        votes[winner] += 1;
        margin[winner] += d.abs();
    }
    let best = (0..k)
        .max_by(|&a, &b| {
            votes[a]
                .cmp(&votes[b])
                .then(margin[a].total_cmp(&margin[b]))
                .then(b.cmp(&a))
        })
        .expect("k >= 2");
    Ok(best)
}
