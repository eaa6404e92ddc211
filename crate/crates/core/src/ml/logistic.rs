//! L2-regularized logistic regression fit by gradient descent with Armijo
//! backtracking. Columns are standardized internally; the intercept is not
//! penalized.

use serde::{Deserialize, Serialize};

use super::{sigmoid, Matrix, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub l2: f64,
    pub max_iter: usize,
    /// Converged once the gradient norm drops below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 0.01,
            max_iter: 2000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    /// Weights on the raw (unstandardized) features.
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Weights on standardized features, used for importance.
    pub standardized_weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl Logistic {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log-loss plus `l2/2 ||w||²`, with its gradient in `w` and `b`.
pub fn objective_and_gradient(x: &Matrix, y: &[u8], w: &[f64], b: f64, l2: f64) -> (f64, Vec<f64>, f64) {
    let n = x.rows().max(1) as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let z = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        let yi = y[i] as f64;
        loss += softplus(z) - yi * z;
        let d = sigmoid(z) - yi;
        gb += d;
        gw.iter_mut().zip(row).for_each(|(g, a)| *g += d * a);
    }
    let reg: f64 = w.iter().map(|v| v * v).sum::<f64>() * l2 / 2.0;
    gw.iter_mut().zip(w).for_each(|(g, v)| *g = *g / n + l2 * v);
    (loss / n + reg, gw, gb / n)
}

pub fn fit_logistic(ts: &TrainingSet<'_>, params: &LogisticParams) -> (Logistic, Vec<f64>) {
    let (n, p) = (ts.x.rows(), ts.x.cols());
    let mut mean = vec![0.0; p];
    let mut scale = vec![0.0; p];
    for j in 0..p {
        let col = ts.x.column(j);
        let m = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        mean[j] = m;
        scale[j] = if var > 0.0 { var.sqrt() } else { 0.0 };
    }
    let mut z = Matrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            if scale[j] > 0.0 {
                z.set(i, j, (ts.x.get(i, j) - mean[j]) / scale[j]);
            }
        }
    }

    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let (mut f, mut gw, mut gb) = objective_and_gradient(&z, ts.y, &w, b, params.l2);
    let mut step: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        let gnorm2 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if gnorm2.sqrt() < params.tol {
            converged = true;
            break;
        }
        iterations += 1;
        step = (step * 2.0).min(1e3);
        loop {
            let w_new: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - step * g).collect();
            let b_new = b - step * gb;
            let (f_new, gw_new, gb_new) = objective_and_gradient(&z, ts.y, &w_new, b_new, params.l2);
            if f_new <= f - 1e-4 * step * gnorm2 {
                (w, b, f, gw, gb) = (w_new, b_new, f_new, gw_new, gb_new);
                break;
            }
            step /= 2.0;
            if step < 1e-16 {
                break;
            }
        }
        if step < 1e-16 {
            break;
        }
    }
    if !converged {
        tracing::warn!(iterations, "logistic regression did not converge");
    }

    let weights: Vec<f64> = (0..p).map(|j| if scale[j] > 0.0 { w[j] / scale[j] } else { 0.0 }).collect();
    let intercept = b - (0..p).map(|j| weights[j] * mean[j]).sum::<f64>();
    let importance = w.iter().map(|v| v.abs()).collect();
    (
        Logistic {
            weights,
            intercept,
            standardized_weights: w,
            converged,
            iterations,
        },
        importance,
    )
}
