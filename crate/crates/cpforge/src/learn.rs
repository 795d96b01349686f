//! Linear classification under proper symmetric losses with L2
//! regularization: full-batch gradient descent with backtracking line search,
//! k-fold cross validation, empirical risks and 0/1 error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Differentiable proper symmetric surrogate losses, normalized so that
/// `phi(0) = 1 >= 1_{z <= 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// `log2(1 + exp(-z))`
    Logistic,
    /// `(1 - z)^2`
    Square,
}

impl Loss {
    pub fn value(self, z: f64) -> f64 {
        match self {
            Loss::Logistic => {
                // numerically stable log1p(exp(-z)) / ln 2
                if z > 0.0 {
                    (-z).exp().ln_1p() / std::f64::consts::LN_2
                } else {
                    (-z + z.exp().ln_1p()) / std::f64::consts::LN_2
                }
            }
            Loss::Square => (1.0 - z) * (1.0 - z),
        }
    }

    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Loss::Logistic => {
                let s = if z > 0.0 {
                    (-z).exp() / (1.0 + (-z).exp())
                } else {
                    1.0 / (1.0 + z.exp())
                };
                -s / std::f64::consts::LN_2
            }
            Loss::Square => -2.0 * (1.0 - z),
        }
    }

    pub fn parse(name: &str) -> Result<Loss> {
        match name {
            "logistic" => Ok(Loss::Logistic),
            "square" => Ok(Loss::Square),
            other => Err(Error::data(format!("unknown loss '{}'", other))),
        }
    }
}

/// Linear classifier `h(x) = theta^T x + b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub loss: Loss,
    /// False when gradient descent hit the iteration cap before reaching the
    /// gradient tolerance.
    pub converged: bool,
}

impl LinearModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut s = self.intercept;
        for (w, v) in self.weights.iter().zip(x) {
            s += w * v;
        }
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<LinearModel> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Training configuration. Defaults match the experimental protocol: L2
/// penalty on the weights only, intercept unregularized, deterministic start
/// at zero.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub fit_intercept: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 0.0,
            max_iter: 10_000,
            tol: 1e-8,
            fit_intercept: true,
        }
    }
}

/// Minimizes `(1/m) sum_i phi(y_i (theta^T x_i + b)) + lambda ||theta||^2`
/// by full-batch gradient descent with backtracking line search. Stops when
/// the gradient infinity-norm drops below `tol`; otherwise returns the model
/// with `converged == false`.
pub fn train(ds: &Dataset, loss: Loss, cfg: TrainConfig) -> Result<LinearModel> {
    if cfg.lambda < 0.0 {
        return Err(Error::data("lambda must be non-negative"));
    }
    let m = ds.m();
    let d = ds.d();
    let minv = 1.0 / m as f64;

    let mut theta = vec![0.0; d];
    let mut intercept = 0.0;

    let objective = |theta: &[f64], b: f64| -> f64 {
        let mut risk = 0.0;
        for i in 0..m {
            let mut s = b;
            let row = ds.row(i);
            for j in 0..d {
                s += theta[j] * row[j];
            }
            risk += loss.value(ds.label(i) as f64 * s);
        }
        let l2: f64 = theta.iter().map(|w| w * w).sum();
        risk * minv + cfg.lambda * l2
    };

    let gradient = |theta: &[f64], b: f64, g: &mut Vec<f64>, gb: &mut f64| {
        g.iter_mut().for_each(|v| *v = 0.0);
        *gb = 0.0;
        for i in 0..m {
            let row = ds.row(i);
            let y = ds.label(i) as f64;
            let mut s = b;
            for j in 0..d {
                s += theta[j] * row[j];
            }
            let gphi = loss.derivative(y * s) * y;
            for j in 0..d {
                g[j] += gphi * row[j];
            }
            *gb += gphi;
        }
        for j in 0..d {
            g[j] = g[j] * minv + 2.0 * cfg.lambda * theta[j];
        }
        *gb *= minv;
        if !cfg.fit_intercept {
            *gb = 0.0;
        }
    };

    let mut g = vec![0.0; d];
    let mut gb = 0.0;
    let mut step = 1.0_f64;
    let mut converged = false;
    let mut obj = objective(&theta, intercept);

    for _ in 0..cfg.max_iter {
        gradient(&theta, intercept, &mut g, &mut gb);
        let gnorm = g
            .iter()
            .chain(std::iter::once(&gb))
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if gnorm <= cfg.tol {
            converged = true;
            break;
        }
        let gsq: f64 = g.iter().map(|v| v * v).sum::<f64>() + gb * gb;
        // Armijo backtracking, growing the step back after successes.
        step = (step * 2.0).min(1e6);
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gj)| t - step * gj).collect();
            let cand_b = intercept - step * gb;
            let cand_obj = objective(&cand, cand_b);
            if cand_obj <= obj - 1e-4 * step * gsq {
                theta = cand;
                intercept = cand_b;
                obj = cand_obj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // line search exhausted: gradient direction no longer improves at
            // representable step sizes
            converged = gnorm <= 1e-6;
            break;
        }
    }

    Ok(LinearModel {
        weights: theta,
        intercept,
        lambda: cfg.lambda,
        loss,
        converged,
    })
}

/// Empirical phi-risk `(1/m) sum_i phi(y_i h(x_i))` (no penalty term).
pub fn phi_risk(model: &LinearModel, ds: &Dataset, loss: Loss) -> f64 {
    let mut acc = 0.0;
    for i in 0..ds.m() {
        acc += loss.value(ds.label(i) as f64 * model.score(ds.row(i)));
    }
    acc / ds.m() as f64
}

/// Empirical 0/1 error with the convention `1_{z <= 0}`: a score of exactly
/// zero counts as an error.
pub fn zero_one_error(model: &LinearModel, ds: &Dataset) -> f64 {
    let mut err = 0usize;
    for i in 0..ds.m() {
        if ds.label(i) as f64 * model.score(ds.row(i)) <= 0.0 {
            err += 1;
        }
    }
    err as f64 / ds.m() as f64
}

/// The default cross-validation grid `{1e-5, ..., 1e4}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-5..=4).map(|e| 10f64.powi(e)).collect()
}

/// Picks the lambda with the lowest mean validation 0/1 error by stratified
/// k-fold cross validation; ties go to the smaller lambda.
pub fn cross_validate(ds: &Dataset, loss: Loss, grid: &[f64], folds: usize) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::data("empty lambda grid"));
    }
    if folds < 2 {
        return Err(Error::data("need at least 2 folds"));
    }
    if ds.m() < folds {
        return Err(Error::data(format!("m={} is smaller than {} folds", ds.m(), folds)));
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }

    // stratified deterministic folds: round-robin within the class-sorted order
    let fold_of: Vec<usize> = {
        let mut f = vec![0usize; ds.m()];
        for (k, i) in ds.class_range(true).enumerate() {
            f[i] = k % folds;
        }
        for (k, i) in ds.class_range(false).enumerate() {
            f[i] = k % folds;
        }
        f
    };

    let mut sorted_grid = grid.to_vec();
    sorted_grid.sort_by(f64::total_cmp);

    let mut best_lambda = sorted_grid[0];
    let mut best_err = f64::INFINITY;
    for &lambda in &sorted_grid {
        let mut total_err = 0.0;
        let mut total_n = 0usize;
        for fold in 0..folds {
            let train_idx: Vec<usize> = (0..ds.m()).filter(|&i| fold_of[i] != fold).collect();
            let val_idx: Vec<usize> = (0..ds.m()).filter(|&i| fold_of[i] == fold).collect();
            if val_idx.is_empty() {
                continue;
            }
            // a fold may lose one class entirely on tiny datasets; skip it
            let tr = match ds.subset(&train_idx) {
                Ok(tr) => tr,
                Err(_) => continue,
            };
            let model = train(
                &tr,
                loss,
                TrainConfig {
                    lambda,
                    max_iter: 2_000,
                    tol: 1e-6,
                    fit_intercept: true,
                },
            )?;
            for &i in &val_idx {
                if ds.label(i) as f64 * model.score(ds.row(i)) <= 0.0 {
                    total_err += 1.0;
                }
            }
            total_n += val_idx.len();
        }
        if total_n == 0 {
            continue;
        }
        let mean_err = total_err / total_n as f64;
        if mean_err < best_err - 1e-12 {
            best_err = mean_err;
            best_lambda = lambda;
        }
    }
    Ok(best_lambda)
}
