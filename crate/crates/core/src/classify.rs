//! One-vs-rest ridge regression classifier with leave-one-out selection of λ.
//!
//! With the centred, standardised design `X` and its symmetric
//! eigendecomposition `X Xᵀ = U diag(s) Uᵀ`, the ridge hat matrix for λ is
//! `H = 1/n + U diag(s/(s+λ)) Uᵀ` (the first term is the intercept), so the
//! leave-one-out residuals `(y - ŷ)/(1 - H_ii)` cost `O(n²)` per λ after a
//! single `O(n³)` decomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Features with a training standard deviation below this get scale 1.
pub const SCALE_EPSILON: f64 = 1e-12;

/// `10^(-3 + 6k/9)` for `k = 0..9`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-3.0 + 6.0 * f64::from(k) / 9.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub classes: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Row-major `n_features × n_classes`.
    pub weights: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub lambda: f64,
    /// Mean squared leave-one-out residual per grid value.
    pub loo_errors: Vec<(f64, f64)>,
}

/// Training design: rows are samples.
struct Design {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
    y_mean: Vec<f64>,
    classes: Vec<String>,
}

fn prepare(rows: &[Vec<f64>], labels: &[String]) -> Result<Design> {
    let n = rows.len();
    if n != labels.len() {
        return Err(Error::LengthMismatch(n, labels.len()));
    }
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(Error::EmptyFeatures);
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::ShapeMismatch {
            expected: m,
            got: bad.len(),
        });
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }

    let mut means = vec![0.0; m];
    for r in rows {
        for (mu, v) in means.iter_mut().zip(r) {
            *mu += v;
        }
    }
    means.iter_mut().for_each(|mu| *mu /= n as f64);
    let mut scales = vec![0.0; m];
    for r in rows {
        for ((s, v), mu) in scales.iter_mut().zip(r).zip(&means) {
            *s += (v - mu).powi(2);
        }
    }
    for s in &mut scales {
        let sd = (*s / n as f64).sqrt();
        *s = if sd < SCALE_EPSILON { 1.0 } else { sd };
    }
    let x = DMatrix::from_fn(n, m, |i, j| (rows[i][j] - means[j]) / scales[j]);

    let c = classes.len();
    let mut y = DMatrix::from_fn(n, c, |i, k| if labels[i] == classes[k] { 1.0 } else { -1.0 });
    let y_mean: Vec<f64> = (0..c).map(|k| y.column(k).mean()).collect();
    for (k, mu) in y_mean.iter().enumerate() {
        y.column_mut(k).add_scalar_mut(-mu);
    }
    Ok(Design {
        x,
        y,
        means,
        scales,
        y_mean,
        classes,
    })
}

/// Mean squared LOO residual for every λ, from the closed form.
fn loo_errors(x: &DMatrix<f64>, y: &DMatrix<f64>, grid: &[f64]) -> Vec<f64> {
    let n = y.nrows();
    if n < 2 {
        return vec![f64::NAN; grid.len()];
    }
    // Orthonormal basis of the complement of the constant vector: columns
    // 2..n of the Householder reflection sending e_1 to 1/sqrt(n). Working in
    // this basis keeps 1 - h_ii a sum of positive terms even when the centred
    // Gram matrix is rank deficient.
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    v[0] -= 1.0;
    let vv = v.norm_squared();
    let q = DMatrix::from_fn(n, n - 1, |i, j| {
        let e = if i == j + 1 { 1.0 } else { 0.0 };
        e - 2.0 * v[i] * v[j + 1] / vv
    });
    let qx = q.transpose() * x;
    let eig = SymmetricEigen::new(&qx * qx.transpose());
    let u = &q * &eig.eigenvectors;
    let s: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let uty = u.transpose() * y;
    let r = n - 1;
    grid.iter()
        .map(|&lambda| {
            let keep: Vec<f64> = s.iter().map(|&si| lambda / (si + lambda)).collect();
            let mut total = 0.0;
            for i in 0..n {
                let one_minus_h: f64 = (0..r).map(|j| u[(i, j)] * u[(i, j)] * keep[j]).sum();
                for k in 0..y.ncols() {
                    // y is centred, so its residual lies in the same subspace
                    let resid: f64 = (0..r).map(|j| u[(i, j)] * keep[j] * uty[(j, k)]).sum();
                    let e = resid / one_minus_h;
                    total += e * e;
                }
            }
            total / (n * y.ncols()) as f64
        })
        .collect()
}

fn solve_weights(x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let (n, m) = x.shape();
    if m <= n {
        let mut gram = x.transpose() * x;
        for j in 0..m {
            gram[(j, j)] += lambda;
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Solve("feature Gram matrix is not positive definite".into()))?;
        Ok(chol.solve(&(x.transpose() * y)))
    } else {
        // dual form: W = Xᵀ (X Xᵀ + λI)⁻¹ Y
        let mut kernel = x * x.transpose();
        for i in 0..n {
            kernel[(i, i)] += lambda;
        }
        let chol = kernel
            .cholesky()
            .ok_or_else(|| Error::Solve("sample Gram matrix is not positive definite".into()))?;
        Ok(x.transpose() * chol.solve(y))
    }
}

impl RidgeModel {
    /// Fits with λ chosen from `grid` by leave-one-out error; ties keep the
    /// smaller λ.
    pub fn fit(rows: &[Vec<f64>], labels: &[String], grid: &[f64]) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidConfig("λ grid must be nonempty and positive".into()));
        }
        let d = prepare(rows, labels)?;
        let errors = loo_errors(&d.x, &d.y, grid);
        let mut best = 0;
        for (i, e) in errors.iter().enumerate() {
            if *e < errors[best] {
                best = i;
            }
        }
        Self::fit_design(d, grid[best], grid.iter().copied().zip(errors).collect())
    }

    /// Fits with a fixed λ.
    pub fn fit_lambda(rows: &[Vec<f64>], labels: &[String], lambda: f64) -> Result<Self> {
        let d = prepare(rows, labels)?;
        Self::fit_design(d, lambda, Vec::new())
    }

    fn fit_design(d: Design, lambda: f64, loo_errors: Vec<(f64, f64)>) -> Result<Self> {
        let w = solve_weights(&d.x, &d.y, lambda)?;
        Ok(Self {
            classes: d.classes,
            means: d.means,
            scales: d.scales,
            weights: flatten(&w),
            intercepts: d.y_mean,
            lambda,
            loo_errors,
        })
    }

    pub fn n_features(&self) -> usize {
        self.means.len()
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let c = self.classes.len();
        let mut out = self.intercepts.clone();
        for (j, v) in row.iter().enumerate() {
            let z = (v - self.means[j]) / self.scales[j];
            for (k, o) in out.iter_mut().enumerate() {
                *o += z * self.weights[j * c + k];
            }
        }
        out
    }

    /// Argmax of the class scores; ties go to the earlier class.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<String>> {
        if let Some(bad) = rows.iter().find(|r| r.len() != self.n_features()) {
            return Err(Error::ShapeMismatch {
                expected: self.n_features(),
                got: bad.len(),
            });
        }
        Ok(rows
            .par_iter()
            .map(|r| {
                let scores = self.scores(r);
                let mut best = 0;
                for (k, s) in scores.iter().enumerate() {
                    if *s > scores[best] {
                        best = k;
                    }
                }
                self.classes[best].clone()
            })
            .collect())
    }
}

pub fn accuracy(predicted: &[String], actual: &[String]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch(predicted.len(), actual.len()));
    }
    if actual.is_empty() {
        return Ok(0.0);
    }
    let hits = predicted.iter().zip(actual).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / actual.len() as f64)
}

/// Closed-form LOO errors for each λ, exposed for cross-checking.
pub fn loo_errors_closed_form(rows: &[Vec<f64>], labels: &[String], grid: &[f64]) -> Result<Vec<f64>> {
    let d = prepare(rows, labels)?;
    Ok(loo_errors(&d.x, &d.y, grid))
}

/// LOO errors by refitting `n` times with one sample held out. Features are
/// standardised once on the full set, as in the closed form.
pub fn loo_errors_explicit(rows: &[Vec<f64>], labels: &[String], grid: &[f64]) -> Result<Vec<f64>> {
    let d = prepare(rows, labels)?;
    let n = rows.len();
    let std_rows: Vec<Vec<f64>> = (0..n).map(|i| d.x.row(i).iter().copied().collect()).collect();
    grid.iter()
        .map(|&lambda| {
            let mut total = 0.0;
            for i in 0..n {
                let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                let tr_rows: Vec<Vec<f64>> = keep.iter().map(|&j| std_rows[j].clone()).collect();
                let tr_labels: Vec<String> = keep.iter().map(|&j| labels[j].clone()).collect();
                let model = fit_unscaled(&tr_rows, &tr_labels, &d.classes, lambda)?;
                let scores = model.scores(&std_rows[i]);
                for (k, c) in d.classes.iter().enumerate() {
                    let target = if &labels[i] == c { 1.0 } else { -1.0 };
                    total += (target - scores[k]).powi(2);
                }
            }
            Ok(total / (n * d.classes.len()) as f64)
        })
        .collect()
}

/// Ridge with intercept against a fixed class list; features are centred but
/// not rescaled.
fn fit_unscaled(rows: &[Vec<f64>], labels: &[String], classes: &[String], lambda: f64) -> Result<RidgeModel> {
    let n = rows.len();
    let m = rows[0].len();
    let means: Vec<f64> = (0..m).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, m, |i, j| rows[i][j] - means[j]);
    let c = classes.len();
    let mut y = DMatrix::from_fn(n, c, |i, k| if labels[i] == classes[k] { 1.0 } else { -1.0 });
    let y_mean: Vec<f64> = (0..c).map(|k| y.column(k).mean()).collect();
    for (k, mu) in y_mean.iter().enumerate() {
        y.column_mut(k).add_scalar_mut(-mu);
    }
    let w = solve_weights(&x, &y, lambda)?;
    Ok(RidgeModel {
        classes: classes.to_vec(),
        means,
        scales: vec![1.0; m],
        weights: flatten(&w),
        intercepts: y_mean,
        lambda,
        loo_errors: Vec::new(),
    })
}

fn flatten(w: &DMatrix<f64>) -> Vec<f64> {
    let (m, c) = w.shape();
    (0..m).flat_map(|j| (0..c).map(move |k| w[(j, k)])).collect()
}
