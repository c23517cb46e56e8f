//! Ordinary least-squares fits of small polynomial models.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y = a x^2 + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub residual_rms: f64,
    pub r_squared: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }
}

/// `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub r_squared: f64,
}

/// Fit `y = a x^2 + b x + c`. Needs at least four points with at least three
/// distinct abscissae.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "quadratic fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    let coef = least_squares(points, 3)?;
    let (residual_rms, r_squared) = goodness(points, |x| (coef[2] * x + coef[1]) * x + coef[0]);
    Ok(QuadraticFit {
        a: coef[2],
        b: coef[1],
        c: coef[0],
        residual_rms,
        r_squared,
    })
}

/// Fit `y = slope x + intercept`. Needs two distinct abscissae.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearFit> {
    let coef = least_squares(points, 2)?;
    let (residual_rms, r_squared) = goodness(points, |x| coef[1] * x + coef[0]);
    Ok(LinearFit {
        slope: coef[1],
        intercept: coef[0],
        residual_rms,
        r_squared,
    })
}

/// Coefficients `[c0, c1, ...]` of the degree `n_coef - 1` polynomial
/// minimising the squared residuals.
fn least_squares(points: &[(f64, f64)], n_coef: usize) -> Result<Vec<f64>> {
    if points
        .iter()
        .any(|(x, y)| !(x.is_finite() && y.is_finite()))
    {
        return Err(Error::InvalidArgument("non-finite data point".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < n_coef {
        return Err(Error::RankDeficient(format!(
            "{} distinct x values for {n_coef} coefficients",
            xs.len()
        )));
    }

    // center and scale x so the Vandermonde columns are well conditioned
    let lo = xs[0];
    let hi = xs[xs.len() - 1];
    let shift = 0.5 * (lo + hi);
    let scale = 0.5 * (hi - lo);
    let design = DMatrix::from_fn(points.len(), n_coef, |r, c| {
        ((points[r].0 - shift) / scale).powi(c as i32)
    });
    let rhs = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let svd = design.svd(true, true);
    let scaled = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;

    // expand sum_k s_k ((x - shift) / scale)^k back into powers of x
    let mut coef = vec![0.0; n_coef];
    for (k, s_k) in scaled.iter().enumerate() {
        let factor = s_k / scale.powi(k as i32);
        for (m, c) in coef.iter_mut().enumerate().take(k + 1) {
            *c += factor * binomial(k, m) as f64 * (-shift).powi((k - m) as i32);
        }
    }
    Ok(coef)
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Residual RMS and coefficient of determination, clamped to `[0, 1]`.
fn goodness(points: &[(f64, f64)], model: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_res: f64 = points.iter().map(|&(x, y)| (y - model(x)).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    ((ss_res / n).sqrt(), r_squared)
}
