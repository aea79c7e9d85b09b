//! Ordinary least squares on log-log data.
//!
//! Every decay exponent reported by this crate (ball masses, additive
//! energy, spherical and solid averages, stationary-phase residuals) goes
//! through [`loglog_fit`], so all slopes share the same estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of a straight-line fit `log y = intercept + slope * log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoglogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `log y` against `log x` by least squares.
///
/// Requires at least three points, all coordinates strictly positive and
/// finite, and at least two distinct `x` values.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LoglogFit> {
    if points.len() < 3 {
        return Err(Error::Regression(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::Regression(format!(
                "log-log fit needs strictly positive finite data, got ({x}, {y})"
            )));
        }
        xs.push(x.ln());
        ys.push(y.ln());
    }
    linear_fit(&xs, &ys)
}

/// Plain least-squares line through `(xs[i], ys[i])`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LoglogFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 3 {
        return Err(Error::Regression(format!(
            "need at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let spread = xs.iter().fold(0.0f64, |m, x| m.max((x - mean_x).abs()));
    if sxx <= 0.0 || spread <= 1e-12 * mean_x.abs().max(1.0) {
        return Err(Error::Regression(
            "degenerate abscissae: all x values coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    // a constant response is fitted perfectly by slope 0
    let r_squared = if syy <= f64::EPSILON * nf {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(LoglogFit {
        slope,
        intercept,
        stderr,
        r_squared,
        points: n,
    })
}

/// `count` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_sweep(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 2);
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect()
}
