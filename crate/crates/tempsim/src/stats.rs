//! Ordinary least squares and small statistics helpers.

use crate::error::{Error, Result};

/// Result of a straight-line fit y = slope·x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Adjusted R² = 1 − (1−R²)(N−1)/(N−2).
    pub adj_r_squared: f64,
}

/// Ordinary least squares over (x, y) pairs.
///
/// Requires at least 3 points with a non-degenerate spread in x so the
/// adjusted R² denominator (N−2) is meaningful.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Input(format!(
            "linear fit needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for &(x, y) in points {
        sx += x;
        sy += y;
    }
    let mx = sx / nf;
    let my = sy / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::Input(
            "linear fit design is singular: all x values identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // All-equal y values: the fit is exact, define R² = 1.
    let r_squared = if syy <= 0.0 {
        1.0
    } else {
        let ss_res = syy - slope * sxy;
        1.0 - (ss_res / syy).max(0.0)
    };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (nf - 1.0) / (nf - 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        adj_r_squared,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (N−1 denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// Median of a slice (not required to be sorted).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
