//! Simple ordinary least squares with classical t-based inference, plus the
//! panel-level helpers that feed it: within-country correlation of two
//! indicators and cross-sectional extraction at a fixed year.

use serde::Serialize;

use crate::comove::pearson;
use crate::error::{Error, Result};
use crate::numeric::student_t_two_sided_p;
use crate::panel::{align_across, CleaningPolicy, CountryCode, TimeSeriesPanel};

/// A fitted line `y = intercept + slope * x` with standard errors and the
/// usual two-sided t-test of zero slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    /// t statistic of the slope; infinite for an exact fit with nonzero
    /// slope.
    pub t_slope: f64,
    /// Two-sided p-value of the zero-slope hypothesis, in `[0, 1]`.
    pub p_slope: f64,
    /// Fraction of variance explained, in `[0, 1]`.
    pub r_squared: f64,
    pub n_obs: usize,
}

/// Fits `y = a + b x` by least squares.
///
/// Needs at least 3 observations (inference uses `n - 2` residual degrees of
/// freedom) and non-constant `x`. An exactly collinear sample is legal:
/// standard errors collapse to zero, `t` goes infinite, and `p` to zero.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { len: n, min: 3 });
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let dx = x[k] - mean_x;
        let dy = y[k] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    {
        let max_abs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = nf * f64::EPSILON * max_abs;
        if sxx <= floor * floor {
            return Err(Error::DegenerateSeries {
                detail: "regressor has (numerically) zero variance".into(),
            });
        }
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    // Explicit residual pass: more robust than syy - slope^2 sxx when the
    // fit is near-exact.
    let mut rss = 0.0;
    for k in 0..n {
        let e = y[k] - intercept - slope * x[k];
        rss += e * e;
    }
    let dof = nf - 2.0;
    let sigma2 = rss / dof;
    let se_slope = (sigma2 / sxx).sqrt();
    let se_intercept = (sigma2 * (1.0 / nf + mean_x * mean_x / sxx)).sqrt();

    let t_slope = if se_slope > 0.0 {
        slope / se_slope
    } else if slope == 0.0 {
        0.0
    } else {
        slope.signum() * f64::INFINITY
    };
    let p_slope = student_t_two_sided_p(t_slope, dof)?;

    let r_squared = if syy > 0.0 {
        (1.0 - rss / syy).clamp(0.0, 1.0)
    } else {
        // Constant response fitted exactly by a flat line.
        1.0
    };

    Ok(RegressionResult {
        slope,
        intercept,
        se_slope,
        se_intercept,
        t_slope,
        p_slope,
        r_squared,
        n_obs: n,
    })
}

/// Correlation between two indicators within one country, on the years both
/// panels observe it.
pub fn cross_indicator_correlation(
    left: &TimeSeriesPanel,
    right: &TimeSeriesPanel,
    country: CountryCode,
    policy: &CleaningPolicy,
) -> Result<f64> {
    let pair = align_across(left, country, right, country, policy)?;
    pearson(&pair.left, &pair.right)
}

/// One year's worth of matched observations across countries: `x` from one
/// panel, `y` from the other, country by country.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub year: i32,
    pub countries: Vec<CountryCode>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Extracts the cross-section at `year`: every country present in both
/// panels with both values observed that year, in `y_panel` row order.
///
/// Fails with the years available in both panels when `year` is absent from
/// either, and with [`Error::InsufficientData`] when fewer than 3 countries
/// have matched observations.
pub fn year_cross_section(
    x_panel: &TimeSeriesPanel,
    y_panel: &TimeSeriesPanel,
    year: i32,
) -> Result<CrossSection> {
    let xi = x_panel.years().iter().position(|&y| y == year);
    let yi = y_panel.years().iter().position(|&y| y == year);
    let (Some(xi), Some(yi)) = (xi, yi) else {
        let available: Vec<i32> = x_panel
            .years()
            .iter()
            .filter(|y| y_panel.years().contains(y))
            .copied()
            .collect();
        return Err(Error::YearUnavailable { year, available });
    };

    let mut countries = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (ci, code) in y_panel.countries().iter().enumerate() {
        let Some(xc) = x_panel.country_index(*code) else {
            continue;
        };
        if let (Some(xv), Some(yv)) = (x_panel.get(xc, xi), y_panel.get(ci, yi)) {
            countries.push(*code);
            xs.push(xv);
            ys.push(yv);
        }
    }
    if countries.len() < 3 {
        return Err(Error::InsufficientData {
            detail: format!(
                "only {} countries have both indicators in {year} (minimum 3)",
                countries.len()
            ),
        });
    }
    Ok(CrossSection {
        year,
        countries,
        x: xs,
        y: ys,
    })
}
