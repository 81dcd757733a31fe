//! Numerical support routines: adaptive quadrature and Student-t tails.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Integrates `f` over `[a, b]` by adaptive Simpson bisection until the
/// local error estimate is within `tol` (absolute, Richardson `delta/15`
/// criterion), or fails once an interval exhausts `max_depth` bisections.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    refine(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (fl, fr) = (f(lm), f(rm));
    let left = simpson(a, m, fa, fl, fm);
    let right = simpson(m, b, fm, fr, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailed {
            detail: format!(
                "interval [{a:e}, {b:e}] still has error estimate {:e} after max bisections",
                delta.abs() / 15.0
            ),
        });
    }
    let half = 0.5 * tol;
    Ok(refine(f, a, m, fa, fl, fm, left, half, depth - 1)?
        + refine(f, m, b, fm, fr, fb, right, half, depth - 1)?)
}

/// CDF of Student's t distribution with `dof > 0` degrees of freedom,
/// computed through the regularized incomplete beta function.
pub fn student_t_cdf(t: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0 && dof.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "dof",
            value: dof,
            domain: "(0, inf)",
        });
    }
    if t.is_nan() {
        return Err(Error::OutOfDomain {
            what: "t",
            value: t,
            domain: "finite or infinite reals",
        });
    }
    // One-sided tail through I_x(dof/2, 1/2) with x = dof / (dof + t^2);
    // x -> 0 as |t| -> inf, so infinite t is fine.
    let x = dof / (dof + t * t);
    let half_tail = 0.5 * beta_reg(0.5 * dof, 0.5, x);
    Ok(if t >= 0.0 { 1.0 - half_tail } else { half_tail })
}

/// Two-sided p-value P(|T| >= |t|) for Student's t with `dof > 0`.
pub fn student_t_two_sided_p(t: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0 && dof.is_finite()) {
        return Err(Error::OutOfDomain {
            what: "dof",
            value: dof,
            domain: "(0, inf)",
        });
    }
    if t.is_nan() {
        return Err(Error::OutOfDomain {
            what: "t",
            value: t,
            domain: "finite or infinite reals",
        });
    }
    // 2 * SF(|t|) collapses to a single incomplete-beta evaluation.
    let x = dof / (dof + t * t);
    Ok(beta_reg(0.5 * dof, 0.5, x).clamp(0.0, 1.0))
}
