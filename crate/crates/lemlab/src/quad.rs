//! Adaptive Simpson quadrature with interval splitting at known awkward
//! points (kinks, integrable singularities).

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrate f over [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut achieved = 0.0;
    let value = simpson_rec(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut achieved);
    if achieved > tol || !value.is_finite() {
        return Err(Error::QuadratureFailure { tol, achieved });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    achieved: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        if depth == 0 {
            *achieved += delta.abs().max(f64::MIN_POSITIVE);
        } else {
            *achieved += delta.abs() / 15.0;
        }
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, achieved)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, achieved)
}

/// Integrate over consecutive subintervals delimited by `points`
/// (strictly increasing), splitting the tolerance evenly.
pub fn adaptive_simpson_split<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("need at least two split points".into()));
    }
    let pieces = points.len() - 1;
    let mut total = 0.0;
    for w in points.windows(2) {
        total += adaptive_simpson(f, w[0], w[1], tol / pieces as f64)?;
    }
    Ok(total)
}
