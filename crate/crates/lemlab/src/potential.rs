//! Closed-form logarithmic potentials and Cauchy transforms for the two
//! ensembles, moment functionals by adaptive quadrature, and an empirical
//! CLT diagnostic for normalized log-sums.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{sample_polynomial, EnsembleFamily, EnsembleSpec, SeedPolicy};
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, adaptive_simpson_split};

const QUAD_TOL: f64 = 1e-8;

/// U for the uniform measure on the circle of radius r:
/// log|z| outside, log r inside.
pub fn potential_circle(z: Complex64, r: f64) -> f64 {
    let a = z.norm();
    if a >= r {
        a.ln()
    } else {
        r.ln()
    }
}

/// U for the uniform measure on the disk of radius r:
/// log|z| outside, (|z|^2/r^2 - 1)/2 + log r inside.
pub fn potential_disk(z: Complex64, r: f64) -> f64 {
    let a = z.norm();
    if a >= r {
        a.ln()
    } else {
        (a * a / (r * r) - 1.0) / 2.0 + r.ln()
    }
}

/// E[1/(z - X)]. Inside the support radius: conj(z)/r^2 for the disk, 0 for
/// the circle. Outside both transforms are exactly 1/z (all higher moments
/// of either law vanish).
pub fn cauchy_transform(z: Complex64, spec: &EnsembleSpec) -> Complex64 {
    let a = z.norm();
    if a >= spec.r {
        z.inv()
    } else {
        match spec.family {
            EnsembleFamily::UniformDisk => z.conj() / (spec.r * spec.r),
            EnsembleFamily::UniformCircle => Complex64::new(0.0, 0.0),
        }
    }
}

/// Closed-form handles for one ensemble: the potential, the Cauchy
/// transform, and the variance of log|z - X|.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialProfile {
    pub spec: EnsembleSpec,
}

impl PotentialProfile {
    pub fn new(spec: EnsembleSpec) -> Self {
        Self { spec }
    }

    pub fn u(&self, z: Complex64) -> f64 {
        match self.spec.family {
            EnsembleFamily::UniformDisk => potential_disk(z, self.spec.r),
            EnsembleFamily::UniformCircle => potential_circle(z, self.spec.r),
        }
    }

    pub fn cauchy(&self, z: Complex64) -> Complex64 {
        cauchy_transform(z, &self.spec)
    }

    /// Var(log|z - X|). Reduces to the unit-radius quadrature: scaling the
    /// law by r shifts log|z - X| by log r, which leaves the variance alone.
    pub fn sigma2(&self, z: Complex64) -> Result<f64> {
        let a = z.norm() / self.spec.r;
        // u of the unit-scaled point equals u(z) - log r.
        let unit_u = self.u(z) - self.spec.r.ln();
        let f2 = abs_log_moment_unit(self.spec.family, a, 2.0)?;
        Ok((f2 - unit_u * unit_u).max(0.0))
    }
}

/// F_p(z) = E[ |log|z - X||^p ] for the unit-radius ensemble (spec.r must
/// be 1), by adaptive quadrature with the integrable log singularity split
/// out at the nearest support point.
pub fn moment_f_p(z: Complex64, p: f64, spec: &EnsembleSpec) -> Result<f64> {
    if (spec.r - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "moment quadrature is defined at r = 1, got r = {}",
            spec.r
        )));
    }
    if p < 1.0 {
        return Err(Error::InvalidInput(format!("moment order p must be >= 1, got {p}")));
    }
    let a = z.norm();
    if a > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "moment quadrature wants z in the closed unit disk, |z| = {a}"
        )));
    }
    abs_log_moment_unit(spec.family, a.min(1.0), p)
}

fn abs_log_moment_unit(family: EnsembleFamily, a: f64, p: f64) -> Result<f64> {
    match family {
        EnsembleFamily::UniformCircle => {
            circle_expectation_sq(a, &|d2: f64| (0.5 * d2.ln()).abs().powf(p))
        }
        EnsembleFamily::UniformDisk => {
            disk_expectation(a, &|t: f64| t.ln().abs().powf(p))
        }
    }
}

/// E[h(|z - X|^2)] for X uniform on the unit circle, |z| = a.
///
/// |z - e^{i phi}|^2 = (1 - a)^2 + 4 a sin^2(phi/2), a form that stays
/// accurate right next to the singularity at phi = 0 when a = 1. The
/// kernel h must make phi^? h integrable; near the support we regrade the
/// variable quartically so the adaptive pass sees a smooth integrand.
pub fn circle_expectation_sq<H: Fn(f64) -> f64>(a: f64, h: &H) -> Result<f64> {
    let dist2 = |phi: f64| {
        let s = (0.5 * phi).sin();
        (1.0 - a) * (1.0 - a) + 4.0 * a * s * s
    };
    if a > 0.9 {
        // phi = pi u^4 softens the integrable log blow-up at phi = 0.
        let g = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let phi = std::f64::consts::PI * u.powi(4);
            4.0 * u.powi(3) * h(dist2(phi))
        };
        adaptive_simpson(&g, 0.0, 1.0, QUAD_TOL)
    } else {
        let g = |phi: f64| h(dist2(phi)) / std::f64::consts::PI;
        adaptive_simpson(&g, 0.0, std::f64::consts::PI, QUAD_TOL)
    }
}

/// Angular measure of the circle of radius t about z (|z| = a) that lies
/// inside the unit disk.
fn disk_arc_angle(a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return std::f64::consts::TAU;
    }
    if t <= 1.0 - a {
        return std::f64::consts::TAU;
    }
    if t >= 1.0 + a {
        return 0.0;
    }
    let cosv = ((t * t + a * a - 1.0) / (2.0 * a * t)).clamp(-1.0, 1.0);
    2.0 * cosv.acos()
}

/// E[h(|z - X|)] for X uniform on the unit disk, |z| = a, via the
/// arc-length parametrization: (1/pi) int_0^{1+a} h(t) alpha(t) t dt.
pub fn disk_expectation<H: Fn(f64) -> f64>(a: f64, h: &H) -> Result<f64> {
    let upper = 1.0 + a;
    let f = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        h(t) * disk_arc_angle(a, t) * t / std::f64::consts::PI
    };
    let mut splits = vec![0.0];
    for candidate in [(1.0 - a).abs(), 1.0, upper] {
        if candidate > splits[splits.len() - 1] + 1e-15 && candidate < upper + 1e-15 {
            splits.push(candidate.min(upper));
        }
    }
    if *splits.last().unwrap() < upper {
        splits.push(upper);
    }
    adaptive_simpson_split(&f, &splits, QUAD_TOL)
}

/// Closed-form upper bound for E[1/|z - X|^p] on the unit disk:
/// 2 + p/(2-p) * 2^{(p-2)/p}, from the layer-cake representation of the
/// inverse moment.
pub fn inverse_moment_bound(p: f64) -> f64 {
    2.0 + p / (2.0 - p) * 2.0f64.powf((p - 2.0) / p)
}

/// E[1/|z - X|^p] for X uniform on the unit disk and 0 < p < 2.
///
/// The radial integral int t^{1-p} alpha(t) dt is regularized exactly by
/// the substitution u = t^{2-p}, after which the integrand is bounded.
pub fn inverse_moment(z: Complex64, p: f64) -> Result<f64> {
    if !(0.0 < p && p < 2.0) {
        return Err(Error::UnsupportedP { p });
    }
    let a = z.norm();
    if a > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "inverse moment wants z in the closed unit disk, |z| = {a}"
        )));
    }
    let a = a.min(1.0);
    let q = 2.0 - p;
    let upper = (1.0 + a).powf(q);
    let f = |u: f64| {
        if u <= 0.0 {
            return disk_arc_angle(a, 0.0) / (std::f64::consts::PI * q);
        }
        let t = u.powf(1.0 / q);
        disk_arc_angle(a, t) / (std::f64::consts::PI * q)
    };
    let mut splits = vec![0.0];
    for candidate in [(1.0 - a).max(0.0).powf(q), upper] {
        if candidate > splits[splits.len() - 1] + 1e-15 && candidate <= upper + 1e-15 {
            splits.push(candidate.min(upper));
        }
    }
    if *splits.last().unwrap() < upper {
        splits.push(upper);
    }
    let value = adaptive_simpson_split(&f, &splits, QUAD_TOL)?;
    debug_assert!(
        value <= inverse_moment_bound(p) * (1.0 + 1e-9),
        "inverse moment {value} exceeded its analytic bound {}",
        inverse_moment_bound(p)
    );
    Ok(value)
}

/// E[ |log|z - X| - center|^p ] at unit radius, for the Berry-Esseen third
/// moment and friends.
pub fn centered_abs_log_moment(
    z: Complex64,
    p: f64,
    spec: &EnsembleSpec,
    center: f64,
) -> Result<f64> {
    if (spec.r - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("centered moments are defined at r = 1".into()));
    }
    let a = z.norm().min(1.0);
    match spec.family {
        EnsembleFamily::UniformCircle => {
            circle_expectation_sq(a, &|d2: f64| (0.5 * d2.ln() - center).abs().powf(p))
        }
        EnsembleFamily::UniformDisk => {
            disk_expectation(a, &|t: f64| (t.ln() - center).abs().powf(p))
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov sup distance between a sample and the standard normal.
pub fn ks_distance_to_normal(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = normal_cdf(x);
        sup = sup.max((cdf - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - cdf).abs());
    }
    sup
}

/// Empirical check of the Berry-Esseen rate for normalized log-sums.
#[derive(Debug, Clone, Serialize)]
pub struct CltDiagnostic {
    pub ks_distance: f64,
    /// 3 rho / (sigma^3 sqrt(n)).
    pub berry_esseen_budget: f64,
    pub sigma: f64,
    pub rho: f64,
    pub n: usize,
    pub trials: usize,
}

/// Simulate (1/(sigma sqrt(n))) sum_i (log|z - X_i| - U(z)) over the given
/// number of trials and compare its empirical law against the standard
/// normal.
pub fn clt_diagnostic(
    spec: &EnsembleSpec,
    z: Complex64,
    trials: usize,
    master_seed: u64,
) -> Result<CltDiagnostic> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let profile = PotentialProfile::new(*spec);
    let sigma2 = profile.sigma2(z)?;
    if sigma2 < 1e-12 {
        return Err(Error::DegenerateVariance);
    }
    let sigma = sigma2.sqrt();
    let u = profile.u(z);
    let rho = centered_abs_log_moment(z, 3.0, spec, u)?;
    let n = spec.n;
    let scale = 1.0 / (sigma * (n as f64).sqrt());
    let mut samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let poly = sample_polynomial(spec, &SeedPolicy::new(master_seed, trial));
            (poly.log_abs_eval(z).log_abs - n as f64 * u) * scale
        })
        .collect();
    let ks = ks_distance_to_normal(&mut samples);
    Ok(CltDiagnostic {
        ks_distance: ks,
        berry_esseen_budget: 3.0 * rho / (sigma2 * sigma * (n as f64).sqrt()),
        sigma,
        rho,
        n,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle_spec(r: f64) -> EnsembleSpec {
        EnsembleSpec::new(EnsembleFamily::UniformCircle, r, 10).unwrap()
    }

    fn disk_spec(r: f64) -> EnsembleSpec {
        EnsembleSpec::new(EnsembleFamily::UniformDisk, r, 10).unwrap()
    }

    #[test]
    fn circle_potential_cases() {
        assert_abs_diff_eq!(potential_circle(c(0.5, 0.0), 1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(potential_circle(c(2.0, 0.0), 1.0), 2.0f64.ln());
        assert_relative_eq!(potential_circle(c(0.5, 0.0), 0.9), 0.9f64.ln());
    }

    #[test]
    fn disk_potential_cases() {
        assert_relative_eq!(potential_disk(c(0.0, 0.0), 1.0), -0.5);
        assert_abs_diff_eq!(potential_disk(c(1.0, 0.0), 1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(potential_disk(c(0.6, 0.0), 1.0), -0.32);
    }

    #[test]
    fn cauchy_transform_cases() {
        let f = cauchy_transform(c(0.3, 0.4), &disk_spec(1.0));
        assert_abs_diff_eq!((f - c(0.3, -0.4)).norm(), 0.0, epsilon = 1e-15);
        let g = cauchy_transform(c(0.5, 0.0), &circle_spec(1.0));
        assert_abs_diff_eq!(g.norm(), 0.0, epsilon = 1e-15);
        for spec in [circle_spec(1.0), disk_spec(1.0)] {
            let h = cauchy_transform(c(1.25, 0.0), &spec);
            assert_relative_eq!(h.re, 0.8, max_relative = 1e-14);
            assert_abs_diff_eq!(h.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn circle_moment_degenerate_at_center() {
        // log|0 - e^{i t}| = 0 identically.
        let v = moment_f_p(c(0.0, 0.0), 2.0, &circle_spec(1.0)).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn disk_first_moment_at_center() {
        // log|X| <= 0 a.s., so E|log|X|| = -U(0) = 1/2.
        let v = moment_f_p(c(0.0, 0.0), 1.0, &disk_spec(1.0)).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-7);
    }

    #[test]
    fn circle_second_moment_on_support() {
        // E[(log|1 - e^{i t}|)^2] = pi^2/12 by the Fourier series of
        // log|1 - e^{i t}|.
        let v = moment_f_p(c(1.0, 0.0), 2.0, &circle_spec(1.0)).unwrap();
        let expect = std::f64::consts::PI.powi(2) / 12.0;
        assert_relative_eq!(v, expect, max_relative = 1e-6);
    }

    #[test]
    fn disk_potential_matches_quadrature_mean() {
        // Signed mean of log|z - X| equals the closed-form potential; the
        // quadrature side uses the identity E[log t] with kernel ln t.
        for &a in &[0.0, 0.35, 0.8, 1.0] {
            let mean = disk_expectation(a, &|t: f64| t.ln()).unwrap();
            let expect = potential_disk(c(a, 0.0), 1.0);
            assert_abs_diff_eq!(mean, expect, epsilon = 1e-7);
        }
    }

    #[test]
    fn circle_inverse_square_identity() {
        // E[1/|t - X|^2] = 1/(1 - t^2) at three radii, to 1e-8.
        for &t in &[0.3, 0.6, 0.9] {
            let v = circle_expectation_sq(t, &|d2: f64| 1.0 / d2).unwrap();
            assert_abs_diff_eq!(v, 1.0 / (1.0 - t * t), epsilon = 1e-8);
        }
    }

    #[test]
    fn inverse_moment_closed_forms() {
        assert_relative_eq!(inverse_moment(c(0.0, 0.0), 1.0).unwrap(), 2.0, max_relative = 1e-7);
        assert_relative_eq!(inverse_moment(c(0.0, 0.0), 1.5).unwrap(), 4.0, max_relative = 1e-7);
    }

    #[test]
    fn inverse_moment_respects_bound_on_boundary() {
        let v = inverse_moment(c(1.0, 0.0), 1.0).unwrap();
        assert!(v.is_finite());
        assert!(v <= inverse_moment_bound(1.0) + 1e-9, "{v} vs bound 2.5");
        assert_relative_eq!(inverse_moment_bound(1.0), 2.5);
    }

    #[test]
    fn inverse_moment_diverges_toward_p_two() {
        let lo = inverse_moment(c(0.0, 0.0), 1.5).unwrap();
        let hi = inverse_moment(c(0.0, 0.0), 1.9).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn inverse_moment_rejects_bad_p() {
        assert!(matches!(
            inverse_moment(c(0.0, 0.0), 2.0),
            Err(Error::UnsupportedP { .. })
        ));
    }

    #[test]
    fn clt_degenerate_variance_at_circle_center() {
        let spec = EnsembleSpec::new(EnsembleFamily::UniformCircle, 1.0, 100).unwrap();
        assert!(matches!(
            clt_diagnostic(&spec, c(0.0, 0.0), 100, 1),
            Err(Error::DegenerateVariance)
        ));
    }

    #[test]
    fn cauchy_transform_is_gradient_of_potential() {
        // Central differences of U reconstruct the transform through
        // dU/dx - i dU/dy at interior points of the disk.
        let spec = disk_spec(1.0);
        let h = 1e-5;
        for &(x, y) in &[(0.2, 0.1), (-0.4, 0.3), (0.0, -0.6), (0.5, 0.5), (-0.1, -0.1)] {
            let z = c(x, y);
            let ux = (potential_disk(z + c(h, 0.0), 1.0) - potential_disk(z - c(h, 0.0), 1.0)) / (2.0 * h);
            let uy = (potential_disk(z + c(0.0, h), 1.0) - potential_disk(z - c(0.0, h), 1.0)) / (2.0 * h);
            let fd = c(ux, -uy);
            let exact = cauchy_transform(z, &spec);
            assert_abs_diff_eq!((fd - exact).norm(), 0.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn sigma2_is_positive_off_center() {
        let p = PotentialProfile::new(circle_spec(1.0));
        let s = p.sigma2(c(1.0, 0.0)).unwrap();
        // Var(log|1 - X|) = pi^2/12 since the mean vanishes.
        assert_relative_eq!(s, std::f64::consts::PI.powi(2) / 12.0, max_relative = 1e-6);
    }
}
