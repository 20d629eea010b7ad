//! Component counting and the derivative-bound certificates.
//!
//! The exact counter turns the critical values into a component count: the
//! lemniscate has one more component than there are critical points with
//! |P(beta)| >= 1. A grid flood-fill serves as an independent low-degree
//! oracle, never as the production counter.
//!
//! Note that unit lemniscates are not scale-invariant: scaling every root
//! (and the evaluation point) by t multiplies |P| by t^n, which moves the
//! level set itself. No scale-equivariance of the count is claimed or
//! relied on anywhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::critical::CriticalSet;
use crate::error::{Error, Result};
use crate::poly::{scaled_symmetric_log_magnitudes, RootedPolynomial, SIMPLE_ROOT_GUARD};
use crate::potential::inverse_moment_bound;

/// Width of the log|P(beta)| band around zero inside which a count is
/// flagged as perturbation-sensitive.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Margin added around the root bound for the grid bounding box; cells
/// beyond |z| = root_bound + 1 are provably outside the lemniscate.
const GRID_MARGIN: f64 = 1.05;

/// Certificate truncation depth: symmetric-function terms past this index
/// are covered by a geometric tail bound when the magnitudes decay.
const CERT_TRUNCATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Exact,
    Grid,
}

/// Component count with the evidence that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub count: usize,
    /// log|P(beta_j)| per critical point (empty for the grid method).
    pub critical_values_log: Vec<f64>,
    /// Exact method: some critical value sits within tolerance of the
    /// boundary. Grid method: refinement never stabilized.
    pub degenerate: bool,
    pub method: CountMethod,
}

impl ComponentReport {
    pub fn n_critical_ge_one(&self) -> usize {
        self.count - 1
    }

    /// The documented JSON shape.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "count": self.count,
            "method": match self.method { CountMethod::Exact => "exact", CountMethod::Grid => "grid" },
            "degenerate": self.degenerate,
            "n_critical_ge_one": self.n_critical_ge_one(),
        })
    }
}

/// Exact count via critical values: count = 1 + #{beta : log|P(beta)| >= 0}.
///
/// The closed condition |P(beta)| >= 1 cannot be distinguished from its
/// strict version in floating point, so any |log|P(beta)|| < tol raises the
/// degenerate flag instead; the boundary event has probability zero under
/// both ensembles.
pub fn count_components_exact(
    poly: &RootedPolynomial,
    cps: &CriticalSet,
    tol: f64,
) -> Result<ComponentReport> {
    if !cps.all_converged() {
        return Err(Error::UnconvergedCritical);
    }
    let logs: Vec<f64> = cps
        .points
        .iter()
        .map(|&b| poly.log_abs_eval(b).log_abs)
        .collect();
    let count = 1 + logs.iter().filter(|&&l| l >= 0.0).count();
    let degenerate = logs.iter().any(|&l| l.abs() < tol);
    Ok(ComponentReport {
        count,
        critical_values_log: logs,
        degenerate,
        method: CountMethod::Exact,
    })
}

/// Cell-center inside mask over a square box that provably contains the
/// lemniscate.
pub struct GridField {
    pub half_width: f64,
    pub resolution: usize,
    inside: Vec<bool>,
}

impl GridField {
    pub fn sample(poly: &RootedPolynomial, resolution: usize) -> Self {
        let half_width = poly.root_bound() + GRID_MARGIN;
        let n = poly.degree();
        let step = 2.0 * half_width / resolution as f64;
        let reject_radius_sq = (poly.root_bound() + 1.0).powi(2);
        let mut inside = vec![false; resolution * resolution];
        // Direct |P|^2 products are safe below this degree even at the box
        // corners; larger degrees fall back to the log sum.
        let product_ok = n <= 128;
        for iy in 0..resolution {
            let y = -half_width + (iy as f64 + 0.5) * step;
            for ix in 0..resolution {
                let x = -half_width + (ix as f64 + 0.5) * step;
                if x * x + y * y > reject_radius_sq {
                    continue;
                }
                let z = Complex64::new(x, y);
                let is_in = if product_ok {
                    let mut prod = 1.0f64;
                    for &root in poly.roots() {
                        prod *= (z - root).norm_sqr();
                    }
                    prod < 1.0
                } else {
                    poly.log_abs_eval(z).log_abs < 0.0
                };
                inside[iy * resolution + ix] = is_in;
            }
        }
        Self {
            half_width,
            resolution,
            inside,
        }
    }

    pub fn is_inside(&self, ix: usize, iy: usize) -> bool {
        self.inside[iy * self.resolution + ix]
    }

    fn cell_of(&self, z: Complex64) -> (usize, usize) {
        let step = 2.0 * self.half_width / self.resolution as f64;
        let clamp = |v: f64| {
            (((v + self.half_width) / step).floor() as isize)
                .clamp(0, self.resolution as isize - 1) as usize
        };
        (clamp(z.re), clamp(z.im))
    }

    /// Number of 4-connected inside regions reachable from root cells. Root
    /// cells are forced inside first, so every counted region contains a
    /// root, matching the maximum principle.
    pub fn count_root_components(&mut self, poly: &RootedPolynomial) -> usize {
        let res = self.resolution;
        let seeds: Vec<usize> = poly
            .roots()
            .iter()
            .map(|&x| {
                let (ix, iy) = self.cell_of(x);
                iy * res + ix
            })
            .collect();
        for &s in &seeds {
            self.inside[s] = true;
        }
        let mut label = vec![0u32; res * res];
        let mut next_label = 0u32;
        let mut queue: Vec<usize> = Vec::new();
        for &seed in &seeds {
            if label[seed] != 0 {
                continue;
            }
            next_label += 1;
            label[seed] = next_label;
            queue.clear();
            queue.push(seed);
            while let Some(cell) = queue.pop() {
                let ix = cell % res;
                let iy = cell / res;
                let push = |c: usize, label: &mut Vec<u32>, queue: &mut Vec<usize>| {
                    if self.inside[c] && label[c] == 0 {
                        label[c] = next_label;
                        queue.push(c);
                    }
                };
                if ix > 0 {
                    push(cell - 1, &mut label, &mut queue);
                }
                if ix + 1 < res {
                    push(cell + 1, &mut label, &mut queue);
                }
                if iy > 0 {
                    push(cell - res, &mut label, &mut queue);
                }
                if iy + 1 < res {
                    push(cell + res, &mut label, &mut queue);
                }
            }
        }
        next_label as usize
    }
}

/// Independent grid oracle: flood-fill component count with resolution
/// doubling from 256 until two consecutive refinements agree. If the count
/// never stabilizes below `target_resolution` the report keeps the last
/// count and flags it unstable.
pub fn count_components_grid(poly: &RootedPolynomial, target_resolution: usize) -> ComponentReport {
    let mut resolution = 256usize;
    let mut previous: Option<usize> = None;
    let (count, stable) = loop {
        let mut field = GridField::sample(poly, resolution);
        let count = field.count_root_components(poly);
        if previous == Some(count) {
            break (count, true);
        }
        previous = Some(count);
        if resolution * 2 > target_resolution {
            break (count, false);
        }
        resolution *= 2;
    };
    ComponentReport {
        count,
        critical_values_log: Vec::new(),
        degenerate: !stable,
        method: CountMethod::Grid,
    }
}

/// Which certificate family failed first (checked in the order listed on
/// [`CertificateOutcome`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailedCondition {
    DerivativeLower,
    TaylorRatio,
    RootSeparation,
    DerivativeUpper,
    UniqueCritical,
    None,
}

/// Outcome of an isolated-component or good-root certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateOutcome {
    pub holds: bool,
    pub failed_condition: FailedCondition,
    pub radius_used: f64,
    /// Constant used in the good-root ratio bound (the p = 1 inverse-moment
    /// bound); absent for the isolated certificate.
    pub ratio_constant: Option<f64>,
}

impl CertificateOutcome {
    fn pass(radius: f64, ratio_constant: Option<f64>) -> Self {
        Self {
            holds: true,
            failed_condition: FailedCondition::None,
            radius_used: radius,
            ratio_constant,
        }
    }

    fn fail(radius: f64, cond: FailedCondition, ratio_constant: Option<f64>) -> Self {
        Self {
            holds: false,
            failed_condition: cond,
            radius_used: radius,
            ratio_constant,
        }
    }
}

/// Check ln|e_{k-1}| + (k-1) ln r < threshold(k) for k = 2..n, truncating at
/// CERT_TRUNCATION once the magnitudes decay geometrically (ratio <= 1/2
/// over the last four steps) and the geometric tail stays below every
/// remaining threshold. `threshold_ln(k)` must be monotone enough for the
/// tail comparison, which both certificate families are.
fn ratio_conditions_hold(
    gaps: &[Complex64],
    r: f64,
    threshold_ln: impl Fn(usize) -> f64,
) -> bool {
    let full = gaps.len();
    let head = full.min(CERT_TRUNCATION);
    let logs = scaled_symmetric_log_magnitudes(gaps, r, head);
    for j in 1..=head {
        if logs[j - 1] >= threshold_ln(j + 1) {
            return false;
        }
    }
    if head == full {
        return true;
    }
    // Geometric-decay tail bound over the truncated range: accept the
    // truncation only when the last four steps each shrink by at least a
    // factor of two AND the extrapolated tail clears every remaining
    // threshold.
    let ratios: Vec<f64> = (head - 4..head)
        .map(|j| logs[j] - logs[j - 1])
        .collect();
    let tail_decays = head >= 5
        && ratios
            .iter()
            .all(|&d| d.is_finite() && d <= -std::f64::consts::LN_2)
        && logs[head - 5..head].iter().all(|l| l.is_finite());
    if tail_decays {
        let decay = ratios.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut bound = logs[head - 1];
        let mut all_below = true;
        for j in (head + 1)..=full {
            bound += decay;
            if bound >= threshold_ln(j + 1) {
                all_below = false;
                break;
            }
        }
        if all_below {
            return true;
        }
    }
    // No certified tail: compute every remaining term outright.
    let logs = scaled_symmetric_log_magnitudes(gaps, r, full);
    for j in (head + 1)..=full {
        if logs[j - 1] >= threshold_ln(j + 1) {
            return false;
        }
    }
    true
}

/// Sufficient condition for root i to sit in its own lemniscate component:
/// a large first derivative, uniformly small Taylor ratios, and clear
/// separation, all inside radius r.
pub fn isolated_certificate(
    poly: &RootedPolynomial,
    i: usize,
    r: f64,
) -> Result<CertificateOutcome> {
    let n = poly.degree();
    let nn = poly.nearest_other_root(i);
    if let Some((_, dist)) = nn {
        if dist <= SIMPLE_ROOT_GUARD {
            return Err(Error::MultipleRoot { index: i, distance: dist });
        }
        if dist <= r {
            return Ok(CertificateOutcome::fail(r, FailedCondition::RootSeparation, None));
        }
    }
    // log|P'(X_i)| + log(r/2) >= 0.
    let log_deriv = poly.log_abs_deriv_at_root(i)?.log_abs;
    if log_deriv + (r / 2.0).ln() < 0.0 {
        return Ok(CertificateOutcome::fail(r, FailedCondition::DerivativeLower, None));
    }
    if n >= 2 {
        let gaps = poly.gap_reciprocals(i)?;
        let threshold = -(2.0f64.ln()) - 2.0 * (n as f64).ln();
        if !ratio_conditions_hold(&gaps, r, |_| threshold) {
            return Ok(CertificateOutcome::fail(r, FailedCondition::TaylorRatio, None));
        }
    }
    Ok(CertificateOutcome::pass(r, None))
}

/// Good-root certificate: a small first derivative, ratio bounds at the
/// pairing scale, 3r separation, and a unique critical point in B(X_i, r).
pub fn good_root_certificate(
    poly: &RootedPolynomial,
    cps: &CriticalSet,
    i: usize,
    r: f64,
) -> Result<CertificateOutcome> {
    let n = poly.degree();
    let ratio_c = inverse_moment_bound(1.0);
    if n == 1 {
        // No critical points exist, so the uniqueness clause is vacuously
        // unsatisfiable.
        return Ok(CertificateOutcome::fail(
            r,
            FailedCondition::UniqueCritical,
            Some(ratio_c),
        ));
    }
    if !cps.all_converged() {
        return Err(Error::UnconvergedCritical);
    }
    let nn = poly.nearest_other_root(i);
    if let Some((_, dist)) = nn {
        if dist <= SIMPLE_ROOT_GUARD {
            return Err(Error::MultipleRoot { index: i, distance: dist });
        }
        if dist <= 3.0 * r {
            return Ok(CertificateOutcome::fail(
                r,
                FailedCondition::RootSeparation,
                Some(ratio_c),
            ));
        }
    }
    let log_deriv = poly.log_abs_deriv_at_root(i)?.log_abs;
    if log_deriv >= -0.5 * (n as f64).sqrt() {
        return Ok(CertificateOutcome::fail(
            r,
            FailedCondition::DerivativeUpper,
            Some(ratio_c),
        ));
    }
    // Threshold for index k (testing e_{k-1} r^{k-1}):
    // ln RHS = 2 ln n + ln C(n-1, k-1) + (k-1) ln(C / n^{3/4}),
    // with the binomial accumulated incrementally in the log domain.
    let nf = n as f64;
    let ln_step = ratio_c.ln() - 0.75 * nf.ln();
    let mut ln_binom = vec![0.0f64; n];
    for k in 2..=n {
        // C(n-1, k-1) = C(n-1, k-2) * (n-k+1)/(k-1).
        ln_binom[k - 1] = ln_binom[k - 2] + ((nf - k as f64 + 1.0) / (k as f64 - 1.0)).ln();
    }
    let threshold = |k: usize| 2.0 * nf.ln() + ln_binom[k - 1] + (k as f64 - 1.0) * ln_step;
    let gaps = poly.gap_reciprocals(i)?;
    if !ratio_conditions_hold(&gaps, r, threshold) {
        return Ok(CertificateOutcome::fail(
            r,
            FailedCondition::TaylorRatio,
            Some(ratio_c),
        ));
    }
    let xi = poly.roots()[i];
    let inside = cps.points.iter().filter(|&&b| (b - xi).norm() < r).count();
    if inside != 1 {
        return Ok(CertificateOutcome::fail(
            r,
            FailedCondition::UniqueCritical,
            Some(ratio_c),
        ));
    }
    Ok(CertificateOutcome::pass(r, Some(ratio_c)))
}

/// Number of roots whose isolated certificate holds at r = n^{-6}.
pub fn count_isolated(poly: &RootedPolynomial) -> Result<usize> {
    let n = poly.degree() as f64;
    let r = n.powi(-6);
    let mut count = 0;
    for i in 0..poly.degree() {
        if isolated_certificate(poly, i, r)?.holds {
            count += 1;
        }
    }
    Ok(count)
}
