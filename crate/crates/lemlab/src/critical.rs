//! Critical points of root-form polynomials.
//!
//! The production solver runs Ehrlich-Aberth simultaneous iteration on P'
//! without ever forming coefficients: Newton's ratio P'/P'' comes from the
//! power sums S1, S2 of the reciprocal root gaps. An independent coefficient
//! oracle covers low degrees for cross-checking.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{log_norm, KahanF64, RootedPolynomial};

/// Pairwise root distance below which the solver refuses the input.
pub const SOLVER_SIMPLE_GUARD: f64 = 1e-10;

/// Highest degree the coefficient oracle accepts.
pub const ORACLE_MAX_DEGREE: usize = 24;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_sweeps: usize,
    /// Normalized residual |S1(b)| / sum_i |1/(b - X_i)| required per point.
    pub residual_tol: f64,
    /// Absolute distance to a root of P below which an iterate is bumped
    /// off the pole of S1.
    pub pole_guard: f64,
    pub max_reperturbations: usize,
    /// Fallback acceptance for iterates that stop moving at machine
    /// precision. A critical point at distance d from a root cannot be
    /// represented finely enough for the normalized residual to drop below
    /// ~eps/d, so near tight root pairs the primary tolerance is
    /// unreachable; a stagnant iterate is accepted if its residual clears
    /// this cap instead.
    pub stagnant_residual_cap: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 500,
            residual_tol: 1e-10,
            pole_guard: 1e-13,
            max_reperturbations: 10,
            stagnant_residual_cap: 1e-7,
        }
    }
}

/// The n-1 critical points with per-point convergence diagnostics, in
/// deterministic (re, im)-sorted order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet {
    pub points: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: Vec<bool>,
}

impl CriticalSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    fn empty() -> Self {
        Self {
            points: Vec::new(),
            residuals: Vec::new(),
            iterations: 0,
            converged: Vec::new(),
        }
    }

    fn sort_in_place(&mut self) {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| {
            self.points[a]
                .re
                .total_cmp(&self.points[b].re)
                .then(self.points[a].im.total_cmp(&self.points[b].im))
        });
        self.points = order.iter().map(|&i| self.points[i]).collect();
        self.residuals = order.iter().map(|&i| self.residuals[i]).collect();
        self.converged = order.iter().map(|&i| self.converged[i]).collect();
    }
}

/// splitmix64, used for index-hashed perturbation angles.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn hashed_angle(i: usize) -> f64 {
    let h = splitmix64(i as u64);
    std::f64::consts::TAU * ((h >> 11) as f64 / (1u64 << 53) as f64)
}

fn unit_dir(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// S1, S2, and sum of |1/(z - X_i)| in one pass over the roots.
#[inline]
fn sums_at(roots: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for &x in roots {
        let w = (z - x).inv();
        s1 += w;
        s2 += w * w;
        abs_sum += w.norm();
    }
    (s1, s2, abs_sum)
}

fn min_root_distance(roots: &[Complex64], z: Complex64) -> f64 {
    roots
        .iter()
        .map(|&x| (z - x).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Find all n-1 critical points of P by Ehrlich-Aberth iteration on P'.
///
/// Iterates start at the roots themselves, each nudged by half the
/// nearest-neighbor distance in an index-hashed direction; the root with the
/// largest |P'| proxy is dropped. Sweeps are Gauss-Seidel over the iterates
/// in sorted order, so a run is bitwise reproducible.
pub fn solve_critical_points(poly: &RootedPolynomial, opts: &SolveOptions) -> Result<CriticalSet> {
    let n = poly.degree();
    if n == 1 {
        return Ok(CriticalSet::empty());
    }
    let roots = poly.roots();

    // One O(n^2) pass: nearest-neighbor distances and the log|P'| proxy.
    let mut nn = vec![f64::INFINITY; n];
    let mut proxy = vec![KahanF64::default(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = roots[i] - roots[j];
            let dist = d.norm();
            if dist < nn[i] {
                nn[i] = dist;
            }
            if dist < nn[j] {
                nn[j] = dist;
            }
            let l = log_norm(d);
            proxy[i].add(l);
            proxy[j].add(l);
        }
    }
    if let Some((i, _)) = nn
        .iter()
        .enumerate()
        .find(|&(_, &d)| d <= SOLVER_SIMPLE_GUARD)
    {
        return Err(Error::MultipleRootInput { index: i });
    }
    let dropped = (0..n)
        .max_by(|&a, &b| proxy[a].value().total_cmp(&proxy[b].value()))
        .expect("n >= 2");

    let mut pts: Vec<Complex64> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i == dropped {
            continue;
        }
        pts.push(roots[i] + 0.5 * nn[i] * unit_dir(hashed_angle(i)));
    }
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let m = pts.len();
    let mut converged = vec![false; m];
    let mut residuals = vec![f64::INFINITY; m];
    let mut reperturbs = vec![0usize; m];
    let mut dead = vec![false; m];
    let mut stagnant = vec![0u8; m];
    let mut sweeps_used = opts.max_sweeps;

    'sweeps: for sweep in 1..=opts.max_sweeps {
        let mut all_done = true;
        for i in 0..m {
            if converged[i] || dead[i] {
                continue;
            }
            let mut z = pts[i];

            // Bump iterates off poles of S1.
            while min_root_distance(roots, z) < opts.pole_guard {
                if reperturbs[i] >= opts.max_reperturbations {
                    dead[i] = true;
                    break;
                }
                reperturbs[i] += 1;
                z += 1e-6 * unit_dir(hashed_angle(i.wrapping_add(reperturbs[i] << 32)));
            }
            if dead[i] {
                all_done = false;
                continue;
            }

            let (s1, s2, abs_sum) = sums_at(roots, z);
            let residual = s1.norm() / abs_sum;
            residuals[i] = residual;
            if residual < opts.residual_tol {
                converged[i] = true;
                pts[i] = z;
                continue;
            }

            let newton = s1 / (s1 * s1 - s2);
            let mut repel = Complex64::new(0.0, 0.0);
            for (j, &other) in pts.iter().enumerate() {
                if j != i {
                    repel += (z - other).inv();
                }
            }
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repel);
            let next = z - step;
            if step.is_finite() && next.is_finite() {
                if step.norm() < 1e-14 * (1.0 + z.norm()) {
                    // Machine-limited progress; accept once it repeats if the
                    // residual at least clears the representation-floor cap.
                    stagnant[i] = stagnant[i].saturating_add(1);
                    if stagnant[i] >= 2 && residual < opts.stagnant_residual_cap {
                        converged[i] = true;
                        pts[i] = z;
                        continue;
                    }
                } else {
                    stagnant[i] = 0;
                }
                pts[i] = next;
            } else if reperturbs[i] < opts.max_reperturbations {
                reperturbs[i] += 1;
                pts[i] = z + 1e-6 * unit_dir(hashed_angle(i.wrapping_add(reperturbs[i] << 32)));
            } else {
                dead[i] = true;
            }
            all_done = false;
        }
        if all_done {
            sweeps_used = sweep;
            break 'sweeps;
        }
    }

    // Final residual audit on the returned points. Stagnant acceptances keep
    // their recorded residual and flag.
    for i in 0..m {
        if dead[i] {
            converged[i] = false;
            continue;
        }
        if converged[i] {
            continue;
        }
        let (s1, _, abs_sum) = sums_at(roots, pts[i]);
        residuals[i] = s1.norm() / abs_sum;
        converged[i] = residuals[i] < opts.residual_tol;
    }

    let mut set = CriticalSet {
        points: pts,
        residuals,
        iterations: sweeps_used,
        converged,
    };
    set.sort_in_place();
    if !set.all_converged() {
        let indices = set
            .converged
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| i)
            .collect();
        return Err(Error::NoConvergence {
            indices,
            sweeps: set.iterations,
        });
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// Coefficient oracle (low degree only)
// ---------------------------------------------------------------------------

/// Horner evaluation of a coefficient polynomial (ascending order).
fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn poly_derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

/// Expand prod (z - X_i) into ascending coefficients by convolution.
fn expand_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &x in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * x;
        }
        coeffs = next;
    }
    coeffs
}

/// Synthetic division by (z - root); drops the remainder.
fn deflate(coeffs: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); deg];
    let mut carry = coeffs[deg];
    for k in (0..deg).rev() {
        out[k] = carry;
        carry = coeffs[k] + carry * root;
    }
    out
}

fn newton_polish(coeffs: &[Complex64], deriv: &[Complex64], start: Complex64, iters: usize) -> Complex64 {
    let mut z = start;
    for _ in 0..iters {
        let f = horner(coeffs, z);
        let df = horner(deriv, z);
        if df.norm() < 1e-300 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// One root of `coeffs` by Newton from a ladder of deterministic starts.
fn newton_one_root(coeffs: &[Complex64]) -> Result<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    if deg == 1 {
        return Ok(-coeffs[0] / coeffs[1]);
    }
    let cauchy = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let deriv = poly_derivative(coeffs);
    let centroid = -coeffs[deg - 1] / (lead * deg as f64);
    let mut starts = vec![centroid, Complex64::new(0.0, 0.0)];
    for &scale in &[0.5, 1.0, 0.25, 1.5] {
        for k in 0..(2 * deg + 1) {
            let angle = std::f64::consts::TAU * k as f64 / (2 * deg + 1) as f64 + 0.4;
            starts.push(centroid + cauchy * scale * unit_dir(angle));
        }
    }
    let scale_f: f64 = coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
    for start in starts {
        let mut z = start;
        let mut last_step = f64::INFINITY;
        for _ in 0..300 {
            let f = horner(coeffs, z);
            if f.norm() <= 1e-14 * scale_f * (1.0 + z.norm()).powi(deg as i32) {
                return Ok(z);
            }
            let df = horner(&deriv, z);
            if df.norm() < 1e-300 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            z -= step;
            last_step = step.norm();
            if last_step < 1e-14 * (1.0 + z.norm()) {
                return Ok(z);
            }
        }
        if last_step < 1e-10 * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        indices: vec![0],
        sweeps: 300,
    })
}

/// Independent critical-point oracle: expand to coefficients, differentiate
/// termwise, find the roots by many-start Newton with deflation, and merge
/// clusters within 1e-7 so multiplicities come out counted.
pub fn oracle_critical_points(poly: &RootedPolynomial) -> Result<CriticalSet> {
    let n = poly.degree();
    if n > ORACLE_MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            n,
            max: ORACLE_MAX_DEGREE,
        });
    }
    if n == 1 {
        return Ok(CriticalSet::empty());
    }
    let coeffs = expand_from_roots(poly.roots());
    let dcoeffs = poly_derivative(&coeffs);
    let ddcoeffs = poly_derivative(&dcoeffs);
    let m = n - 1;

    let mut working = dcoeffs.clone();
    let mut found = Vec::with_capacity(m);
    for _ in 0..m {
        let raw = newton_one_root(&working)?;
        // Polish against the undeflated derivative unless the root looks
        // multiple there (tiny second derivative).
        let polished = if horner(&ddcoeffs, raw).norm() > 1e-8 {
            newton_polish(&dcoeffs, &ddcoeffs, raw, 8)
        } else {
            raw
        };
        found.push(polished);
        working = deflate(&working, polished);
    }

    // Cluster within 1e-7 and snap members to the cluster mean.
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut clustered: Vec<Complex64> = Vec::with_capacity(m);
    let mut i = 0;
    while i < found.len() {
        let mut j = i + 1;
        while j < found.len() && (found[j] - found[j - 1]).norm() < 1e-7 {
            j += 1;
        }
        let mean = found[i..j].iter().sum::<Complex64>() / (j - i) as f64;
        for _ in i..j {
            clustered.push(mean);
        }
        i = j;
    }

    let scale_f: f64 = dcoeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
    let residuals: Vec<f64> = clustered
        .iter()
        .map(|&z| horner(&dcoeffs, z).norm() / scale_f)
        .collect();
    let mut set = CriticalSet {
        converged: vec![true; clustered.len()],
        points: clustered,
        residuals,
        iterations: 0,
    };
    set.sort_in_place();
    Ok(set)
}

// ---------------------------------------------------------------------------
// Pairing statistics
// ---------------------------------------------------------------------------

/// Per-root pairing against the critical set: nearest distance, uniqueness
/// inside B(root, n^{-3/4}), and membership in the annulus
/// D_n = {3 n^{-1/4} < |z| < 1 - n^{-1/2}}.
#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    pub nearest_distance: Vec<f64>,
    pub unique_within_rn: Vec<bool>,
    pub in_annulus: Vec<bool>,
    pub pairing_radius: f64,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
}

impl PairingReport {
    /// Fraction of annulus roots with a unique paired critical point;
    /// `None` when the annulus holds no roots (tiny n).
    pub fn annulus_unique_fraction(&self) -> Option<f64> {
        let total = self.in_annulus.iter().filter(|&&a| a).count();
        if total == 0 {
            return None;
        }
        let good = self
            .in_annulus
            .iter()
            .zip(&self.unique_within_rn)
            .filter(|&(&a, &u)| a && u)
            .count();
        Some(good as f64 / total as f64)
    }
}

pub fn pairing_statistics(poly: &RootedPolynomial, cps: &CriticalSet) -> Result<PairingReport> {
    if !cps.all_converged() {
        return Err(Error::UnconvergedCritical);
    }
    let n = poly.degree() as f64;
    let rn = n.powf(-0.75);
    let inner = 3.0 * n.powf(-0.25);
    let outer = 1.0 - n.powf(-0.5);
    let mut nearest = Vec::with_capacity(poly.degree());
    let mut unique = Vec::with_capacity(poly.degree());
    let mut annulus = Vec::with_capacity(poly.degree());
    for &x in poly.roots() {
        let mut best = f64::INFINITY;
        let mut inside = 0usize;
        for &b in &cps.points {
            let d = (x - b).norm();
            if d < best {
                best = d;
            }
            if d < rn {
                inside += 1;
            }
        }
        nearest.push(best);
        unique.push(inside == 1);
        let a = x.norm();
        annulus.push(a > inner && a < outer);
    }
    Ok(PairingReport {
        nearest_distance: nearest,
        unique_within_rn: unique,
        in_annulus: annulus,
        pairing_radius: rn,
        annulus_inner: inner,
        annulus_outer: outer,
    })
}

// ---------------------------------------------------------------------------
// Convex hull support for the Gauss-Lucas check
// ---------------------------------------------------------------------------

/// Andrew's monotone chain; returns the hull in counterclockwise order.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup_by(|a, b| a.re == b.re && a.im == b.im);
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| {
        (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
    };
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Distance from z to the convex hull (zero inside).
pub fn distance_to_convex_hull(hull: &[Complex64], z: Complex64) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => (z - hull[0]).norm(),
        2 => segment_distance(hull[0], hull[1], z),
        _ => {
            let mut inside = true;
            let mut best = f64::INFINITY;
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                let cross = (b.re - a.re) * (z.im - a.im) - (b.im - a.im) * (z.re - a.re);
                if cross < 0.0 {
                    inside = false;
                }
                best = best.min(segment_distance(a, b, z));
            }
            if inside {
                0.0
            } else {
                best
            }
        }
    }
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sqr();
    if denom == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / denom).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}
