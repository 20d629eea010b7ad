//! Root-form polynomials and their log-domain evaluation.
//!
//! A polynomial lives here only as its root multiset; coefficients are never
//! formed. All magnitudes accumulate as sums of logarithms, so evaluation is
//! immune to the overflow that kills direct products past degree ~700.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative guard below which an evaluation point counts as sitting on a
/// root. Chosen so reciprocal gaps stay under 1e14 and their squares never
/// overflow downstream.
pub const NEAR_ROOT_GUARD: f64 = 1e-14;

/// Pairwise root distance below which a root stops counting as simple.
pub const SIMPLE_ROOT_GUARD: f64 = 1e-12;

/// Kahan-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: Complex64,
    comp: Complex64,
}

impl KahanSum {
    pub fn add(&mut self, term: Complex64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Kahan-compensated accumulator for real sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanF64 {
    sum: f64,
    comp: f64,
}

impl KahanF64 {
    pub fn add(&mut self, term: f64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// log|P(z)| together with the accumulated argument of P(z).
///
/// `log_abs` is -inf exactly when `z` hits a root bit-for-bit, in which case
/// `at_root` is set and `phase` is meaningless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEval {
    pub log_abs: f64,
    /// Argument of P(z) reduced to (-pi, pi].
    pub phase: f64,
    pub at_root: bool,
}

/// Power sums S_k = sum_i 1/(z - X_i)^k for k = 1..K.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSums {
    sums: Vec<Complex64>,
}

impl PowerSums {
    /// S_k, 1-based.
    pub fn s(&self, k: usize) -> Complex64 {
        self.sums[k - 1]
    }

    /// S_1 = P'(z)/P(z).
    pub fn s1(&self) -> Complex64 {
        self.sums[0]
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.sums
    }
}

/// A degree-n polynomial represented by its complex root multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedPolynomial {
    roots: Vec<Complex64>,
    /// Support radius of the generating ensemble; `None` means a manual
    /// construction with no recorded bound.
    support_radius: Option<f64>,
}

impl RootedPolynomial {
    pub fn new(roots: Vec<Complex64>) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::InvalidInput("need at least one root".into()));
        }
        if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::InvalidInput("roots must be finite".into()));
        }
        Ok(Self {
            roots,
            support_radius: None,
        })
    }

    /// Construct with the generating ensemble's support radius recorded.
    pub fn with_support_radius(roots: Vec<Complex64>, r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "support radius must be positive and finite, got {r}"
            )));
        }
        let mut poly = Self::new(roots)?;
        let max = poly.roots.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if max > r * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "root of modulus {max} exceeds support radius {r}"
            )));
        }
        poly.support_radius = Some(r);
        Ok(poly)
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// Radius of a disk certain to contain every root: the recorded support
    /// radius when present, otherwise the largest root modulus.
    pub fn root_bound(&self) -> f64 {
        self.support_radius
            .unwrap_or_else(|| self.roots.iter().map(|x| x.norm()).fold(0.0, f64::max))
    }

    /// Index and distance of the nearest other root.
    pub fn nearest_other_root(&self, i: usize) -> Option<(usize, f64)> {
        let xi = self.roots[i];
        self.roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, &xj)| (j, (xi - xj).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// log|P(z)| = sum_i log|z - X_i|, accumulated in the log domain, with
    /// the argument of P(z) tracked alongside.
    pub fn log_abs_eval(&self, z: Complex64) -> LogEval {
        let mut log_acc = KahanF64::default();
        let mut phase_acc = KahanF64::default();
        let mut at_root = false;
        for &x in &self.roots {
            let d = z - x;
            if d.re == 0.0 && d.im == 0.0 {
                at_root = true;
                continue;
            }
            log_acc.add(log_norm(d));
            phase_acc.add(d.im.atan2(d.re));
        }
        if at_root {
            return LogEval {
                log_abs: f64::NEG_INFINITY,
                phase: 0.0,
                at_root: true,
            };
        }
        LogEval {
            log_abs: log_acc.value(),
            phase: wrap_phase(phase_acc.value()),
            at_root: false,
        }
    }

    /// S_k = sum_i 1/(z - X_i)^k for k = 1..k_max.
    ///
    /// Fails with [`Error::NearRoot`] when z is inside the relative guard
    /// band of any root.
    pub fn power_sums(&self, z: Complex64, k_max: usize) -> Result<PowerSums> {
        if k_max > self.degree() {
            return Err(Error::InvalidInput(format!(
                "power sum order {k_max} exceeds degree {}",
                self.degree()
            )));
        }
        let guard = NEAR_ROOT_GUARD * (1.0 + z.norm());
        let mut acc = vec![KahanSum::default(); k_max];
        for (i, &x) in self.roots.iter().enumerate() {
            let d = z - x;
            let dist = d.norm();
            if dist <= guard {
                return Err(Error::NearRoot {
                    index: i,
                    distance: dist,
                    guard,
                });
            }
            let w = d.inv();
            let mut p = w;
            for slot in acc.iter_mut() {
                slot.add(p);
                p *= w;
            }
        }
        Ok(PowerSums {
            sums: acc.iter().map(|k| k.value()).collect(),
        })
    }

    /// Reciprocal gaps {1/(X_i - X_j)}_{j != i}; errors if the root is not
    /// simple.
    pub(crate) fn gap_reciprocals(&self, i: usize) -> Result<Vec<Complex64>> {
        let xi = self.roots[i];
        let mut out = Vec::with_capacity(self.degree() - 1);
        for (j, &xj) in self.roots.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = xi - xj;
            let dist = d.norm();
            if dist <= SIMPLE_ROOT_GUARD {
                return Err(Error::MultipleRoot { index: i, distance: dist });
            }
            out.push(d.inv());
        }
        Ok(out)
    }

    /// (1/k!) |P^(k)(X_i) / P'(X_i)|, computed exactly as |e_{k-1}| of the
    /// reciprocal gap multiset. No numerical differentiation anywhere.
    pub fn derivative_ratio_at_root(&self, i: usize, k: usize) -> Result<f64> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("ratio order k must be >= 2, got {k}")));
        }
        let gaps = self.gap_reciprocals(i)?;
        if k - 1 > gaps.len() {
            // P^(k) of a degree-n polynomial vanishes identically for k > n.
            return Ok(0.0);
        }
        let e = elementary_symmetric(&gaps, k - 1);
        Ok(e[k - 2].norm())
    }

    /// log|P'(X_i)| = sum_{j != i} log|X_i - X_j| with accumulated phase.
    pub fn log_abs_deriv_at_root(&self, i: usize) -> Result<LogEval> {
        let xi = self.roots[i];
        let mut log_acc = KahanF64::default();
        let mut phase_acc = KahanF64::default();
        for (j, &xj) in self.roots.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = xi - xj;
            let dist = d.norm();
            if dist <= SIMPLE_ROOT_GUARD {
                return Err(Error::MultipleRoot { index: i, distance: dist });
            }
            log_acc.add(log_norm(d));
            phase_acc.add(d.im.atan2(d.re));
        }
        Ok(LogEval {
            log_abs: log_acc.value(),
            phase: wrap_phase(phase_acc.value()),
            at_root: false,
        })
    }

    /// Smallest pairwise root distance.
    pub fn min_root_separation(&self) -> f64 {
        let n = self.degree();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min((self.roots[i] - self.roots[j]).norm());
            }
        }
        best
    }
}

/// log|d| robust to norm_sqr under/overflow.
#[inline]
pub(crate) fn log_norm(d: Complex64) -> f64 {
    let ns = d.norm_sqr();
    if (1e-300..=1e300).contains(&ns) {
        0.5 * ns.ln()
    } else {
        d.norm().ln()
    }
}

/// Reduce an angle to (-pi, pi].
pub(crate) fn wrap_phase(p: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut w = p - tau * (p / tau).round();
    if w <= -std::f64::consts::PI {
        w += tau;
    }
    w
}

/// Elementary symmetric functions e_1..e_K of the input multiset, by
/// incremental expansion of prod_j (1 + v_j t).
///
/// The expansion route is the numerically stable one here: it keeps every
/// intermediate a partial elementary symmetric function of a value subset,
/// and the top coefficient degenerates to a pure product chain. Newton's
/// identities, by contrast, route the same answer through power sums that
/// can exceed it by hundreds of orders of magnitude whenever the values have
/// wide dynamic range (reciprocal root gaps routinely do), and the resulting
/// cancellation destroys all digits past small k. The identities survive as
/// the low-order test oracle.
pub fn elementary_symmetric(values: &[Complex64], k_max: usize) -> Vec<Complex64> {
    let k_max = k_max.min(values.len());
    if k_max == 0 {
        return Vec::new();
    }
    let mut row = vec![Complex64::new(0.0, 0.0); k_max + 1];
    row[0] = Complex64::new(1.0, 0.0);
    for (j, &v) in values.iter().enumerate() {
        let top = (j + 1).min(k_max);
        for k in (1..=top).rev() {
            row[k] = row[k] + row[k - 1] * v;
        }
    }
    row.remove(0);
    row
}

/// A complex number with a power-of-two exponent offset widening its range:
/// value = c * 2^exp. Renormalization keeps |c| inside [2^-256, 2^256], so
/// chained convolution updates neither overflow nor underflow.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    c: Complex64,
    exp: i32,
}

/// 2^k as f64 for |k| <= 1022.
#[inline]
fn exp2i(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((1023 + k) as u64) << 52)
}

impl Scaled {
    const ZERO: Scaled = Scaled {
        c: Complex64::new(0.0, 0.0),
        exp: 0,
    };

    const ONE: Scaled = Scaled {
        c: Complex64::new(1.0, 0.0),
        exp: 0,
    };

    #[inline]
    fn is_zero(&self) -> bool {
        self.c.re == 0.0 && self.c.im == 0.0
    }

    #[inline]
    fn renormalize(mut self) -> Scaled {
        if self.is_zero() {
            return Scaled::ZERO;
        }
        let a = self.c.re.abs().max(self.c.im.abs());
        if !a.is_finite() {
            // Saturate instead of looping; reachable only through inputs
            // whose product v * scale already overflowed f64.
            return Scaled {
                c: Complex64::new(f64::MAX, 0.0),
                exp: self.exp,
            };
        }
        if a > exp2i(256) {
            self.c *= exp2i(-256);
            self.exp += 256;
            return self.renormalize();
        }
        if a < exp2i(-256) {
            self.c *= exp2i(256);
            self.exp -= 256;
            return self.renormalize();
        }
        self
    }

    #[inline]
    fn mul_complex(self, u: Complex64) -> Scaled {
        // Pre-scale huge multipliers so |c * u| stays finite before the
        // renormalization pass (|c| <= 2^257 by invariant).
        let mut u = u;
        let mut exp = self.exp;
        while u.is_finite() && u.re.abs().max(u.im.abs()) > exp2i(128) {
            u *= exp2i(-256);
            exp += 256;
        }
        Scaled { c: self.c * u, exp }.renormalize()
    }

    #[inline]
    fn add(self, other: Scaled) -> Scaled {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let d = self.exp - other.exp;
        let out = if d >= 0 {
            if d > 600 {
                return self;
            }
            Scaled {
                c: self.c + other.c * exp2i(-d),
                exp: self.exp,
            }
        } else {
            if d < -600 {
                return other;
            }
            Scaled {
                c: self.c * exp2i(d) + other.c,
                exp: other.exp,
            }
        };
        out.renormalize()
    }

    fn log_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            log_norm(self.c) + self.exp as f64 * std::f64::consts::LN_2
        }
    }
}

/// ln |e_k({scale * v_j})| for k = 1..k_max, by the same incremental
/// expansion as [`elementary_symmetric`] but carried in exponent-tracked
/// arithmetic, so certificate evaluation stays finite even where the raw
/// coefficients would leave f64 range (binomial growth at degree 1000+).
/// Each scaled value v_j * scale must itself be a finite f64.
pub fn scaled_symmetric_log_magnitudes(values: &[Complex64], scale: f64, k_max: usize) -> Vec<f64> {
    let k_max = k_max.min(values.len());
    if k_max == 0 {
        return Vec::new();
    }
    let mut row = vec![Scaled::ZERO; k_max + 1];
    row[0] = Scaled::ONE;
    for (j, &v) in values.iter().enumerate() {
        let u = v * scale;
        let top = (j + 1).min(k_max);
        for k in (1..=top).rev() {
            row[k] = row[k].add(row[k - 1].mul_complex(u));
        }
    }
    row[1..].iter().map(Scaled::log_abs).collect()
}
