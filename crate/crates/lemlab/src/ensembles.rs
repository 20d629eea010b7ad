//! Seeded i.i.d. root samplers for the two ensembles: uniform on r*disk and
//! uniform on r*circle.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::poly::RootedPolynomial;
use crate::potential::PotentialProfile;

/// sqrt(e), the disk-model phase boundary between linear-fraction and
/// full-n component counts.
pub const SQRT_E: f64 = 1.6487212707001282;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleFamily {
    #[serde(rename = "disk")]
    UniformDisk,
    #[serde(rename = "circle")]
    UniformCircle,
}

impl std::fmt::Display for EnsembleFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnsembleFamily::UniformDisk => write!(f, "disk"),
            EnsembleFamily::UniformCircle => write!(f, "circle"),
        }
    }
}

impl std::str::FromStr for EnsembleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(EnsembleFamily::UniformDisk),
            "circle" => Ok(EnsembleFamily::UniformCircle),
            other => Err(Error::InvalidInput(format!(
                "unknown ensemble family {other:?} (expected \"disk\" or \"circle\")"
            ))),
        }
    }
}

/// A root-sampling law: family, scale, and degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub r: f64,
    pub n: usize,
}

impl EnsembleSpec {
    pub fn new(family: EnsembleFamily, r: f64, n: usize) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidInput(format!("scale r must be positive, got {r}")));
        }
        if n == 0 {
            return Err(Error::InvalidInput("degree n must be at least 1".into()));
        }
        Ok(Self { family, r, n })
    }
}

/// Deterministic per-trial stream selection.
///
/// The generator is ChaCha8 keyed by the master seed with the trial index as
/// the stream id, so the root set is a pure function of
/// (master_seed, trial_index) on every platform, and concurrent trials never
/// share state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPolicy {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// Draw n i.i.d. roots from the spec's law.
///
/// Circle: X = r e^{i theta} with theta uniform on [0, 2pi). Disk:
/// X = r sqrt(U) e^{i theta}; the square root makes area-uniformity exact,
/// costs one draw per root, and never rejects, which keeps the stream layout
/// identical across trials. Trig goes through libm so the bits do not
/// depend on the platform's math library.
pub fn sample_polynomial(spec: &EnsembleSpec, seed: &SeedPolicy) -> RootedPolynomial {
    let mut rng = seed.rng();
    let mut roots = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let theta = TAU * rng.random::<f64>();
        let radius = match spec.family {
            EnsembleFamily::UniformCircle => spec.r,
            EnsembleFamily::UniformDisk => spec.r * rng.random::<f64>().sqrt(),
        };
        roots.push(Complex64::new(
            radius * libm::cos(theta),
            radius * libm::sin(theta),
        ));
    }
    RootedPolynomial::with_support_radius(roots, spec.r)
        .expect("sampled roots are finite and inside the support radius")
}

/// Predicted component-count regime for a given (family, r).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhasePrediction {
    /// A single giant component swallows the support.
    OneComponent,
    /// Expected count of order sqrt(n) (disk, critical scale).
    SqrtOrder,
    /// Expected count n/2 in the limit (circle, critical scale).
    HalfN,
    /// Expected count C_r * n with 0 < C_r < 1.
    LinearFraction,
    /// All n roots form their own components.
    FullN,
    /// r = sqrt(e) exactly: the source table is ambiguous at this boundary.
    BoundaryAmbiguous,
}

impl PhasePrediction {
    pub fn label(&self) -> &'static str {
        match self {
            PhasePrediction::OneComponent => "one component",
            PhasePrediction::SqrtOrder => "sqrt(n) order",
            PhasePrediction::HalfN => "n/2",
            PhasePrediction::LinearFraction => "linear fraction of n",
            PhasePrediction::FullN => "n",
            PhasePrediction::BoundaryAmbiguous => "ambiguous in source",
        }
    }
}

/// Closed-form handles plus the phase-table prediction for a spec.
#[derive(Debug, Clone)]
pub struct TheoreticalProperties {
    pub phase: PhasePrediction,
    pub profile: PotentialProfile,
}

pub fn theoretical_properties(spec: &EnsembleSpec) -> TheoreticalProperties {
    let phase = match spec.family {
        EnsembleFamily::UniformCircle => {
            if spec.r < 1.0 {
                PhasePrediction::OneComponent
            } else if spec.r == 1.0 {
                PhasePrediction::HalfN
            } else {
                PhasePrediction::FullN
            }
        }
        EnsembleFamily::UniformDisk => {
            if spec.r < 1.0 {
                PhasePrediction::OneComponent
            } else if spec.r == 1.0 {
                PhasePrediction::SqrtOrder
            } else if (spec.r - SQRT_E).abs() < 1e-12 {
                PhasePrediction::BoundaryAmbiguous
            } else if spec.r < SQRT_E {
                PhasePrediction::LinearFraction
            } else {
                PhasePrediction::FullN
            }
        }
    };
    TheoreticalProperties {
        phase,
        profile: PotentialProfile::new(*spec),
    }
}
