//! Random polynomial lemniscates at desk scale.
//!
//! A unit lemniscate is the sublevel set {z : |P(z)| < 1} of a degree-n
//! polynomial. This crate samples polynomials with i.i.d. roots (uniform on a
//! disk or a circle), finds their critical points without ever forming
//! coefficients, counts lemniscate components exactly through the critical
//! values, certifies isolated components and good roots from derivative
//! bounds at the roots, and runs the Monte Carlo campaigns that exhibit the
//! component-count scaling laws for the two ensembles.
//!
//! Modules:
//! - [`poly`]: root-form evaluation, log-domain magnitudes, power sums and
//!   elementary symmetric functions of reciprocal root gaps.
//! - [`ensembles`]: seeded samplers for the two root laws.
//! - [`critical`]: simultaneous critical-point solver plus a low-degree
//!   coefficient oracle and root/critical-point pairing statistics.
//! - [`topology`]: exact component counting, a grid flood-fill oracle, and
//!   the isolated/good-root certificates.
//! - [`potential`]: closed-form logarithmic potentials, Cauchy transforms,
//!   moment quadratures, and a CLT diagnostic.
//! - [`experiment`]: parallel trial campaigns, scaling fits, persistence.
//! - [`render`]: marching-squares contour extraction and SVG output.

pub mod critical;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod io;
pub mod poly;
pub mod potential;
pub mod quad;
pub mod render;
pub mod topology;

pub use error::{Error, Result};
pub use poly::{LogEval, PowerSums, RootedPolynomial};
