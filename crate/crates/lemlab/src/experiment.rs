//! Parallel Monte Carlo campaigns over (ensemble, degree) grids, scaling
//! fits, and result persistence.
//!
//! Trials are indexed and seeded independently, then aggregated in index
//! order, so a campaign's output is identical for any worker count.

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::{pairing_statistics, solve_critical_points, SolveOptions};
use crate::ensembles::{
    sample_polynomial, theoretical_properties, EnsembleFamily, EnsembleSpec, PhasePrediction,
    SeedPolicy,
};
use crate::error::{Error, Result};
use crate::topology::{count_components_exact, count_components_grid, count_isolated, DEGENERACY_TOL};

pub const RESULT_SCHEMA: &str = "lemlab-result/1";

/// Which counter(s) to run per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CountMethodChoice {
    #[default]
    Exact,
    Grid,
    Both,
}

fn default_grid_resolution() -> usize {
    1024
}

/// Where a campaign writes its results.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<std::path::PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: EnsembleFamily,
    pub r: f64,
    pub degrees: Vec<usize>,
    pub trials_per_degree: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub count_method: CountMethodChoice,
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputPaths>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(Error::InvalidInput(format!("scale r must be positive, got {}", self.r)));
        }
        if self.degrees.is_empty() {
            return Err(Error::InvalidInput("need at least one degree".into()));
        }
        if !self.degrees.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("degrees must be strictly increasing".into()));
        }
        if self.degrees[0] == 0 {
            return Err(Error::InvalidInput("degrees must be at least 1".into()));
        }
        if self.trials_per_degree == 0 {
            return Err(Error::InvalidInput("need at least one trial per degree".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrialRecord {
    count: u32,
    grid_count: Option<u32>,
    isolated: u32,
    pairing_fraction: Option<f64>,
    degenerate: bool,
}

/// Aggregates for one degree, with the per-trial data kept for bootstrap
/// resampling and audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeStats {
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub mean_count: f64,
    pub stderr_count: f64,
    pub mean_isolated: f64,
    pub mean_count_over_n: f64,
    pub pairing_fraction: Option<f64>,
    pub pairing_stderr: Option<f64>,
    pub degenerate_rate: f64,
    pub wall_time_secs: f64,
    pub counts: Vec<u32>,
    pub grid_counts: Vec<Option<u32>>,
    pub isolated_counts: Vec<u32>,
    pub pairing_fractions: Vec<Option<f64>>,
}

impl DegreeStats {
    pub fn fraction_exactly_one(&self) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        self.counts.iter().filter(|&&c| c == 1).count() as f64 / self.counts.len() as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: String,
    pub config: ExperimentConfig,
    pub per_degree: Vec<DegreeStats>,
    pub total_failures: usize,
    /// False when more than 1% of trials failed to converge.
    pub valid: bool,
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn run_trial(
    spec: &EnsembleSpec,
    seed: SeedPolicy,
    method: CountMethodChoice,
    grid_resolution: usize,
) -> Result<TrialRecord> {
    let poly = sample_polynomial(spec, &seed);
    let (count, grid_count, degenerate, cps) = match method {
        CountMethodChoice::Grid => {
            let report = count_components_grid(&poly, grid_resolution);
            (report.count as u32, Some(report.count as u32), report.degenerate, None)
        }
        CountMethodChoice::Exact | CountMethodChoice::Both => {
            let cps = solve_critical_points(&poly, &SolveOptions::default())?;
            let report = count_components_exact(&poly, &cps, DEGENERACY_TOL)?;
            let grid = if method == CountMethodChoice::Both {
                Some(count_components_grid(&poly, grid_resolution).count as u32)
            } else {
                None
            };
            (report.count as u32, grid, report.degenerate, Some(cps))
        }
    };
    let isolated = count_isolated(&poly)? as u32;
    let pairing_fraction = match &cps {
        Some(cps) => pairing_statistics(&poly, cps)?.annulus_unique_fraction(),
        None => None,
    };
    Ok(TrialRecord {
        count,
        grid_count,
        isolated,
        pairing_fraction,
        degenerate,
    })
}

/// Run every (degree, trial) cell of the config. Per-trial seeds derive from
/// (master_seed, degree_index << 32 | trial), so results do not depend on
/// scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut per_degree = Vec::with_capacity(config.degrees.len());
    let mut total_failures = 0usize;
    for (degree_idx, &n) in config.degrees.iter().enumerate() {
        let spec = EnsembleSpec::new(config.family, config.r, n)?;
        let started = Instant::now();
        let outcomes: Vec<Result<TrialRecord>> = (0..config.trials_per_degree as u64)
            .into_par_iter()
            .map(|trial| {
                let seed = SeedPolicy::new(
                    config.master_seed,
                    ((degree_idx as u64) << 32) | trial,
                );
                run_trial(&spec, seed, config.count_method, config.grid_resolution)
            })
            .collect();
        let wall_time_secs = started.elapsed().as_secs_f64();

        let mut records = Vec::with_capacity(outcomes.len());
        let mut failures = 0usize;
        for outcome in outcomes {
            match outcome {
                Ok(rec) => records.push(rec),
                // Unconverged solves and the measure-zero repeated-root draws
                // are recorded failures, not campaign killers.
                Err(err)
                    if err.is_numerical()
                        || matches!(
                            err,
                            Error::MultipleRootInput { .. } | Error::MultipleRoot { .. }
                        ) =>
                {
                    failures += 1
                }
                Err(err) => return Err(err),
            }
        }
        total_failures += failures;

        let (mean_count, stderr_count) =
            mean_and_stderr(records.iter().map(|r| r.count as f64));
        let (mean_isolated, _) = mean_and_stderr(records.iter().map(|r| r.isolated as f64));
        let pair_values: Vec<f64> = records.iter().filter_map(|r| r.pairing_fraction).collect();
        let (pairing_fraction, pairing_stderr) = if pair_values.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_and_stderr(pair_values.iter().copied());
            (Some(m), Some(s))
        };
        let degenerate_rate = if records.is_empty() {
            0.0
        } else {
            records.iter().filter(|r| r.degenerate).count() as f64 / records.len() as f64
        };
        per_degree.push(DegreeStats {
            n,
            trials: records.len(),
            failures,
            mean_count,
            stderr_count,
            mean_isolated,
            mean_count_over_n: mean_count / n as f64,
            pairing_fraction,
            pairing_stderr,
            degenerate_rate,
            wall_time_secs,
            counts: records.iter().map(|r| r.count).collect(),
            grid_counts: records.iter().map(|r| r.grid_count).collect(),
            isolated_counts: records.iter().map(|r| r.isolated).collect(),
            pairing_fractions: records.iter().map(|r| r.pairing_fraction).collect(),
        });
    }
    let total_trials = config.degrees.len() * config.trials_per_degree;
    let valid = (total_failures as f64) < 0.01 * total_trials as f64;
    Ok(ExperimentResult {
        schema_version: RESULT_SCHEMA.to_string(),
        config: config.clone(),
        per_degree,
        total_failures,
        valid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    PowerLaw,
    LinearRatio,
}

/// A fitted scaling law with a bootstrap (power law) or normal (ratio)
/// confidence interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: FitModel,
    /// PowerLaw: the log-log slope. LinearRatio: mean_count/n at the
    /// largest degree.
    pub estimate: f64,
    pub confidence_interval: (f64, f64),
    /// PowerLaw: fit residuals per degree. LinearRatio: the ratio sequence
    /// across degrees for trend inspection.
    pub residuals: Vec<f64>,
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

const BOOTSTRAP_RESAMPLES: usize = 1000;

pub fn scaling_fit(result: &ExperimentResult, model: FitModel) -> Result<ScalingFit> {
    let degrees = &result.per_degree;
    if degrees.len() < 4 {
        return Err(Error::InsufficientData {
            min: 4,
            got: degrees.len(),
        });
    }
    match model {
        FitModel::PowerLaw => {
            let xs: Vec<f64> = degrees.iter().map(|d| (d.n as f64).ln()).collect();
            let ys: Vec<f64> = degrees.iter().map(|d| d.mean_count.ln()).collect();
            let (slope, intercept) = ols_slope(&xs, &ys);
            let residuals: Vec<f64> = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| y - (intercept + slope * x))
                .collect();
            // Bootstrap over trials within each degree.
            let mut rng = ChaCha8Rng::seed_from_u64(
                result.config.master_seed ^ 0xB007_57A9_D00D_F00Du64,
            );
            let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
            for _ in 0..BOOTSTRAP_RESAMPLES {
                let mut ok = true;
                let ys_b: Vec<f64> = degrees
                    .iter()
                    .map(|d| {
                        let m = d.counts.len();
                        let mean = (0..m)
                            .map(|_| d.counts[rng.random_range(0..m)] as f64)
                            .sum::<f64>()
                            / m as f64;
                        if mean <= 0.0 {
                            ok = false;
                        }
                        mean.max(f64::MIN_POSITIVE).ln()
                    })
                    .collect();
                if ok {
                    slopes.push(ols_slope(&xs, &ys_b).0);
                }
            }
            slopes.sort_by(f64::total_cmp);
            let lo = slopes[(slopes.len() as f64 * 0.025) as usize];
            let hi = slopes[((slopes.len() as f64 * 0.975) as usize).min(slopes.len() - 1)];
            Ok(ScalingFit {
                model,
                estimate: slope,
                confidence_interval: (lo, hi),
                residuals,
            })
        }
        FitModel::LinearRatio => {
            let ratios: Vec<f64> = degrees.iter().map(|d| d.mean_count_over_n).collect();
            let last = degrees.last().expect("nonempty");
            let ratio = last.mean_count_over_n;
            let half = 1.96 * last.stderr_count / last.n as f64;
            Ok(ScalingFit {
                model,
                estimate: ratio,
                confidence_interval: (ratio - half, ratio + half),
                residuals: ratios,
            })
        }
    }
}

/// One row of a phase sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseRow {
    pub family: EnsembleFamily,
    pub r: f64,
    pub n: usize,
    pub trials: usize,
    pub mean_count: f64,
    pub ratio: f64,
    pub fraction_exactly_one: f64,
    pub prediction: PhasePrediction,
    /// Pass/fail against the predicted regime; `None` for critical-scale
    /// rows where the regime is an order, not a bracket.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub rows: Vec<PhaseRow>,
}

/// Mean counts across r values at fixed degree, each tagged with the phase
/// prediction and a pass/fail where the prediction pins one down.
pub fn phase_sweep(
    family: EnsembleFamily,
    r_values: &[f64],
    n: usize,
    trials: usize,
    master_seed: u64,
) -> Result<PhaseSweep> {
    let mut rows = Vec::with_capacity(r_values.len());
    for (i, &r) in r_values.iter().enumerate() {
        let config = ExperimentConfig {
            family,
            r,
            degrees: vec![n],
            trials_per_degree: trials,
            master_seed: master_seed.wrapping_add(i as u64),
            count_method: CountMethodChoice::Exact,
            grid_resolution: default_grid_resolution(),
            outputs: None,
        };
        let result = run_experiment(&config)?;
        let stats = &result.per_degree[0];
        let spec = EnsembleSpec::new(family, r, n)?;
        let prediction = theoretical_properties(&spec).phase;
        let ratio = stats.mean_count_over_n;
        let pass = match prediction {
            PhasePrediction::OneComponent => Some(stats.fraction_exactly_one() >= 0.99),
            PhasePrediction::FullN => Some(stats.mean_count >= 0.99 * n as f64),
            PhasePrediction::LinearFraction => Some(ratio > 0.02 && ratio < 0.98),
            PhasePrediction::SqrtOrder
            | PhasePrediction::HalfN
            | PhasePrediction::BoundaryAmbiguous => None,
        };
        rows.push(PhaseRow {
            family,
            r,
            n,
            trials: stats.trials,
            mean_count: stats.mean_count,
            ratio,
            fraction_exactly_one: stats.fraction_exactly_one(),
            prediction,
            pass,
        });
    }
    Ok(PhaseSweep { rows })
}

/// One row of a pairing campaign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingRow {
    pub n: usize,
    pub fraction: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: usize,
    /// True when the annulus D_n held no roots and the row is excluded from
    /// trend checks.
    pub excluded: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingCampaign {
    pub rows: Vec<PairingRow>,
}

/// Fraction of annulus roots with a unique critical point within n^{-3/4},
/// per degree, for the unit-disk ensemble.
pub fn pairing_campaign(
    degrees: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<PairingCampaign> {
    let config = ExperimentConfig {
        family: EnsembleFamily::UniformDisk,
        r: 1.0,
        degrees: degrees.to_vec(),
        trials_per_degree: trials,
        master_seed,
        count_method: CountMethodChoice::Exact,
        grid_resolution: default_grid_resolution(),
        outputs: None,
    };
    let result = run_experiment(&config)?;
    let rows = result
        .per_degree
        .iter()
        .map(|d| PairingRow {
            n: d.n,
            fraction: d.pairing_fraction,
            stderr: d.pairing_stderr,
            trials: d.trials,
            excluded: d.pairing_fraction.is_none(),
        })
        .collect();
    Ok(PairingCampaign { rows })
}

/// Write a result as schema-versioned JSON.
pub fn persist(result: &ExperimentResult, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(result)?)?;
    Ok(())
}

/// Read a result back, rejecting unknown schema versions.
pub fn load(path: &Path) -> Result<ExperimentResult> {
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_str())
        .unwrap_or("<missing>")
        .to_string();
    if found != RESULT_SCHEMA {
        return Err(Error::SchemaVersion {
            found,
            expected: RESULT_SCHEMA.to_string(),
        });
    }
    Ok(serde_json::from_value(value)?)
}

/// CSV export, one row per degree point.
pub fn export_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    writer
        .write_record([
            "family",
            "r",
            "n",
            "trials",
            "mean_count",
            "stderr",
            "mean_isolated",
            "ratio",
            "pairing_fraction",
            "degenerate_rate",
            "seconds",
        ])
        .map_err(csv_err)?;
    for d in &result.per_degree {
        writer
            .write_record([
                result.config.family.to_string(),
                format!("{}", result.config.r),
                format!("{}", d.n),
                format!("{}", d.trials),
                format!("{}", d.mean_count),
                format!("{}", d.stderr_count),
                format!("{}", d.mean_isolated),
                format!("{}", d.mean_count_over_n),
                d.pairing_fraction.map(|f| f.to_string()).unwrap_or_default(),
                format!("{}", d.degenerate_rate),
                format!("{}", d.wall_time_secs),
            ])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_err(err: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {err}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            family: EnsembleFamily::UniformCircle,
            r: 1.0,
            degrees: vec![8, 12],
            trials_per_degree: 10,
            master_seed: 7,
            count_method: CountMethodChoice::Exact,
            grid_resolution: 512,
            outputs: None,
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let config = tiny_config();
        let mut a = run_experiment(&config).unwrap();
        let mut b = run_experiment(&config).unwrap();
        // Identical in everything but wall time.
        for d in a.per_degree.iter_mut().chain(b.per_degree.iter_mut()) {
            d.wall_time_secs = 0.0;
        }
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn counts_stay_within_bounds() {
        let result = run_experiment(&tiny_config()).unwrap();
        for d in &result.per_degree {
            for &c in &d.counts {
                assert!(c >= 1 && c as usize <= d.n);
            }
            assert!(d.mean_isolated <= d.mean_count);
        }
    }

    #[test]
    fn degrees_must_increase() {
        let mut config = tiny_config();
        config.degrees = vec![12, 8];
        assert!(run_experiment(&config).is_err());
    }

    #[test]
    fn synthetic_power_law_recovers_exact_slope() {
        // mean_count = 3 sqrt(n) exactly: slope 1/2, CI collapsed.
        let degrees = [16usize, 64, 256, 1024];
        let per_degree: Vec<DegreeStats> = degrees
            .iter()
            .map(|&n| {
                let count = (3.0 * (n as f64).sqrt()).round() as u32;
                DegreeStats {
                    n,
                    trials: 5,
                    failures: 0,
                    mean_count: 3.0 * (n as f64).sqrt(),
                    stderr_count: 0.0,
                    mean_isolated: 0.0,
                    mean_count_over_n: 3.0 / (n as f64).sqrt(),
                    pairing_fraction: None,
                    pairing_stderr: None,
                    degenerate_rate: 0.0,
                    wall_time_secs: 0.0,
                    counts: vec![count; 5],
                    grid_counts: vec![None; 5],
                    isolated_counts: vec![0; 5],
                    pairing_fractions: vec![None; 5],
                }
            })
            .collect();
        // Rebuild exact means so the slope is exactly 1/2 despite rounding.
        let mut result = ExperimentResult {
            schema_version: RESULT_SCHEMA.into(),
            config: tiny_config(),
            per_degree,
            total_failures: 0,
            valid: true,
        };
        for d in &mut result.per_degree {
            let exact = 3.0 * (d.n as f64).sqrt();
            d.counts = vec![exact.round() as u32; 5];
            d.mean_count = exact;
        }
        let fit = scaling_fit(&result, FitModel::PowerLaw).unwrap();
        assert!((fit.estimate - 0.5).abs() < 1e-12);
        // Zero-variance trials collapse the bootstrap CI onto the rounded
        // means' slope.
        assert!(fit.confidence_interval.1 - fit.confidence_interval.0 < 0.02);
    }

    #[test]
    fn scaling_fit_needs_four_degrees() {
        let result = run_experiment(&tiny_config()).unwrap();
        let err = scaling_fit(&result, FitModel::LinearRatio).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
    }

    #[test]
    fn persist_load_round_trip() {
        let result = run_experiment(&tiny_config()).unwrap();
        let dir = std::env::temp_dir().join("lemlab-test-persist");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("result.json");
        persist(&result, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(
            serde_json::to_string(&result).unwrap(),
            serde_json::to_string(&back).unwrap()
        );
        let csv_path = dir.join("result.csv");
        export_csv(&result, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert_eq!(text.lines().count(), 1 + result.per_degree.len());
    }

    #[test]
    fn unknown_schema_version_is_rejected() {
        let dir = std::env::temp_dir().join("lemlab-test-schema");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("weird.json");
        std::fs::write(&path, r#"{"schema_version": "lemlab-result/999"}"#).unwrap();
        assert!(matches!(load(&path), Err(Error::SchemaVersion { .. })));
    }

    #[test]
    fn pairing_campaign_excludes_empty_annulus() {
        // The annulus D_n is empty until about n = 92 (the inner radius
        // 3 n^{-1/4} exceeds the outer 1 - n^{-1/2}), so small-degree rows
        // carry no fraction and are excluded from trend checks.
        let campaign = pairing_campaign(&[2, 128], 4, 3).unwrap();
        assert!(campaign.rows[0].excluded);
        assert!(campaign.rows[0].fraction.is_none());
        assert!(!campaign.rows[1].excluded);
    }

    #[test]
    fn grid_and_exact_methods_both_run() {
        let mut config = tiny_config();
        config.degrees = vec![6];
        config.trials_per_degree = 4;
        config.count_method = CountMethodChoice::Both;
        let result = run_experiment(&config).unwrap();
        let d = &result.per_degree[0];
        for (c, g) in d.counts.iter().zip(&d.grid_counts) {
            let g = g.expect("grid count present under Both");
            // Oracle agreement at tiny degree.
            assert_eq!(*c, g);
        }
    }
}
