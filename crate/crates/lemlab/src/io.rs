//! The canonical roots JSON document shared by all CLI subcommands.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::critical::CriticalSet;
use crate::ensembles::{EnsembleFamily, EnsembleSpec, SeedPolicy};
use crate::error::{Error, Result};
use crate::poly::RootedPolynomial;

/// Serialized root set:
/// {"n": int, "family": "disk"|"circle", "r": float, "seed": [master, trial],
///  "roots": [[re, im], ...]} with optional solved critical points attached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootsDocument {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<EnsembleFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<[u64; 2]>,
    pub roots: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
}

impl RootsDocument {
    pub fn from_sample(spec: &EnsembleSpec, seed: &SeedPolicy, poly: &RootedPolynomial) -> Self {
        Self {
            n: poly.degree(),
            family: Some(spec.family),
            r: Some(spec.r),
            seed: Some([seed.master_seed, seed.trial_index]),
            roots: poly.roots().iter().map(|x| [x.re, x.im]).collect(),
            critical_points: None,
            residuals: None,
        }
    }

    pub fn from_roots(poly: &RootedPolynomial) -> Self {
        Self {
            n: poly.degree(),
            family: None,
            r: poly.support_radius(),
            seed: None,
            roots: poly.roots().iter().map(|x| [x.re, x.im]).collect(),
            critical_points: None,
            residuals: None,
        }
    }

    pub fn with_critical(mut self, cps: &CriticalSet) -> Self {
        self.critical_points = Some(cps.points.iter().map(|b| [b.re, b.im]).collect());
        self.residuals = Some(cps.residuals.clone());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != self.roots.len() {
            return Err(Error::InvalidInput(format!(
                "document says n = {} but carries {} roots",
                self.n,
                self.roots.len()
            )));
        }
        if self.roots.is_empty() {
            return Err(Error::InvalidInput("document carries no roots".into()));
        }
        if self
            .roots
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::InvalidInput("roots must be finite".into()));
        }
        if let Some(r) = self.r {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::InvalidInput(format!("document scale r = {r} is invalid")));
            }
        }
        if let Some(cps) = &self.critical_points {
            if cps.len() != self.n - 1 {
                return Err(Error::InvalidInput(format!(
                    "document carries {} critical points for degree {}",
                    cps.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn to_polynomial(&self) -> Result<RootedPolynomial> {
        self.validate()?;
        let roots: Vec<Complex64> = self
            .roots
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        match self.r {
            Some(r) => RootedPolynomial::with_support_radius(roots, r),
            None => RootedPolynomial::new(roots),
        }
    }

    pub fn critical_set(&self) -> Option<CriticalSet> {
        let pts = self.critical_points.as_ref()?;
        let points: Vec<Complex64> = pts.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let residuals = self
            .residuals
            .clone()
            .unwrap_or_else(|| vec![0.0; points.len()]);
        let converged = vec![true; points.len()];
        Some(CriticalSet {
            points,
            residuals,
            iterations: 0,
            converged,
        })
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let doc: RootsDocument = serde_json::from_reader(reader)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_polynomial;

    #[test]
    fn sample_document_round_trips() {
        let spec = EnsembleSpec::new(EnsembleFamily::UniformCircle, 1.0, 5).unwrap();
        let seed = SeedPolicy::new(1, 0);
        let poly = sample_polynomial(&spec, &seed);
        let doc = RootsDocument::from_sample(&spec, &seed, &poly);
        let text = doc.to_json_string().unwrap();
        let back = RootsDocument::from_reader(text.as_bytes()).unwrap();
        assert_eq!(back.n, 5);
        assert_eq!(back.roots, doc.roots);
        let poly2 = back.to_polynomial().unwrap();
        assert_eq!(poly2.roots(), poly.roots());
    }

    #[test]
    fn degree_mismatch_is_rejected() {
        let text = r#"{"n": 3, "roots": [[0.0, 0.0]]}"#;
        assert!(RootsDocument::from_reader(text.as_bytes()).is_err());
    }

    #[test]
    fn manual_document_needs_no_metadata() {
        let text = r#"{"n": 2, "roots": [[0.5, 0.0], [-0.5, 0.0]]}"#;
        let doc = RootsDocument::from_reader(text.as_bytes()).unwrap();
        let poly = doc.to_polynomial().unwrap();
        assert_eq!(poly.degree(), 2);
        assert_eq!(poly.support_radius(), None);
    }
}
