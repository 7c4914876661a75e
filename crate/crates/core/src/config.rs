//! Grids, tolerances and sampling parameters for an analysis run.

use serde::{Deserialize, Serialize};

use crate::sampling::DEFAULT_LOG_LAMBDA_MAX;
use crate::tensor2::DET_TOL;

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub seed: u64,
    /// Absolute slack accepted by every inequality check.
    pub tau: f64,
    /// Slacks within `boundary_factor · tau` of zero are flagged as boundary
    /// cases.
    pub boundary_factor: f64,
    /// Oracle violation threshold relative to `max(1, |W|)` on the triple.
    pub oracle_rel_tol: f64,
    pub det_tol: f64,
    pub gamma_max: f64,
    pub gamma_points: usize,
    pub t_max: f64,
    pub t_points: usize,
    /// Points of the E-matrix sweep, log-spaced on `(1, λmax(gamma_max)]`.
    pub lambda_points: usize,
    pub eta_directions: usize,
    pub sep_lambda_min: f64,
    pub sep_lambda_max: f64,
    pub sep_points: usize,
    pub n_f: usize,
    pub n_eta: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub ladder_points: usize,
    pub centers: Vec<f64>,
    pub log_lambda_max: f64,
    pub max_witnesses: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            seed: DEFAULT_SEED,
            tau: 1e-8,
            boundary_factor: 10.0,
            oracle_rel_tol: 1e-9,
            det_tol: DET_TOL,
            gamma_max: 8.0,
            gamma_points: 801,
            t_max: 16.0,
            t_points: 801,
            lambda_points: 40,
            eta_directions: 64,
            sep_lambda_min: 0.25,
            sep_lambda_max: 4.0,
            sep_points: 40,
            n_f: 500,
            n_eta: 16,
            s_min: 0.05,
            s_max: 2.0,
            ladder_points: 12,
            centers: vec![0.0, -0.5, 0.5, -1.0, 1.0],
            log_lambda_max: DEFAULT_LOG_LAMBDA_MAX,
            max_witnesses: 3,
        }
    }
}

impl AnalysisConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn boundary_band(&self) -> f64 {
        self.boundary_factor * self.tau
    }

    /// Geometric ladder of half-widths `s` for the oracle's triples.
    pub fn ladder(&self) -> Vec<f64> {
        crate::grid::log_spaced(self.s_min, self.s_max, self.ladder_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let c: AnalysisConfig = serde_json::from_str(r#"{"seed": 7, "n_f": 10}"#).unwrap();
        assert_eq!((c.seed, c.n_f, c.n_eta), (7, 10, 16));
        assert!(serde_json::from_str::<AnalysisConfig>(r#"{"sede": 7}"#).is_err());
    }

    #[test]
    fn ladder_spans_range() {
        let l = AnalysisConfig::default().ladder();
        assert_eq!(l.len(), 12);
        assert_eq!((l[0], l[11]), (0.05, 2.0));
    }
}
