//! Rank-one convexity and polyconvexity criteria on SL(2), the acoustic
//! tensor route, and a sampling oracle that checks them all.

mod acoustic;
mod oracle;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::energy::ScalarProfile;
use crate::error::Result;
use crate::grid::{self, Slack};
use crate::tensor2::{Mat2, Vec2};

pub use acoustic::{
    acoustic_tensor, acoustic_tensor_fd, acoustic_tensor_normalized, e_matrix_check, e_matrix_sweep, lambda_grid,
    lh_quartic, lh_sweep, AcousticData, EMatrixCheck, LhQuartic, LhSweep,
};
pub use oracle::{rank_one_oracle, OracleStats};
pub use report::{analyze, reconcile, ConvexityReport, Diagnostic};

pub const DFZ: &str = "dfz";
pub const MIELKE: &str = "mielke_polyconvexity";
pub const ABEYARATNE: &str = "abeyaratne";
pub const E_MATRIX: &str = "e_matrix";
pub const RANK_ONE_ORACLE: &str = "rank_one_oracle";
pub const H_CRITERION: &str = "h_criterion";
pub const SEPARATE_CONVEXITY: &str = "separate_convexity";
pub const GLPLUS_ORACLE: &str = "glplus_rank_one_oracle";

/// Routes that must agree on SL(2).
pub const SL2_ROUTES: [&str; 5] = [DFZ, MIELKE, ABEYARATNE, E_MATRIX, RANK_ONE_ORACLE];
/// Routes that must agree on GL⁺(2).
pub const GLPLUS_ROUTES: [&str; 3] = [H_CRITERION, SEPARATE_CONVEXITY, GLPLUS_ORACLE];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inapplicable,
}

/// A rank-one segment `t ↦ F + t·ξ⊗η` on which the energy is not convex:
/// at `t[1]` it exceeds the chord through `t[0]` and `t[2]` by `margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub criterion: String,
    #[serde(rename = "F")]
    pub f: Mat2,
    pub xi: Vec2,
    pub eta: Vec2,
    pub t: [f64; 3],
    pub margin: f64,
}

/// `w1` minus the chord through `(t0, w0)` and `(t2, w2)` evaluated at `t1`.
pub fn chord_margin(t: [f64; 3], w: [f64; 3]) -> f64 {
    let interp = (w[0] * (t[2] - t[1]) + w[2] * (t[1] - t[0])) / (t[2] - t[0]);
    w[1] - interp
}

impl Witness {
    pub fn point(&self, k: usize) -> Mat2 {
        self.f + Mat2::outer(self.xi, self.eta) * self.t[k]
    }

    /// Recomputes the margin from scratch with the given energy.
    pub fn recompute<W>(&self, w: W) -> Result<f64>
    where
        W: Fn(&Mat2) -> Result<f64>,
    {
        Ok(chord_margin(
            self.t,
            [w(&self.point(0))?, w(&self.point(1))?, w(&self.point(2))?],
        ))
    }
}

/// Result of one criterion: its verdict, the smallest value of each tested
/// inequality, and witnesses when it fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub verdict: Verdict,
    pub slacks: BTreeMap<String, Slack>,
    /// Minimal slack lies within the boundary band around zero.
    pub boundary: bool,
    pub witnesses: Vec<Witness>,
}

impl CriterionOutcome {
    pub fn new(verdict: Verdict, slacks: BTreeMap<String, Slack>, band: f64) -> Self {
        let boundary = slacks
            .values()
            .map(|s| s.value)
            .min_by(f64::total_cmp)
            .is_some_and(|v| v.abs() <= band);
        CriterionOutcome {
            verdict,
            slacks,
            boundary,
            witnesses: Vec::new(),
        }
    }

    /// Holds iff every slack is at least `-tau`.
    pub fn from_slacks(slacks: BTreeMap<String, Slack>, tau: f64, band: f64) -> Self {
        let holds = slacks.values().all(|s| s.value >= -tau);
        let verdict = if holds { Verdict::Holds } else { Verdict::Fails };
        Self::new(verdict, slacks, band)
    }

    pub fn inapplicable() -> Self {
        CriterionOutcome {
            verdict: Verdict::Inapplicable,
            slacks: BTreeMap::new(),
            boundary: false,
            witnesses: Vec::new(),
        }
    }

    pub fn min_slack(&self) -> Option<&Slack> {
        self.slacks.values().min_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub(crate) fn relabel(mut self, criterion: &str) -> Self {
        for w in &mut self.witnesses {
            w.criterion = criterion.to_string();
        }
        self
    }
}

/// Monotonicity and convexity of sampled values by divided differences.
pub(crate) fn divided_difference_slacks(xs: &[f64], fs: &[f64]) -> BTreeMap<String, Slack> {
    let mut slacks = BTreeMap::new();
    if let Some(s) = grid::min_slope(xs, fs) {
        slacks.insert("monotone".to_string(), s);
    }
    if let Some(s) = grid::min_second_difference(xs, fs) {
        slacks.insert("convex".to_string(), s);
    }
    slacks
}

/// The shear-line witness for a failed monotonicity or convexity test of
/// `φ`: along `shear(t)` the energy is `φ(|t|)`.
fn shear_line_witness(criterion: &str, slack: &Slack, phi: &ScalarProfile) -> Result<Witness> {
    let t = match *slack.at.as_slice() {
        [a, b] => [-b, a, b],
        [a, b, c] => [a, b, c],
        _ => unreachable!("slack locations are pairs or triples"),
    };
    let w = [phi.eval(t[0].abs())?, phi.eval(t[1].abs())?, phi.eval(t[2].abs())?];
    Ok(Witness {
        criterion: criterion.to_string(),
        f: Mat2::IDENTITY,
        xi: [1.0, 0.0],
        eta: [0.0, 1.0],
        t,
        margin: chord_margin(t, w),
    })
}

/// The shear-profile criterion: `φ` nondecreasing and convex on the γ-grid.
pub fn dfz_check(phi: &ScalarProfile, cfg: &AnalysisConfig) -> Result<CriterionOutcome> {
    let xs = grid::uniform(0.0, cfg.gamma_max, cfg.gamma_points);
    let fs = grid::sample(&xs, |g| phi.eval(g))?;
    let slacks = divided_difference_slacks(&xs, &fs);
    let mut out = CriterionOutcome::from_slacks(slacks, cfg.tau, cfg.boundary_band());
    for s in out.slacks.values() {
        if s.value < -cfg.tau {
            out.witnesses.push(shear_line_witness(DFZ, s, phi)?);
        }
    }
    Ok(out)
}

/// Polyconvexity on SL(2) in the sense of the `+∞` extension; the predicate
/// coincides with [`dfz_check`].
pub fn mielke_polyconvexity_check(phi: &ScalarProfile, cfg: &AnalysisConfig) -> Result<CriterionOutcome> {
    Ok(dfz_check(phi, cfg)?.relabel(MIELKE))
}

/// `I`-grid matching the γ-grid, `I = 2 + γ²`, without `I = 2`.
pub fn invariant_grid(cfg: &AnalysisConfig) -> Vec<f64> {
    grid::uniform(0.0, cfg.gamma_max, cfg.gamma_points)
        .into_iter()
        .skip(1)
        .map(|g| 2.0 + g * g)
        .collect()
}

/// `ψ′ ≥ 0` and `ψ′ + 2(I − 2)ψ″ ≥ 0` on the `I`-grid; points for which
/// `skip` returns true are not tested.
pub fn abeyaratne_check_with(
    psi: &ScalarProfile,
    cfg: &AnalysisConfig,
    skip: &dyn Fn(f64) -> bool,
) -> Result<CriterionOutcome> {
    let mut first: Option<Slack> = None;
    let mut combo: Option<Slack> = None;
    for i in invariant_grid(cfg) {
        if skip(i) {
            continue;
        }
        let d1 = psi.d1(i).map_err(|e| e.at("I", i))?;
        let d2 = psi.d2(i).map_err(|e| e.at("I", i))?;
        let c = d1 + 2.0 * (i - 2.0) * d2;
        first = Slack::min(first, Some(Slack::new(d1, vec![i])));
        combo = Slack::min(combo, Some(Slack::new(c, vec![i])));
    }
    let mut slacks = BTreeMap::new();
    if let Some(s) = first {
        slacks.insert("psi_prime".to_string(), s);
    }
    if let Some(s) = combo {
        slacks.insert("combination".to_string(), s);
    }
    Ok(CriterionOutcome::from_slacks(slacks, cfg.tau, cfg.boundary_band()))
}

pub fn abeyaratne_check(psi: &ScalarProfile, cfg: &AnalysisConfig) -> Result<CriterionOutcome> {
    abeyaratne_check_with(psi, cfg, &|_| false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(f: fn(f64) -> f64) -> ScalarProfile {
        ScalarProfile::from_fn("gamma", 0.0, f)
    }

    fn psi(f: fn(f64) -> f64, d1: fn(f64) -> f64, d2: fn(f64) -> f64) -> ScalarProfile {
        ScalarProfile::from_fn("I", 2.0, f).with_derivatives(d1, d2)
    }

    #[test]
    fn dfz_examples() {
        let cfg = AnalysisConfig::default();
        assert!(dfz_check(&phi(|g| g * g), &cfg).unwrap().holds());
        let neg = dfz_check(&phi(|g| -g), &cfg).unwrap();
        assert_eq!(neg.verdict, Verdict::Fails);
        assert!(neg.slacks["monotone"].value < 0.0);
        assert!(neg.witnesses.iter().all(|w| w.margin > 0.0));
        let sqrt = dfz_check(&phi(f64::sqrt), &cfg).unwrap();
        assert_eq!(sqrt.verdict, Verdict::Fails);
        assert!(sqrt.slacks["convex"].value < 0.0);
        assert!(sqrt.slacks["monotone"].value > 0.0);
    }

    #[test]
    fn dfz_on_unit_grid_matches_hand_value() {
        let cfg = AnalysisConfig {
            gamma_max: 3.0,
            gamma_points: 4,
            ..AnalysisConfig::default()
        };
        let out = dfz_check(&phi(f64::sqrt), &cfg).unwrap();
        let convex = &out.slacks["convex"];
        assert_eq!(convex.at, vec![0.0, 1.0, 2.0]);
        let at_one = 3f64.sqrt() - 2.0 * 2f64.sqrt() + 1.0;
        assert!((at_one + 0.0964).abs() < 1e-4);
        assert!(convex.value < at_one);
    }

    #[test]
    fn mielke_examples() {
        let cfg = AnalysisConfig::default();
        let lin = mielke_polyconvexity_check(&phi(|g| g), &cfg).unwrap();
        assert!(lin.holds());
        assert!(lin.boundary);
        assert!(mielke_polyconvexity_check(&phi(|g| g * g), &cfg).unwrap().holds());
        let neg = mielke_polyconvexity_check(&phi(|g| -g), &cfg).unwrap();
        assert_eq!(neg.verdict, Verdict::Fails);
        assert!(neg.witnesses.iter().all(|w| w.criterion == MIELKE));
    }

    #[test]
    fn abeyaratne_examples() {
        let cfg = AnalysisConfig::default();
        let id = abeyaratne_check(&psi(|i| i, |_| 1.0, |_| 0.0), &cfg).unwrap();
        assert!(id.holds());
        assert_eq!(id.slacks["combination"].value, 1.0);
        let root = psi(
            |i| (i - 2.0).sqrt(),
            |i| 0.5 / (i - 2.0).sqrt(),
            |i| -0.25 * (i - 2.0).powf(-1.5),
        );
        let out = abeyaratne_check(&root, &cfg).unwrap();
        assert!(out.holds());
        assert!(out.boundary);
        assert!(out.slacks["combination"].value.abs() < 1e-10);
        let neg = abeyaratne_check(&psi(|i| -i, |_| -1.0, |_| 0.0), &cfg).unwrap();
        assert_eq!(neg.verdict, Verdict::Fails);
        assert_eq!(neg.slacks["psi_prime"].value, -1.0);
    }

    #[test]
    fn witness_margin_recomputes() {
        let w = Witness {
            criterion: DFZ.into(),
            f: Mat2::IDENTITY,
            xi: [1.0, 0.0],
            eta: [0.0, 1.0],
            t: [-1.0, 0.5, 1.0],
            margin: 0.0,
        };
        let m = w.recompute(|f| Ok(-crate::tensor2::singular_values(f)?.gamma)).unwrap();
        assert!((m - 0.5).abs() < 1e-12);
    }
}
