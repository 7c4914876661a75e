use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CriterionOutcome, Verdict};
use crate::config::AnalysisConfig;
use crate::energy::{shear_lambda, ScalarProfile};
use crate::error::{Error, Result};
use crate::grid::{self, Slack};
use crate::sampling::direction_grid;
use crate::tensor2::{norm2, singular_values, Mat2, Vec2, DET_TOL};

const UNIT_TOL: f64 = 1e-12;
const UNIMODULAR_TOL: f64 = 1e-10;

/// Acoustic tensor of `F ↦ ψ(‖F‖²)` at `(F, η)` together with the E-matrix
/// entries at the singular values of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcousticData {
    pub q: Mat2,
    pub e11: f64,
    pub e22: f64,
    pub e12: f64,
    #[serde(rename = "I")]
    pub i: f64,
}

fn check_unit(eta: Vec2) -> Result<()> {
    let n = norm2(eta);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitVector { norm: n });
    }
    Ok(())
}

fn check_unimodular(l1: f64, l2: f64) -> Result<()> {
    let p = l1 * l2;
    if !p.is_finite() || (p - 1.0).abs() > UNIMODULAR_TOL || l1 <= 0.0 || l2 <= 0.0 {
        return Err(Error::NotUnimodular { product: p });
    }
    Ok(())
}

struct EEntries {
    e11: f64,
    e22: f64,
    e12: f64,
    d1: f64,
    d2: f64,
    i: f64,
}

fn e_entries(psi: &ScalarProfile, l1: f64, l2: f64) -> Result<EEntries> {
    let (a, b) = (l1 * l1, l2 * l2);
    let i = a + b;
    let d1 = psi.d1(i).map_err(|e| e.at("I", i))?;
    let d2 = psi.d2(i).map_err(|e| e.at("I", i))?;
    Ok(EEntries {
        e11: b * d1,
        e22: a * d1,
        e12: 0.5 * ((a + b) * d1 + 2.0 * (a - b) * (a - b) * d2),
        d1,
        d2,
        i,
    })
}

/// `Q = 4ψ″(I)·(Fη)⊗(Fη) + 2ψ′(I)·|η|²·Id` with `I = ‖F‖²`.
pub fn acoustic_tensor(psi: &ScalarProfile, f: &Mat2, eta: Vec2) -> Result<AcousticData> {
    check_unit(eta)?;
    f.check_sl2(DET_TOL)?;
    let i = f.norm_sq();
    let d1 = psi.d1(i).map_err(|e| e.at("I", i))?;
    let d2 = psi.d2(i).map_err(|e| e.at("I", i))?;
    let fe = f.mul_vec(eta);
    let q = Mat2::outer(fe, fe) * (4.0 * d2) + Mat2::IDENTITY * (2.0 * d1 * norm2(eta).powi(2));
    let sp = singular_values(f)?;
    let e = e_entries(psi, sp.lmax, sp.lmin)?;
    Ok(AcousticData {
        q,
        e11: e.e11,
        e22: e.e22,
        e12: e.e12,
        i,
    })
}

/// As [`acoustic_tensor`], normalising `η` instead of rejecting it.
pub fn acoustic_tensor_normalized(psi: &ScalarProfile, f: &Mat2, eta: Vec2) -> Result<AcousticData> {
    let n = norm2(eta);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    acoustic_tensor(psi, f, [eta[0] / n, eta[1] / n])
}

/// Acoustic tensor from a fourth-order central-difference second derivative
/// of `G(F) = ψ(‖F‖²)` along `e_α⊗η`, using only values of `ψ`; off-diagonal
/// entries by polarisation.
pub fn acoustic_tensor_fd(psi: &ScalarProfile, f: &Mat2, eta: Vec2) -> Result<Mat2> {
    let h = 1e-3;
    let second = |a: Vec2| -> Result<f64> {
        let dir = Mat2::outer(a, eta);
        let g = |s: f64| psi.eval_extended((*f + dir * s).norm_sq());
        Ok((-g(2.0 * h)? + 16.0 * g(h)? - 30.0 * g(0.0)? + 16.0 * g(-h)? - g(-2.0 * h)?) / (12.0 * h * h))
    };
    let q11 = second([1.0, 0.0])?;
    let q22 = second([0.0, 1.0])?;
    let q12 = 0.25 * (second([1.0, 1.0])? - second([1.0, -1.0])?);
    Ok(Mat2::new(q11, q12, q12, q22))
}

/// The Legendre–Hadamard quartic along a tangent rank-one direction at
/// `diag(λ₁, λ₂)`.
///
/// `printed` squares the coefficient of `ψ′`, `(λ₁²η₂² + λ₂²η₁²)²ψ′ + …`.
/// Differentiating `ψ(‖F + tξ⊗η‖²)` twice gives `direct`, where the
/// coefficient is not squared; `expanded` is the E-matrix quadratic form
/// `E11η₁⁴ + E22η₂⁴ + 2E12η₁²η₂²`, equal to `direct·|η|²`. The two printed
/// variants differ, so all three are returned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhQuartic {
    pub printed: f64,
    pub expanded: f64,
    pub direct: f64,
    /// `|printed − expanded|`.
    pub discrepancy: f64,
}

pub fn lh_quartic(psi: &ScalarProfile, l1: f64, l2: f64, eta: Vec2) -> Result<LhQuartic> {
    check_unimodular(l1, l2)?;
    check_unit(eta)?;
    let e = e_entries(psi, l1, l2)?;
    let (a, b) = (l1 * l1, l2 * l2);
    let (p, q) = (eta[0] * eta[0], eta[1] * eta[1]);
    let coef = a * q + b * p;
    let cross = 2.0 * (a - b) * (a - b) * p * q * e.d2;
    let printed = coef * coef * e.d1 + cross;
    let direct = coef * e.d1 + cross;
    let expanded = e.e11 * p * p + e.e22 * q * q + 2.0 * e.e12 * p * q;
    Ok(LhQuartic {
        printed,
        expanded,
        direct,
        discrepancy: (printed - expanded).abs(),
    })
}

/// E-matrix test at `(λ₁, λ₂)` by both routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EMatrixCheck {
    pub e11: f64,
    pub e22: f64,
    pub e12: f64,
    pub det: f64,
    #[serde(rename = "I")]
    pub i: f64,
    /// `min(E11, E22, max(E12, det E))`.
    pub entry_slack: f64,
    /// `min(ψ′, ψ′ + 2(I − 2)ψ″)`.
    pub psi_slack: f64,
    pub holds: bool,
    pub psi_route_holds: bool,
}

/// `E11, E22 ≥ −τ` and (`E12 ≥ −τ` or `det E ≥ −τ`): the quadratic form is
/// nonnegative on the positive cone.
pub fn e_matrix_check(psi: &ScalarProfile, l1: f64, l2: f64, tau: f64) -> Result<EMatrixCheck> {
    check_unimodular(l1, l2)?;
    let e = e_entries(psi, l1, l2)?;
    let det = e.e11 * e.e22 - e.e12 * e.e12;
    let entry_slack = e.e11.min(e.e22).min(e.e12.max(det));
    let psi_slack = e.d1.min(e.d1 + 2.0 * (e.i - 2.0) * e.d2);
    Ok(EMatrixCheck {
        e11: e.e11,
        e22: e.e22,
        e12: e.e12,
        det,
        i: e.i,
        entry_slack,
        psi_slack,
        holds: e.e11 >= -tau && e.e22 >= -tau && (e.e12 >= -tau || det >= -tau),
        psi_route_holds: psi_slack >= -tau,
    })
}

/// λ-grid of the sweep: log-spaced on `(1, λmax(gamma_max)]`.
pub fn lambda_grid(cfg: &AnalysisConfig) -> Vec<f64> {
    let top = shear_lambda(cfg.gamma_max);
    grid::log_spaced(1.0, top, cfg.lambda_points + 1)
        .into_iter()
        .skip(1)
        .collect()
}

/// [`e_matrix_check`] over the λ-grid, skipping `λ` where `skip` is true.
pub fn e_matrix_sweep(
    psi: &ScalarProfile,
    cfg: &AnalysisConfig,
    skip: &dyn Fn(f64) -> bool,
) -> Result<(CriterionOutcome, Vec<f64>)> {
    let mut entry: Option<Slack> = None;
    let mut psi_route: Option<Slack> = None;
    let mut route_mismatch = Vec::new();
    let band = cfg.boundary_band();
    for l in lambda_grid(cfg) {
        if skip(l) {
            continue;
        }
        let c = e_matrix_check(psi, l, 1.0 / l, cfg.tau)?;
        entry = Slack::min(entry, Some(Slack::new(c.entry_slack, vec![l])));
        psi_route = Slack::min(psi_route, Some(Slack::new(c.psi_slack, vec![l])));
        if c.holds != c.psi_route_holds && c.entry_slack.abs().min(c.psi_slack.abs()) > band {
            route_mismatch.push(l);
        }
    }
    let mut slacks = BTreeMap::new();
    if let Some(s) = entry {
        slacks.insert("entries".to_string(), s);
    }
    let holds = slacks.values().all(|s| s.value >= -cfg.tau);
    let verdict = if holds { Verdict::Holds } else { Verdict::Fails };
    let mut out = CriterionOutcome::new(verdict, slacks, band);
    if let Some(s) = psi_route {
        out.boundary |= s.value.abs() <= band;
    }
    Ok((out, route_mismatch))
}

/// Sign comparison of the LH quartic against the E-matrix verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhSweep {
    /// λ where the sign of `min_η expanded` disagrees with the E-matrix
    /// verdict outside the boundary band.
    pub expanded_mismatch: Vec<f64>,
    /// `(λ, η)` pairs where the printed and expanded quartics have opposite
    /// signs outside the boundary band.
    pub printed_sign_flips: usize,
    pub max_discrepancy: f64,
    pub points: usize,
}

pub fn lh_sweep(psi: &ScalarProfile, cfg: &AnalysisConfig, skip: &dyn Fn(f64) -> bool) -> Result<LhSweep> {
    let dirs = direction_grid(cfg.eta_directions);
    let band = cfg.boundary_band();
    let mut out = LhSweep {
        expanded_mismatch: Vec::new(),
        printed_sign_flips: 0,
        max_discrepancy: 0.0,
        points: 0,
    };
    for l in lambda_grid(cfg) {
        if skip(l) {
            continue;
        }
        let e = e_matrix_check(psi, l, 1.0 / l, cfg.tau)?;
        let mut min_expanded = f64::INFINITY;
        for &eta in &dirs {
            let q = lh_quartic(psi, l, 1.0 / l, eta)?;
            min_expanded = min_expanded.min(q.expanded);
            out.max_discrepancy = out.max_discrepancy.max(q.discrepancy);
            if q.printed.abs() > band && q.expanded.abs() > band && (q.printed > 0.0) != (q.expanded > 0.0) {
                out.printed_sign_flips += 1;
            }
            out.points += 1;
        }
        let lh_holds = min_expanded >= -cfg.tau;
        if lh_holds != e.holds && min_expanded.abs() > band && e.entry_slack.abs() > band {
            out.expanded_mismatch.push(l);
        }
    }
    Ok(out)
}

/// Direction minimising the expanded quartic at `diag(λ, 1/λ)`.
pub(crate) fn worst_direction(psi: &ScalarProfile, l: f64, n: usize) -> Result<Vec2> {
    let mut best = ([1.0, 0.0], f64::INFINITY);
    for eta in direction_grid(n) {
        let q = lh_quartic(psi, l, 1.0 / l, eta)?.expanded;
        if q < best.1 {
            best = (eta, q);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn linear() -> ScalarProfile {
        ScalarProfile::from_fn("I", 2.0, |i| i - 2.0).with_derivatives(|_| 1.0, |_| 0.0)
    }

    #[test]
    fn acoustic_examples() {
        let q = acoustic_tensor(&linear(), &Mat2::IDENTITY, [0.0, 1.0]).unwrap().q;
        assert_eq!(q, Mat2::diag(2.0, 2.0));
        let sq = ScalarProfile::from_fn("I", 2.0, |i| i * i).with_derivatives(|i| 2.0 * i, |_| 2.0);
        let q = acoustic_tensor(&sq, &Mat2::IDENTITY, [0.0, 1.0]).unwrap().q;
        assert_eq!(q, Mat2::diag(8.0, 16.0));
        let q = acoustic_tensor(&sq, &Mat2::diag(2.0, 0.5), [0.0, 1.0]).unwrap().q;
        assert_eq!(q.a12(), 0.0);
        assert_eq!(q.a12(), q.a21());
    }

    #[test]
    fn acoustic_rejects_bad_input() {
        assert!(matches!(
            acoustic_tensor(&linear(), &Mat2::IDENTITY, [0.0, 2.0]),
            Err(Error::NonUnitVector { .. })
        ));
        let q = acoustic_tensor_normalized(&linear(), &Mat2::IDENTITY, [0.0, 2.0]).unwrap();
        assert_eq!(q.q, Mat2::diag(2.0, 2.0));
        assert!(acoustic_tensor(&linear(), &Mat2::diag(2.0, 1.0), [1.0, 0.0]).is_err());
    }

    #[test]
    fn fd_matches_analytic() {
        let sq = ScalarProfile::from_fn("I", 2.0, |i| i * i).with_derivatives(|i| 2.0 * i, |_| 2.0);
        let f = Mat2::new(1.2, 0.7, 0.3, (1.0 + 0.7 * 0.3) / 1.2);
        let eta = [0.6, 0.8];
        let a = acoustic_tensor(&sq, &f, eta).unwrap().q;
        let n = acoustic_tensor_fd(&sq, &f, eta).unwrap();
        assert!(a.max_abs_diff(&n) <= 1e-6 * a.norm());
    }

    #[test]
    fn lh_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = lh_quartic(&linear(), 1.0, 1.0, [s, s]).unwrap();
        assert_relative_eq!(q.printed, 1.0, epsilon = 1e-15);
        let q = lh_quartic(&linear(), 2.0, 0.5, [0.0, 1.0]).unwrap();
        assert_eq!(q.printed, 16.0);
        assert_eq!(q.direct, 4.0);
        assert_eq!(q.expanded, 4.0);
        assert_eq!(q.discrepancy, 12.0);
        let neg = ScalarProfile::from_fn("I", 2.0, |i| -i).with_derivatives(|_| -1.0, |_| 0.0);
        let q = lh_quartic(&neg, 2.0, 0.5, [1.0, 0.0]).unwrap();
        assert!(q.printed < 0.0 && q.expanded < 0.0);
        assert!(lh_quartic(&linear(), 2.0, 1.0, [1.0, 0.0]).is_err());
    }

    #[test]
    fn expanded_equals_direct_for_unit_eta() {
        let p = ScalarProfile::from_fn("I", 2.0, |i| (i - 1.0).ln())
            .with_derivatives(|i| 1.0 / (i - 1.0), |i| -1.0 / ((i - 1.0) * (i - 1.0)));
        for eta in direction_grid(16) {
            let q = lh_quartic(&p, 3.0, 1.0 / 3.0, eta).unwrap();
            assert_relative_eq!(q.expanded, q.direct, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn e_matrix_examples() {
        let c = e_matrix_check(&linear(), 2.0, 0.5, 1e-8).unwrap();
        assert_eq!((c.e11, c.e22, c.e12), (0.25, 4.0, 2.125));
        assert!(c.holds && c.psi_route_holds);
        let neg = ScalarProfile::from_fn("I", 2.0, |i| -i).with_derivatives(|_| -1.0, |_| 0.0);
        let c = e_matrix_check(&neg, 2.0, 0.5, 1e-8).unwrap();
        assert!(c.e11 < 0.0 && !c.holds);
        let root4 = ScalarProfile::from_fn("I", 2.0, |i| (i - 2.0).powf(0.25))
            .with_derivatives(|i| 0.25 * (i - 2.0).powf(-0.75), |i| -0.1875 * (i - 2.0).powf(-1.75));
        let c = e_matrix_check(&root4, 2.0, 0.5, 1e-8).unwrap();
        assert!(c.e11 > 0.0 && c.e12 < 0.0 && c.det < 0.0);
        assert!(!c.holds && !c.psi_route_holds);
    }

    #[test]
    fn lambda_grid_excludes_one() {
        let cfg = AnalysisConfig::default();
        let g = lambda_grid(&cfg);
        assert_eq!(g.len(), 40);
        assert!(g[0] > 1.0);
        assert_relative_eq!(g[39], shear_lambda(8.0), max_relative = 1e-15);
    }
}
