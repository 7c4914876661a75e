//! Isochoric energies on GL⁺(2): the lift `W_iso(F) = W(F/√det F)` of an
//! SL(2) energy, the ratio-function criteria, and the counterexample of an
//! energy that is polyconvex on SL(2) while its lift is not rank-one convex.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::convexity::{
    self, divided_difference_slacks, rank_one_oracle, CriterionOutcome, Verdict, Witness, GLPLUS_ORACLE, H_CRITERION,
    SEPARATE_CONVEXITY,
};
use crate::energy::{self, phi_from_h, Domain, EnergyForm, EnergySpec, MatrixFn, ScalarProfile};
use crate::error::{Error, Result};
use crate::grid::{self, Slack};
use crate::sampling::{random_glplus, random_orthogonal_pair, random_sl2, sample_rng};
use crate::tensor2::Mat2;

const ISOCHORIC_TOL: f64 = 1e-10;
const ISOCHORIC_SCALES: [f64; 3] = [0.5, 2.0, 10.0];

/// An energy on GL⁺(2) invariant under `F ↦ aF`, `a > 0`.
#[derive(Clone)]
pub struct IsochoricEnergy {
    base: EnergySpec,
    w: MatrixFn,
}

impl fmt::Debug for IsochoricEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IsochoricEnergy").field("base", &self.base).finish()
    }
}

impl IsochoricEnergy {
    /// `W_iso(F) = W(F/√det F)`.
    pub fn lift(base: &EnergySpec) -> Self {
        let inner = base.clone();
        let w: MatrixFn = Arc::new(move |f: &Mat2| {
            f.check_glplus()?;
            let g = *f * (1.0 / f.det().sqrt());
            // Normalising loses about one ulp of det per unit of ‖g‖².
            g.check_sl2(inner.det_tol().max(4.0 * f64::EPSILON * g.norm_sq()))?;
            inner.eval_on(Domain::GlPlus2, &g)
        });
        IsochoricEnergy { base: base.clone(), w }
    }

    /// Isochoric energy for `spec`: SL(2) energies are lifted, GL⁺(2)
    /// energies are used as given once they pass a scaling check.
    pub fn from_spec(spec: &EnergySpec) -> Result<Self> {
        if spec.domain() == Domain::Sl2 {
            return Ok(Self::lift(spec));
        }
        let inner = spec.clone();
        let w: MatrixFn = Arc::new(move |f: &Mat2| inner.eval_on(Domain::GlPlus2, f));
        let iso = IsochoricEnergy { base: spec.clone(), w };
        if matches!(spec.form(), EnergyForm::MatrixW(_) | EnergyForm::SingularG(_)) {
            let dev = iso.isochoric_deviation(0x150c)?;
            if dev > ISOCHORIC_TOL {
                return Err(Error::NotConvertible {
                    from: spec.representation().to_string(),
                    to: Domain::GlPlus2.to_string(),
                    reason: format!("energy is not isochoric (relative deviation {dev:e})"),
                });
            }
        }
        Ok(iso)
    }

    pub fn base(&self) -> &EnergySpec {
        &self.base
    }

    pub fn eval(&self, f: &Mat2) -> Result<f64> {
        (self.w)(f)
    }

    /// Largest relative change of `W(aF)` against `W(F)` over random `F` and
    /// `a ∈ {0.5, 2, 10}`.
    pub fn isochoric_deviation(&self, seed: u64) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..20 {
            let f = random_glplus(&mut sample_rng(seed, k), crate::sampling::DEFAULT_LOG_LAMBDA_MAX);
            let base = self.eval(&f)?;
            for a in ISOCHORIC_SCALES {
                let v = self.eval(&(f * a))?;
                worst = worst.max((v - base).abs() / base.abs().max(1.0));
            }
        }
        Ok(worst)
    }

    /// The SL(2) energy obtained by restriction.
    pub fn restrict(&self) -> Result<EnergySpec> {
        let w = self.w.clone();
        EnergySpec::new(
            format!("{}/restricted", self.base.name),
            EnergyForm::MatrixW(w),
            Domain::Sl2,
        )
    }

    /// `h(t) = W_iso(diag(√t, 1/√t))` on `(0, ∞)`.
    pub fn h(&self) -> ScalarProfile {
        let w = self.w.clone();
        ScalarProfile::new("t", 0.0, move |t| {
            let r = t.sqrt();
            w(&Mat2::diag(r, 1.0 / r)).map_err(|e| e.at("t", t))
        })
        .open_at_lo()
    }

    /// `g(λ₁, λ₂) = W_iso(diag(λ₁, λ₂))`.
    pub fn g(&self, l1: f64, l2: f64) -> Result<f64> {
        (self.w)(&Mat2::diag(l1, l2))
    }

    /// Shear profile of the restriction, `φ(θ) = h(λmax(θ)²)`.
    pub fn restricted_phi(&self) -> ScalarProfile {
        phi_from_h(&self.h())
    }
}

/// `t`-grid for the ratio function: log-spaced on `[1, t_max]`.
pub fn ratio_grid(cfg: &AnalysisConfig) -> Vec<f64> {
    grid::log_spaced(1.0, cfg.t_max, cfg.t_points)
}

/// `h` nondecreasing and convex on `[1, t_max]`, by divided differences.
///
/// Witnesses lie on `diag(1 + s, 1) = I + s·e₁⊗e₁`, where the energy equals
/// `h(1 + s)` for `s ≥ 0` and `h(1/(1 + s))` for `s < 0`.
pub fn h_criterion(iso: &IsochoricEnergy, cfg: &AnalysisConfig) -> Result<CriterionOutcome> {
    let h = iso.h();
    let xs = ratio_grid(cfg);
    let fs = grid::sample(&xs, |t| h.eval(t))?;
    let slacks = divided_difference_slacks(&xs, &fs);
    let mut out = CriterionOutcome::from_slacks(slacks, cfg.tau, cfg.boundary_band());
    let mut witnesses = Vec::new();
    for s in out.slacks.values() {
        if s.value >= -cfg.tau {
            continue;
        }
        let t = match *s.at.as_slice() {
            [a, b] => [1.0 / b - 1.0, a - 1.0, b - 1.0],
            [a, b, c] => [a - 1.0, b - 1.0, c - 1.0],
            _ => unreachable!(),
        };
        witnesses.push(line_witness(iso, H_CRITERION, Mat2::IDENTITY, t)?);
    }
    out.witnesses = witnesses;
    Ok(out)
}

fn line_witness(iso: &IsochoricEnergy, criterion: &str, f: Mat2, t: [f64; 3]) -> Result<Witness> {
    let mut w = Witness {
        criterion: criterion.to_string(),
        f,
        xi: [1.0, 0.0],
        eta: [1.0, 0.0],
        t,
        margin: 0.0,
    };
    w.margin = w.recompute(|m| iso.eval(m))?;
    Ok(w)
}

/// `λ`-grid for separate convexity: log-spaced on the configured range.
pub fn separate_grid(cfg: &AnalysisConfig) -> Vec<f64> {
    grid::log_spaced(cfg.sep_lambda_min, cfg.sep_lambda_max, cfg.sep_points)
}

/// Convexity of `λ₁ ↦ g(λ₁, λ₂)` for every frozen `λ₂` on the grid; by
/// symmetry of `g` this covers both coordinates.
pub fn separate_convexity_check(iso: &IsochoricEnergy, cfg: &AnalysisConfig) -> Result<CriterionOutcome> {
    let xs = separate_grid(cfg);
    let mut worst: Option<(Slack, f64)> = None;
    for &l2 in &xs {
        let fs = grid::sample(&xs, |l1| iso.g(l1, l2))?;
        if let Some(s) = grid::min_second_difference(&xs, &fs) {
            if worst.as_ref().is_none_or(|(w, _)| s.value < w.value) {
                worst = Some((s, l2));
            }
        }
    }
    let mut slacks = BTreeMap::new();
    let mut witness = None;
    if let Some((s, l2)) = worst {
        let at = vec![s.at[0], s.at[1], s.at[2], l2];
        if s.value < -cfg.tau {
            let x1 = s.at[1];
            let t = [s.at[0] - x1, 0.0, s.at[2] - x1];
            witness = Some(line_witness(iso, SEPARATE_CONVEXITY, Mat2::diag(x1, l2), t)?);
        }
        slacks.insert("convex".to_string(), Slack::new(s.value, at));
    }
    let mut out = CriterionOutcome::from_slacks(slacks, cfg.tau, cfg.boundary_band());
    out.witnesses.extend(witness);
    Ok(out)
}

/// Unconstrained rank-one oracle on GL⁺(2).
pub fn glplus_oracle(
    iso: &IsochoricEnergy,
    cfg: &AnalysisConfig,
) -> Result<(CriterionOutcome, convexity::OracleStats)> {
    let w = |f: &Mat2| iso.eval(f);
    rank_one_oracle(&w, cfg, Domain::GlPlus2, GLPLUS_ORACLE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationStatus {
    /// Both verdicts agree.
    Consistent,
    /// GL⁺(2) fails while the SL(2) restriction holds; allowed.
    ReverseFailure,
    /// GL⁺(2) holds while the SL(2) restriction fails; impossible
    /// mathematically, so a numerical defect.
    Violated,
}

/// Rank-one convexity on GL⁺(2) implies it for the SL(2) restriction, never
/// the converse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardImplication {
    pub glplus_holds: bool,
    pub restriction_holds: bool,
    pub status: ImplicationStatus,
}

pub fn forward_implication_check(iso: &IsochoricEnergy, cfg: &AnalysisConfig) -> Result<ForwardImplication> {
    let glplus_holds = h_criterion(iso, cfg)?.holds();
    let restriction_holds = convexity::dfz_check(&iso.restricted_phi(), cfg)?.holds();
    let status = match (glplus_holds, restriction_holds) {
        (true, false) => ImplicationStatus::Violated,
        (false, true) => ImplicationStatus::ReverseFailure,
        _ => ImplicationStatus::Consistent,
    };
    Ok(ForwardImplication {
        glplus_holds,
        restriction_holds,
        status,
    })
}

/// One verified statement of the counterexample suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub statement: String,
    pub verified: bool,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub energy: String,
    pub seed: u64,
    pub claims: Vec<Claim>,
    /// Strongest GL⁺(2) rank-one violation found by sampling.
    pub glplus_witness: Option<Witness>,
    pub h_criterion: CriterionOutcome,
    pub mielke_polyconvexity: CriterionOutcome,
    pub forward_implication: ForwardImplication,
    pub all_verified: bool,
}

/// `h″(t)` for `h(t) = |√t − 1/√t|`, `t > 1`.
pub fn counterexample_h2(t: f64) -> f64 {
    -0.25 * t.powf(-1.5) - 0.75 * t.powf(-2.5)
}

/// Minimum oracle margin demanded of the GL⁺(2) witness.
pub const WITNESS_MARGIN: f64 = 1e-6;

/// Checks the three claims about `h(t) = |√t − 1/√t|`:
/// (i) objective, isotropic and isochoric; (ii) not rank-one convex on
/// GL⁺(2), both from `h″ < 0` and from a sampled segment; (iii) the SL(2)
/// restriction is `φ(γ) = γ` and polyconvex.
pub fn counterexample_suite(cfg: &AnalysisConfig) -> Result<CounterexampleReport> {
    let entry = energy::lookup("counterexample-iso")?;
    let iso = IsochoricEnergy::from_spec(&entry.spec)?;
    let mut claims = Vec::new();

    let mut obj = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..100 {
        let mut rng = sample_rng(cfg.seed, k);
        let f = random_glplus(&mut rng, cfg.log_lambda_max);
        let (q1, q2) = random_orthogonal_pair(&mut rng);
        let w = iso.eval(&f)?;
        obj = obj.max((iso.eval(&(q1 * f * q2))? - w).abs() / w.abs().max(1.0));
        for a in [0.5, 2.0, 3.0, 10.0] {
            scale = scale.max((iso.eval(&(f * a))? - w).abs() / w.abs().max(1.0));
        }
    }
    let h = iso.h();
    let mut sym = 0.0f64;
    for t in ratio_grid(cfg) {
        sym = sym.max((h.eval(t)? - h.eval(1.0 / t)?).abs());
    }
    claims.push(Claim {
        id: "i".into(),
        statement: "objective, isotropic and isochoric".into(),
        verified: obj <= 1e-10 && scale <= 1e-12 && sym <= 1e-10,
        values: BTreeMap::from([
            ("max_isotropy_deviation".into(), obj),
            ("max_scaling_deviation".into(), scale),
            ("max_h_symmetry_deviation".into(), sym),
        ]),
    });

    let fd = |t: f64| -> Result<f64> {
        let s = 1e-4 * t;
        Ok((h.eval(t + s)? - 2.0 * h.eval(t)? + h.eval(t - s)?) / (s * s))
    };
    let (fd2, fd4) = (fd(2.0)?, fd(4.0)?);
    let hc = h_criterion(&iso, cfg)?;
    let (oracle, _) = glplus_oracle(&iso, cfg)?;
    let glplus_witness = oracle.witnesses.first().cloned();
    let reproduced = match &glplus_witness {
        Some(w) => w.recompute(|m| iso.eval(m))?,
        None => f64::NAN,
    };
    let best = glplus_witness.as_ref().map_or(f64::NAN, |w| w.margin);
    claims.push(Claim {
        id: "ii".into(),
        statement: "not rank-one convex on GL+(2)".into(),
        verified: (fd2 - counterexample_h2(2.0)).abs() <= 1e-6
            && (fd4 - counterexample_h2(4.0)).abs() <= 1e-6
            && hc.verdict == Verdict::Fails
            && best >= WITNESS_MARGIN
            && reproduced == best,
        values: BTreeMap::from([
            ("h2_fd_at_2".into(), fd2),
            ("h2_formula_at_2".into(), counterexample_h2(2.0)),
            ("h2_fd_at_4".into(), fd4),
            ("h2_formula_at_4".into(), counterexample_h2(4.0)),
            ("witness_margin".into(), best),
            ("witness_margin_recomputed".into(), reproduced),
        ]),
    });

    let phi = iso.restricted_phi();
    let mut id_dev = 0.0f64;
    for g in grid::uniform(0.0, cfg.gamma_max, cfg.gamma_points) {
        id_dev = id_dev.max((phi.eval(g)? - g).abs());
    }
    let at_diag = iso.restrict()?.eval(&Mat2::diag(2.0, 0.5))?;
    let mut sl2_dev = 0.0f64;
    for k in 0..100 {
        let f = random_sl2(&mut sample_rng(cfg.seed ^ 0x51, k), cfg.log_lambda_max);
        let gamma = crate::tensor2::singular_values(&f)?.gamma;
        sl2_dev = sl2_dev.max((iso.eval(&f)? - gamma).abs());
    }
    let mielke = convexity::mielke_polyconvexity_check(&phi, cfg)?;
    claims.push(Claim {
        id: "iii".into(),
        statement: "SL(2) restriction is phi(s) = s and polyconvex".into(),
        verified: mielke.holds() && id_dev <= 1e-12 && (at_diag - 1.5).abs() <= 1e-12 && sl2_dev <= 1e-10,
        values: BTreeMap::from([
            ("max_phi_identity_deviation".into(), id_dev),
            ("phi_at_diag_2_half".into(), at_diag),
            ("max_sl2_gamma_deviation".into(), sl2_dev),
        ]),
    });

    let forward = forward_implication_check(&iso, cfg)?;
    let all_verified = claims.iter().all(|c| c.verified);
    Ok(CounterexampleReport {
        energy: entry.spec.name.clone(),
        seed: cfg.seed,
        claims,
        glplus_witness,
        h_criterion: hc,
        mielke_polyconvexity: mielke,
        forward_implication: forward,
        all_verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::lookup;
    use approx::assert_relative_eq;

    fn psi_spec(f: fn(f64) -> f64) -> EnergySpec {
        EnergySpec::new(
            "psi",
            EnergyForm::InvariantPsi(ScalarProfile::from_fn("I", 2.0, f)),
            Domain::Sl2,
        )
        .unwrap()
    }

    #[test]
    fn lift_examples() {
        let iso = IsochoricEnergy::lift(&psi_spec(|i| i - 2.0));
        assert_relative_eq!(iso.eval(&Mat2::diag(2.0, 1.0)).unwrap(), 0.5, epsilon = 1e-14);
        let c = IsochoricEnergy::lift(&psi_spec(|_| 3.0));
        assert_eq!(c.eval(&Mat2::diag(5.0, 0.1)).unwrap(), 3.0);
        let ce = IsochoricEnergy::lift(&lookup("counterexample-inc").unwrap().spec);
        let (a, b) = (3.0f64, 0.7f64);
        let expected = ((a / b).sqrt() - (b / a).sqrt()).abs();
        assert_relative_eq!(ce.eval(&Mat2::diag(a, b)).unwrap(), expected, epsilon = 1e-13);
        assert!(ce.eval(&Mat2::diag(-1.0, 1.0)).is_err());
    }

    #[test]
    fn h_criterion_examples() {
        let cfg = AnalysisConfig::default();
        let tp = IsochoricEnergy::from_spec(&lookup("iso-t-plus-inv").unwrap().spec).unwrap();
        assert!(h_criterion(&tp, &cfg).unwrap().holds());
        let ce = IsochoricEnergy::from_spec(&lookup("counterexample-iso").unwrap().spec).unwrap();
        let out = h_criterion(&ce, &cfg).unwrap();
        assert_eq!(out.verdict, Verdict::Fails);
        assert!(out.witnesses.iter().all(|w| w.margin > 0.0));
        let c = IsochoricEnergy::lift(&psi_spec(|_| 1.0));
        assert!(h_criterion(&c, &cfg).unwrap().holds());
    }

    #[test]
    fn separate_convexity_examples() {
        let cfg = AnalysisConfig::default();
        let tp = IsochoricEnergy::from_spec(&lookup("iso-t-plus-inv").unwrap().spec).unwrap();
        assert!(separate_convexity_check(&tp, &cfg).unwrap().holds());
        let ce = IsochoricEnergy::from_spec(&lookup("counterexample-iso").unwrap().spec).unwrap();
        let out = separate_convexity_check(&ce, &cfg).unwrap();
        assert_eq!(out.verdict, Verdict::Fails);
        assert!(out.witnesses[0].margin > 0.0);
        let c = IsochoricEnergy::lift(&psi_spec(|_| 1.0));
        assert!(separate_convexity_check(&c, &cfg).unwrap().holds());
    }

    #[test]
    fn forward_implication_examples() {
        let cfg = AnalysisConfig::default();
        let tp = IsochoricEnergy::from_spec(&lookup("iso-t-plus-inv").unwrap().spec).unwrap();
        let fi = forward_implication_check(&tp, &cfg).unwrap();
        assert_eq!(fi.status, ImplicationStatus::Consistent);
        assert!(fi.restriction_holds);
        let ce = IsochoricEnergy::from_spec(&lookup("counterexample-iso").unwrap().spec).unwrap();
        let fi = forward_implication_check(&ce, &cfg).unwrap();
        assert_eq!(fi.status, ImplicationStatus::ReverseFailure);
        let c = IsochoricEnergy::lift(&psi_spec(|_| 1.0));
        let fi = forward_implication_check(&c, &cfg).unwrap();
        assert!(fi.glplus_holds && fi.restriction_holds);
    }

    #[test]
    fn non_isochoric_g_is_not_convertible() {
        let g: crate::energy::BivariateFn = Arc::new(|a, b| Ok(a * a + b * b));
        let spec = EnergySpec::new("g", EnergyForm::SingularG(g), Domain::GlPlus2).unwrap();
        assert!(matches!(
            IsochoricEnergy::from_spec(&spec),
            Err(Error::NotConvertible { .. })
        ));
    }

    #[test]
    fn counterexample_second_derivative_values() {
        assert_relative_eq!(counterexample_h2(4.0), -0.0546875, epsilon = 1e-16);
        assert!((counterexample_h2(2.0) + 0.22097).abs() < 1e-5);
    }
}
