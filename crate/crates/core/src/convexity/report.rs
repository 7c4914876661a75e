use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::acoustic::{lambda_grid, worst_direction};
use super::{
    abeyaratne_check_with, chord_margin, dfz_check, e_matrix_sweep, lh_sweep, mielke_polyconvexity_check,
    rank_one_oracle, CriterionOutcome, Verdict, Witness, ABEYARATNE, DFZ, E_MATRIX, GLPLUS_ORACLE, GLPLUS_ROUTES,
    H_CRITERION, MIELKE, RANK_ONE_ORACLE, SEPARATE_CONVEXITY, SL2_ROUTES,
};
use crate::config::AnalysisConfig;
use crate::energy::{shear_lambda, Domain, EnergySpec, ScalarProfile};
use crate::error::Result;
use crate::grid::{self, Slack};
use crate::isochoric::{
    forward_implication_check, glplus_oracle, h_criterion, separate_convexity_check, ImplicationStatus, IsochoricEnergy,
};
use crate::tensor2::{tangent_basis, Mat2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub criterion: Option<String>,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: &str, criterion: Option<&str>, message: String) -> Self {
        Diagnostic {
            kind: kind.to_string(),
            criterion: criterion.map(str::to_string),
            message,
        }
    }
}

/// Verdicts, witnesses and slack statistics of one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub energy_name: String,
    pub domain: Domain,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Criteria whose minimal slack lies in the boundary band.
    pub boundary: Vec<String>,
    pub witnesses: Vec<Witness>,
    /// Minimal slack of each tested inequality, keyed `criterion.inequality`.
    pub grid_stats: BTreeMap<String, Slack>,
    pub diagnostics: Vec<Diagnostic>,
    pub sample_counts: BTreeMap<String, u64>,
    pub seed: u64,
}

impl ConvexityReport {
    fn new(spec: &EnergySpec, domain: Domain, seed: u64) -> Self {
        ConvexityReport {
            energy_name: spec.name.clone(),
            domain,
            verdicts: BTreeMap::new(),
            boundary: Vec::new(),
            witnesses: Vec::new(),
            grid_stats: BTreeMap::new(),
            diagnostics: Vec::new(),
            sample_counts: BTreeMap::new(),
            seed,
        }
    }

    fn record(&mut self, name: &str, result: Result<CriterionOutcome>) {
        let outcome = match result {
            Ok(o) => o,
            Err(e) => {
                self.diagnostics.push(Diagnostic::new(
                    "inapplicable",
                    Some(name),
                    format!("criterion could not be evaluated: {e}"),
                ));
                CriterionOutcome::inapplicable()
            }
        };
        self.verdicts.insert(name.to_string(), outcome.verdict);
        if outcome.boundary {
            self.boundary.push(name.to_string());
        }
        for (k, s) in outcome.slacks {
            self.grid_stats.insert(format!("{name}.{k}"), s);
        }
        if outcome.verdict == Verdict::Fails && outcome.witnesses.is_empty() {
            self.diagnostics.push(Diagnostic::new(
                "missing_witness",
                Some(name),
                "criterion failed but no violating segment was located".into(),
            ));
        }
        self.witnesses.extend(outcome.witnesses);
    }

    pub fn verdict(&self, criterion: &str) -> Option<Verdict> {
        self.verdicts.get(criterion).copied()
    }

    pub fn any_fails(&self) -> bool {
        self.verdicts.values().any(|v| *v == Verdict::Fails)
    }

    /// Every applicable criterion holds.
    pub fn all_hold(&self) -> bool {
        !self.any_fails() && self.verdicts.values().any(|v| *v == Verdict::Holds)
    }

    pub fn hard_disagreements(&self) -> Vec<&Diagnostic> {
        self.diagnostics.iter().filter(|d| d.kind == "disagreement").collect()
    }

    pub fn is_boundary(&self, criterion: &str) -> bool {
        self.boundary.iter().any(|c| c == criterion)
    }
}

/// Compares the verdicts of `routes`. A split is a boundary disagreement when
/// some route sits in the boundary band, and a hard disagreement otherwise.
pub fn reconcile(report: &ConvexityReport, routes: &[&str]) -> Option<Diagnostic> {
    let applicable: Vec<(&str, Verdict)> = routes
        .iter()
        .filter_map(|r| report.verdict(r).map(|v| (*r, v)))
        .filter(|(_, v)| *v != Verdict::Inapplicable)
        .collect();
    let holds: Vec<&str> = applicable
        .iter()
        .filter(|x| x.1 == Verdict::Holds)
        .map(|x| x.0)
        .collect();
    let fails: Vec<&str> = applicable
        .iter()
        .filter(|x| x.1 == Verdict::Fails)
        .map(|x| x.0)
        .collect();
    if holds.is_empty() || fails.is_empty() {
        return None;
    }
    let boundary = applicable.iter().any(|(r, _)| report.is_boundary(r));
    let kind = if boundary {
        "boundary_disagreement"
    } else {
        "disagreement"
    };
    Some(Diagnostic::new(
        kind,
        None,
        format!("holds: {}; fails: {}", holds.join(", "), fails.join(", ")),
    ))
}

/// Shear amounts at interior kinks of `φ` on the γ-grid.
fn kink_locations(phi: &ScalarProfile, cfg: &AnalysisConfig) -> Result<Vec<f64>> {
    let xs = grid::uniform(0.0, cfg.gamma_max, cfg.gamma_points);
    let fs = grid::sample(&xs, |g| phi.eval(g))?;
    Ok(grid::kinks(&xs, &fs).into_iter().map(|k| xs[k]).collect())
}

/// A tangent segment through `diag(λ, 1/λ)` in the direction minimising the
/// LH quartic, with the half-width giving the largest chord margin.
fn quartic_witness<W>(criterion: &str, w: &W, psi: &ScalarProfile, lambda: f64, cfg: &AnalysisConfig) -> Result<Witness>
where
    W: Fn(&Mat2) -> Result<f64>,
{
    let f = Mat2::diag(lambda, 1.0 / lambda);
    let eta = worst_direction(psi, lambda, cfg.eta_directions)?;
    let xi = tangent_basis(&f, eta)?;
    let dir = Mat2::outer(xi, eta);
    let mut best: Option<Witness> = None;
    for s in grid::log_spaced(1e-3, 1.0, 31) {
        let t = [-s, 0.0, s];
        let vals = [w(&(f + dir * t[0]))?, w(&f)?, w(&(f + dir * t[2]))?];
        let margin = chord_margin(t, vals);
        if best.as_ref().is_none_or(|b| margin > b.margin) {
            best = Some(Witness {
                criterion: criterion.to_string(),
                f,
                xi,
                eta,
                t,
                margin,
            });
        }
    }
    Ok(best.expect("ladder is nonempty"))
}

/// Runs every criterion applicable to `domain` and reconciles the verdicts.
pub fn analyze(spec: &EnergySpec, domain: Domain, cfg: &AnalysisConfig) -> Result<ConvexityReport> {
    let spec = spec.clone().with_det_tol(cfg.det_tol);
    match domain {
        Domain::Sl2 => analyze_sl2(&spec, cfg),
        Domain::GlPlus2 => analyze_glplus(&spec, cfg),
    }
}

fn analyze_sl2(spec: &EnergySpec, cfg: &AnalysisConfig) -> Result<ConvexityReport> {
    let mut report = ConvexityReport::new(spec, Domain::Sl2, cfg.seed);
    let phi = spec.to_shear_phi();
    let psi = spec.to_psi();
    let w = |f: &Mat2| spec.eval_on(Domain::Sl2, f);

    let kinks = kink_locations(&phi, cfg).unwrap_or_default();
    if !kinks.is_empty() {
        report.diagnostics.push(Diagnostic::new(
            "kink",
            None,
            format!("shear profile has kinks near gamma = {kinks:?}"),
        ));
    }
    let radius = 2.0 * cfg.gamma_max / (cfg.gamma_points.max(2) - 1) as f64;
    let near_kink = |g: f64| kinks.iter().any(|k| (g - k).abs() <= radius);
    let skip_i = |i: f64| near_kink((i - 2.0).max(0.0).sqrt());
    let skip_l = |l: f64| near_kink(l - 1.0 / l);

    report.record(DFZ, dfz_check(&phi, cfg));
    report.record(MIELKE, mielke_polyconvexity_check(&phi, cfg));

    let abey = abeyaratne_check_with(&psi, cfg, &skip_i).and_then(|mut out| {
        if out.verdict == Verdict::Fails {
            let worst = out.min_slack().map(|s| s.at[0]).unwrap_or(3.0);
            let l = shear_lambda((worst - 2.0).sqrt());
            out.witnesses.push(quartic_witness(ABEYARATNE, &w, &psi, l, cfg)?);
        }
        Ok(out)
    });
    report.record(ABEYARATNE, abey);

    let sweep = e_matrix_sweep(&psi, cfg, &skip_l).and_then(|(mut out, mismatch)| {
        if out.verdict == Verdict::Fails {
            let l = out.min_slack().map(|s| s.at[0]).unwrap_or(2.0);
            out.witnesses.push(quartic_witness(E_MATRIX, &w, &psi, l, cfg)?);
        }
        Ok((out, mismatch))
    });
    let sweep = match sweep {
        Ok((out, mismatch)) => {
            if !mismatch.is_empty() {
                report.diagnostics.push(Diagnostic::new(
                    "e_matrix_routes",
                    Some(E_MATRIX),
                    format!("entry and psi routes disagree at lambda = {mismatch:?}"),
                ));
            }
            Ok(out)
        }
        Err(e) => Err(e),
    };
    report.record(E_MATRIX, sweep);

    match lh_sweep(&psi, cfg, &skip_l) {
        Ok(lh) => {
            if !lh.expanded_mismatch.is_empty() {
                report.diagnostics.push(Diagnostic::new(
                    "lh_e_matrix",
                    Some(E_MATRIX),
                    format!(
                        "LH quartic sign disagrees with E-matrix at lambda = {:?}",
                        lh.expanded_mismatch
                    ),
                ));
            }
            if lh.printed_sign_flips > 0 {
                report.diagnostics.push(Diagnostic::new(
                    "lh_printed_form",
                    None,
                    format!(
                        "squared-coefficient quartic has the opposite sign of the expanded form at {} of {} (lambda, eta) points",
                        lh.printed_sign_flips, lh.points
                    ),
                ));
            }
            report.sample_counts.insert("lh_points".into(), lh.points as u64);
        }
        Err(e) => report.diagnostics.push(Diagnostic::new(
            "inapplicable",
            Some("lh_quartic"),
            format!("LH quartic could not be evaluated: {e}"),
        )),
    }

    match rank_one_oracle(&w, cfg, Domain::Sl2, RANK_ONE_ORACLE) {
        Ok((out, stats)) => {
            report.sample_counts.insert("oracle_segments".into(), stats.segments);
            if stats.skipped > 0 {
                report.sample_counts.insert("oracle_skipped".into(), stats.skipped);
                report.diagnostics.push(Diagnostic::new(
                    "oracle_skipped",
                    Some(RANK_ONE_ORACLE),
                    format!(
                        "{} segments skipped where the energy is undefined or overflows",
                        stats.skipped
                    ),
                ));
            }
            report.record(RANK_ONE_ORACLE, Ok(out));
        }
        Err(e) => report.record(RANK_ONE_ORACLE, Err(e)),
    }

    report
        .sample_counts
        .insert("gamma_points".into(), cfg.gamma_points as u64);
    report
        .sample_counts
        .insert("invariant_points".into(), cfg.gamma_points.saturating_sub(1) as u64);
    report
        .sample_counts
        .insert("lambda_points".into(), lambda_grid(cfg).len() as u64);
    report.sample_counts.insert("oracle_samples".into(), cfg.n_f as u64);
    report
        .sample_counts
        .insert("oracle_directions".into(), cfg.n_eta as u64);

    if let Some(d) = reconcile(&report, &SL2_ROUTES) {
        report.diagnostics.push(d);
    }
    Ok(report)
}

fn analyze_glplus(spec: &EnergySpec, cfg: &AnalysisConfig) -> Result<ConvexityReport> {
    let iso = IsochoricEnergy::from_spec(spec)?;
    let mut report = ConvexityReport::new(spec, Domain::GlPlus2, cfg.seed);
    report.record(H_CRITERION, h_criterion(&iso, cfg));
    report.record(SEPARATE_CONVEXITY, separate_convexity_check(&iso, cfg));
    match glplus_oracle(&iso, cfg) {
        Ok((out, stats)) => {
            report.sample_counts.insert("oracle_segments".into(), stats.segments);
            report.sample_counts.insert("oracle_skipped".into(), stats.skipped);
            report.record(GLPLUS_ORACLE, Ok(out));
        }
        Err(e) => report.record(GLPLUS_ORACLE, Err(e)),
    }
    match forward_implication_check(&iso, cfg) {
        Ok(fi) => {
            let kind = match fi.status {
                ImplicationStatus::Consistent => "forward_implication",
                ImplicationStatus::ReverseFailure => "forward_implication_reverse_failure",
                ImplicationStatus::Violated => "forward_implication_violated",
            };
            report.diagnostics.push(Diagnostic::new(
                kind,
                None,
                format!(
                    "GL+(2) rank-one convex: {}; SL(2) restriction rank-one convex: {}",
                    fi.glplus_holds, fi.restriction_holds
                ),
            ));
        }
        Err(e) => report.diagnostics.push(Diagnostic::new(
            "inapplicable",
            Some("forward_implication"),
            format!("restriction could not be checked: {e}"),
        )),
    }
    report.sample_counts.insert("t_points".into(), cfg.t_points as u64);
    report
        .sample_counts
        .insert("separate_points".into(), cfg.sep_points as u64);
    report.sample_counts.insert("oracle_samples".into(), cfg.n_f as u64);
    report
        .sample_counts
        .insert("oracle_directions".into(), cfg.n_eta as u64);
    if let Some(d) = reconcile(&report, &GLPLUS_ROUTES) {
        report.diagnostics.push(d);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::lookup;

    fn quick() -> AnalysisConfig {
        AnalysisConfig {
            n_f: 60,
            ..AnalysisConfig::default()
        }
    }

    #[test]
    fn neo_hooke_holds_everywhere() {
        let spec = lookup("neo-hooke-inc").unwrap().spec;
        let r = analyze(&spec, Domain::Sl2, &quick()).unwrap();
        for route in SL2_ROUTES {
            assert_eq!(r.verdict(route), Some(Verdict::Holds), "{route}");
        }
        assert!(r.all_hold());
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn counterexample_restriction_is_boundary() {
        let spec = lookup("counterexample-inc").unwrap().spec;
        let r = analyze(&spec, Domain::Sl2, &quick()).unwrap();
        assert_eq!(r.verdict(MIELKE), Some(Verdict::Holds));
        assert_eq!(r.verdict(RANK_ONE_ORACLE), Some(Verdict::Holds));
        assert!(r.is_boundary(ABEYARATNE));
        assert!(r.is_boundary(E_MATRIX));
        assert!(r.hard_disagreements().is_empty());
    }

    #[test]
    fn phi_neg_fails_with_witnesses() {
        let spec = lookup("phi-neg").unwrap().spec;
        let r = analyze(&spec, Domain::Sl2, &quick()).unwrap();
        for route in SL2_ROUTES {
            assert_eq!(r.verdict(route), Some(Verdict::Fails), "{route}");
            assert!(r.witnesses.iter().any(|w| w.criterion == route), "{route}");
        }
        for wi in &r.witnesses {
            assert!(wi.margin > 0.0, "{}", wi.criterion);
        }
    }

    #[test]
    fn glplus_counterexample_fails() {
        let spec = lookup("counterexample-iso").unwrap().spec;
        let r = analyze(&spec, Domain::GlPlus2, &quick()).unwrap();
        for route in GLPLUS_ROUTES {
            assert_eq!(r.verdict(route), Some(Verdict::Fails), "{route}");
        }
        assert!(r
            .diagnostics
            .iter()
            .any(|d| d.kind == "forward_implication_reverse_failure"));
    }
}
