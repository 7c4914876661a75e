use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{chord_margin, CriterionOutcome, Verdict, Witness};
use crate::config::AnalysisConfig;
use crate::energy::Domain;
use crate::error::{Error, Result};
use crate::grid::Slack;
use crate::sampling::{random_glplus, random_sl2, random_unit, sample_rng};
use crate::tensor2::{det_expand, tangent_basis, Mat2};

/// Tolerance on `|det − 1|` along tangent segments; larger deviations mean
/// the tangency construction is broken.
const TANGENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub samples: u64,
    pub segments: u64,
    pub skipped: u64,
}

struct SampleResult {
    witnesses: Vec<(f64, usize, Witness)>,
    min_slack: Option<Slack>,
    segments: u64,
    skipped: u64,
}

fn eval_triple<W>(w: &W, f: &Mat2, dir: &Mat2, t: [f64; 3]) -> Result<[f64; 3]>
where
    W: Fn(&Mat2) -> Result<f64>,
{
    Ok([
        w(&(*f + *dir * t[0]))?,
        w(&(*f + *dir * t[1]))?,
        w(&(*f + *dir * t[2]))?,
    ])
}

fn sample<W>(k: usize, w: &W, cfg: &AnalysisConfig, domain: Domain, ladder: &[f64], name: &str) -> Result<SampleResult>
where
    W: Fn(&Mat2) -> Result<f64>,
{
    let mut rng = sample_rng(cfg.seed, k as u64);
    let f = match domain {
        Domain::Sl2 => random_sl2(&mut rng, cfg.log_lambda_max),
        Domain::GlPlus2 => random_glplus(&mut rng, cfg.log_lambda_max),
    };
    let mut out = SampleResult {
        witnesses: Vec::new(),
        min_slack: None,
        segments: 0,
        skipped: 0,
    };
    let mut triple = 0usize;
    for j in 0..cfg.n_eta {
        let eta = random_unit(&mut rng);
        let xi = match domain {
            Domain::Sl2 => tangent_basis(&f, eta)?,
            Domain::GlPlus2 => {
                let u = random_unit(&mut rng);
                let r = rng.random_range(-std::f64::consts::LN_2..=std::f64::consts::LN_2).exp();
                [u[0] * r, u[1] * r]
            }
        };
        let dir = Mat2::outer(xi, eta);
        for &s in ladder {
            for &c in &cfg.centers {
                triple += 1;
                let t = [c - s, c, c + s];
                let dets = [det_expand(&f, &(dir * t[0])), det_expand(&f, &(dir * t[2]))];
                match domain {
                    Domain::Sl2 => {
                        let dev = dets.iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
                        if dev > TANGENCY_TOL {
                            return Err(Error::NotInSl2 {
                                deviation: dev,
                                tol: TANGENCY_TOL,
                            });
                        }
                    }
                    Domain::GlPlus2 => {
                        if dets.iter().any(|&d| d <= 0.0) {
                            out.skipped += 1;
                            continue;
                        }
                    }
                }
                let vals = match eval_triple(w, &f, &dir, t) {
                    Ok(v) => v,
                    Err(Error::Domain { .. } | Error::NonFinite) => {
                        out.skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                out.segments += 1;
                let margin = chord_margin(t, vals);
                let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                let at = vec![k as f64, j as f64, s, c];
                out.min_slack = Slack::min(out.min_slack.take(), Some(Slack::new(-margin, at)));
                if margin > cfg.oracle_rel_tol * scale {
                    out.witnesses.push((
                        margin,
                        triple,
                        Witness {
                            criterion: name.to_string(),
                            f,
                            xi,
                            eta,
                            t,
                            margin,
                        },
                    ));
                }
            }
        }
    }
    out.witnesses.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    out.witnesses.truncate(cfg.max_witnesses);
    Ok(out)
}

/// Brute-force midpoint-convexity test along random rank-one lines.
///
/// On SL(2) the directions are tangent, `ξ = εF⁻ᵀη`, and every tested point
/// is confirmed to stay on SL(2). On GL⁺(2) `ξ` is free and segments whose
/// endpoints leave GL⁺(2) are skipped. On both domains, segments where the
/// energy is undefined or overflows are skipped and counted. Samples run in
/// parallel; results are merged in sample order, so the outcome depends only
/// on the seed.
pub fn rank_one_oracle<W>(
    w: &W,
    cfg: &AnalysisConfig,
    domain: Domain,
    name: &str,
) -> Result<(CriterionOutcome, OracleStats)>
where
    W: Fn(&Mat2) -> Result<f64> + Sync,
{
    let ladder = cfg.ladder();
    let results: Vec<Result<SampleResult>> = (0..cfg.n_f)
        .into_par_iter()
        .map(|k| sample(k, w, cfg, domain, &ladder, name))
        .collect();
    let mut stats = OracleStats {
        samples: cfg.n_f as u64,
        ..OracleStats::default()
    };
    let mut min_slack = None;
    let mut witnesses: Vec<(f64, usize, usize, Witness)> = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        let r = r?;
        stats.segments += r.segments;
        stats.skipped += r.skipped;
        min_slack = Slack::min(min_slack, r.min_slack);
        witnesses.extend(r.witnesses.into_iter().map(|(m, i, wi)| (m, k, i, wi)));
    }
    witnesses.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    witnesses.truncate(cfg.max_witnesses);
    let verdict = if witnesses.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    let mut slacks = BTreeMap::new();
    if let Some(s) = min_slack {
        slacks.insert("midpoint".to_string(), s);
    }
    let mut out = CriterionOutcome::new(verdict, slacks, cfg.boundary_band());
    out.witnesses = witnesses.into_iter().map(|x| x.3).collect();
    Ok((out, stats))
}
