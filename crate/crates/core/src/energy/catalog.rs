use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BivariateFn, Domain, EnergyForm, EnergySpec, MatrixFn, Representation, ScalarProfile};
use crate::error::{Error, Result};
use crate::tensor2::Mat2;

/// Golden verdicts for a catalog energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedVerdicts {
    pub sl2_rank_one_convex: bool,
    pub sl2_polyconvex: bool,
    pub glplus_rank_one_convex: bool,
}

impl ExpectedVerdicts {
    const fn all(v: bool) -> Self {
        ExpectedVerdicts {
            sl2_rank_one_convex: v,
            sl2_polyconvex: v,
            glplus_rank_one_convex: v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub spec: EnergySpec,
    /// Entries sharing a family describe the same energy in different forms.
    pub family: &'static str,
    pub description: &'static str,
    pub expected: ExpectedVerdicts,
    /// The same energy in other representations, on the same domain.
    pub alternates: Vec<EnergySpec>,
    /// Whether `ψ` is smooth on all of `[2, ∞)`.
    pub smooth: bool,
}

impl CatalogEntry {
    /// Primary form followed by all alternates.
    pub fn representations(&self) -> impl Iterator<Item = &EnergySpec> {
        std::iter::once(&self.spec).chain(self.alternates.iter())
    }

    /// The `ψ` form if the entry has one, else the converted profile.
    pub fn psi(&self) -> ScalarProfile {
        for spec in self.representations() {
            if let EnergyForm::InvariantPsi(p) = spec.form() {
                return p.clone();
            }
        }
        self.spec.to_psi()
    }
}

fn phi(f: fn(f64) -> f64, d1: fn(f64) -> f64, d2: fn(f64) -> f64) -> EnergyForm {
    EnergyForm::ShearPhi(ScalarProfile::from_fn("gamma", 0.0, f).with_derivatives(d1, d2))
}

fn psi(f: fn(f64) -> f64, d1: fn(f64) -> f64, d2: fn(f64) -> f64) -> EnergyForm {
    EnergyForm::InvariantPsi(ScalarProfile::from_fn("I", 2.0, f).with_derivatives(d1, d2))
}

fn psi_plain(f: fn(f64) -> f64) -> EnergyForm {
    EnergyForm::InvariantPsi(ScalarProfile::from_fn("I", 2.0, f))
}

fn h(f: fn(f64) -> f64, d1: fn(f64) -> f64, d2: fn(f64) -> f64) -> EnergyForm {
    EnergyForm::RatioH(
        ScalarProfile::from_fn("t", 0.0, f)
            .with_derivatives(d1, d2)
            .open_at_lo(),
    )
}

fn g(f: fn(f64, f64) -> f64) -> EnergyForm {
    let g: BivariateFn = Arc::new(move |a, b| super::profile::checked("l1,l2", a, f(a, b)));
    EnergyForm::SingularG(g)
}

fn w(f: fn(&Mat2) -> f64) -> EnergyForm {
    let w: MatrixFn = Arc::new(move |m: &Mat2| super::profile::checked("F", m.det(), f(m)));
    EnergyForm::MatrixW(w)
}

/// `|√t − 1/√t|` and its derivatives away from `t = 1`.
fn ce_h(t: f64) -> f64 {
    (t.sqrt() - 1.0 / t.sqrt()).abs()
}

fn ce_h1(t: f64) -> f64 {
    (t - 1.0).signum() * 0.5 * (t.powf(-0.5) + t.powf(-1.5))
}

fn ce_h2(t: f64) -> f64 {
    (t - 1.0).signum() * (-0.25 * t.powf(-1.5) - 0.75 * t.powf(-2.5))
}

fn ce_g(a: f64, b: f64) -> f64 {
    ((a / b).sqrt() - (b / a).sqrt()).abs()
}

/// `√(‖F‖²/det F − 2)`, which equals `ce_g` at the singular values.
fn ce_w(f: &Mat2) -> f64 {
    (f.norm_sq() / f.det() - 2.0).max(0.0).sqrt()
}

fn build(
    name: &str,
    domain: Domain,
    primary: EnergyForm,
    alternates: Vec<EnergyForm>,
) -> Result<(EnergySpec, Vec<EnergySpec>)> {
    let spec = EnergySpec::new(name, primary, domain)?;
    let alts = alternates
        .into_iter()
        .map(|form| {
            let r = form.representation();
            EnergySpec::new(format!("{name}/{}", r.keyword()), form, domain)
        })
        .collect::<Result<_>>()?;
    Ok((spec, alts))
}

fn entries() -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    let mut push = |name: &str,
                    family: &'static str,
                    description: &'static str,
                    domain: Domain,
                    expected: ExpectedVerdicts,
                    smooth: bool,
                    primary: EnergyForm,
                    alternates: Vec<EnergyForm>|
     -> Result<()> {
        let (spec, alternates) = build(name, domain, primary, alternates)?;
        out.push(CatalogEntry {
            spec,
            family,
            description,
            expected,
            alternates,
            smooth,
        });
        Ok(())
    };

    push(
        "neo-hooke-inc",
        "neo-hooke",
        "incompressible neo-Hooke, psi(I) = I - 2",
        Domain::Sl2,
        ExpectedVerdicts::all(true),
        true,
        psi(|i| i - 2.0, |_| 1.0, |_| 0.0),
        vec![
            phi(|x| x * x, |x| 2.0 * x, |_| 2.0),
            h(|t| t + 1.0 / t - 2.0, |t| 1.0 - 1.0 / (t * t), |t| 2.0 / (t * t * t)),
            g(|a, b| a / b + b / a - 2.0),
            w(|f| f.norm_sq() - 2.0),
        ],
    )?;
    push(
        "counterexample-iso",
        "counterexample",
        "isochoric h(t) = |sqrt(t) - 1/sqrt(t)|: rank-one convex on SL(2) but not on GL+(2)",
        Domain::GlPlus2,
        ExpectedVerdicts {
            sl2_rank_one_convex: true,
            sl2_polyconvex: true,
            glplus_rank_one_convex: false,
        },
        false,
        h(ce_h, ce_h1, ce_h2),
        vec![
            g(ce_g),
            phi(|x| x, |_| 1.0, |_| 0.0),
            psi_plain(|i| (i - 2.0).sqrt()),
            w(ce_w),
        ],
    )?;
    push(
        "counterexample-inc",
        "counterexample",
        "SL(2) restriction of the counterexample, phi(gamma) = gamma",
        Domain::Sl2,
        ExpectedVerdicts {
            sl2_rank_one_convex: true,
            sl2_polyconvex: true,
            glplus_rank_one_convex: false,
        },
        false,
        phi(|x| x, |_| 1.0, |_| 0.0),
        vec![
            psi_plain(|i| (i - 2.0).sqrt()),
            h(ce_h, ce_h1, ce_h2),
            g(ce_g),
            w(|f| (f.norm_sq() - 2.0).max(0.0).sqrt()),
        ],
    )?;
    push(
        "iso-t-plus-inv",
        "t-plus-inv",
        "isochoric h(t) = t + 1/t",
        Domain::GlPlus2,
        ExpectedVerdicts::all(true),
        true,
        h(|t| t + 1.0 / t, |t| 1.0 - 1.0 / (t * t), |t| 2.0 / (t * t * t)),
        vec![
            g(|a, b| a / b + b / a),
            psi(|i| i, |_| 1.0, |_| 0.0),
            phi(|x| x * x + 2.0, |x| 2.0 * x, |_| 2.0),
            w(|f| f.norm_sq() / f.det()),
        ],
    )?;
    push(
        "phi-neg",
        "phi-neg",
        "decreasing shear profile phi(gamma) = -gamma",
        Domain::Sl2,
        ExpectedVerdicts::all(false),
        false,
        phi(|x| -x, |_| -1.0, |_| 0.0),
        vec![psi_plain(|i| -(i - 2.0).sqrt())],
    )?;
    push(
        "phi-sqrt",
        "phi-sqrt",
        "concave shear profile phi(gamma) = sqrt(gamma)",
        Domain::Sl2,
        ExpectedVerdicts::all(false),
        false,
        phi(f64::sqrt, |x| 0.5 / x.sqrt(), |x| -0.25 * x.powf(-1.5)),
        vec![psi(
            |i| (i - 2.0).powf(0.25),
            |i| 0.25 * (i - 2.0).powf(-0.75),
            |i| -0.1875 * (i - 2.0).powf(-1.75),
        )],
    )?;
    push(
        "quartic-shear",
        "quartic-shear",
        "psi(I) = (I - 2)^2, phi(gamma) = gamma^4",
        Domain::Sl2,
        ExpectedVerdicts::all(true),
        true,
        psi(|i| (i - 2.0) * (i - 2.0), |i| 2.0 * (i - 2.0), |_| 2.0),
        vec![phi(|x| x.powi(4), |x| 4.0 * x.powi(3), |x| 12.0 * x * x)],
    )?;
    push(
        "exp-shear",
        "exp-shear",
        "exponential hardening psi(I) = exp(I - 2) - 1",
        Domain::Sl2,
        ExpectedVerdicts::all(true),
        true,
        psi(|i| (i - 2.0).exp_m1(), |i| (i - 2.0).exp(), |i| (i - 2.0).exp()),
        vec![phi(
            |x| (x * x).exp_m1(),
            |x| 2.0 * x * (x * x).exp(),
            |x| (2.0 + 4.0 * x * x) * (x * x).exp(),
        )],
    )?;
    push(
        "psi-square",
        "psi-square",
        "psi(I) = I^2",
        Domain::Sl2,
        ExpectedVerdicts::all(true),
        true,
        psi(|i| i * i, |i| 2.0 * i, |_| 2.0),
        vec![phi(
            |x| (2.0 + x * x).powi(2),
            |x| 4.0 * x * (2.0 + x * x),
            |x| 8.0 + 12.0 * x * x,
        )],
    )?;
    push(
        "log-shear",
        "log-shear",
        "smooth but eventually concave psi(I) = log(I - 1)",
        Domain::Sl2,
        ExpectedVerdicts::all(false),
        true,
        psi(
            |i| (i - 1.0).ln(),
            |i| 1.0 / (i - 1.0),
            |i| -1.0 / ((i - 1.0) * (i - 1.0)),
        ),
        vec![phi(
            |x| (x * x).ln_1p(),
            |x| 2.0 * x / (1.0 + x * x),
            |x| 2.0 * (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x)),
        )],
    )?;
    Ok(out)
}

/// Builtin energies in stable order, each tagged with its golden verdicts.
pub fn catalog() -> Vec<CatalogEntry> {
    entries().expect("builtin catalog energies pass registration checks")
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.spec.name == name)
        .ok_or_else(|| Error::UnknownEntry(name.to_string()))
}

impl Representation {
    pub fn all() -> [Representation; 5] {
        [
            Representation::MatrixW,
            Representation::InvariantPsi,
            Representation::ShearPhi,
            Representation::RatioH,
            Representation::SingularG,
        ]
    }
}
