//! Energies in matrix, invariant, shear, ratio and singular-value form.

mod catalog;
mod profile;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exprparse::{self, Expression};
use crate::sampling::{random_glplus, random_orthogonal_pair, random_sl2, sample_rng, DEFAULT_LOG_LAMBDA_MAX};
use crate::tensor2::{singular_values, Mat2, DET_TOL};

pub use catalog::{catalog, lookup, CatalogEntry, ExpectedVerdicts};
pub use profile::{
    extract_phi, phi_from_g, phi_from_h, phi_from_psi, psi_from_phi, shear_lambda, BivariateFn, DerivativeMode,
    MatrixFn, ScalarFn, ScalarProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "sl2")]
    Sl2,
    #[serde(rename = "glplus2")]
    GlPlus2,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Sl2 => "sl2",
            Domain::GlPlus2 => "glplus2",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sl2" => Ok(Domain::Sl2),
            "glplus2" => Ok(Domain::GlPlus2),
            _ => Err(format!("unknown domain '{s}' (expected sl2 or glplus2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    MatrixW,
    InvariantPsi,
    ShearPhi,
    RatioH,
    SingularG,
}

impl Representation {
    /// Keyword used in definition files.
    pub fn keyword(self) -> &'static str {
        match self {
            Representation::MatrixW => "W",
            Representation::InvariantPsi => "psi",
            Representation::ShearPhi => "phi",
            Representation::RatioH => "h",
            Representation::SingularG => "g",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone)]
pub enum EnergyForm {
    MatrixW(MatrixFn),
    InvariantPsi(ScalarProfile),
    ShearPhi(ScalarProfile),
    RatioH(ScalarProfile),
    SingularG(BivariateFn),
}

impl fmt::Debug for EnergyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EnergyForm::{}", self.representation())
    }
}

impl EnergyForm {
    pub fn representation(&self) -> Representation {
        match self {
            EnergyForm::MatrixW(_) => Representation::MatrixW,
            EnergyForm::InvariantPsi(_) => Representation::InvariantPsi,
            EnergyForm::ShearPhi(_) => Representation::ShearPhi,
            EnergyForm::RatioH(_) => Representation::RatioH,
            EnergyForm::SingularG(_) => Representation::SingularG,
        }
    }

    /// Evaluates at `F`, which the caller has already placed in `domain`.
    ///
    /// The invariant and shear forms only see `F/√det F`, so on GL⁺(2) they
    /// act as their isochoric lift.
    fn eval_unchecked(&self, f: &Mat2) -> Result<f64> {
        if let EnergyForm::MatrixW(w) = self {
            return w(f);
        }
        let sp = singular_values(f)?;
        let d = sp.lmax * sp.lmin;
        match self {
            EnergyForm::MatrixW(_) => unreachable!(),
            EnergyForm::InvariantPsi(psi) => psi.eval(2.0 + (sp.i / d - 2.0).max(0.0)),
            EnergyForm::ShearPhi(phi) => phi.eval((sp.i / d - 2.0).max(0.0).sqrt()),
            EnergyForm::RatioH(h) => h.eval(sp.lmax / sp.lmin),
            EnergyForm::SingularG(g) => g(sp.lmax, sp.lmin),
        }
    }
}

/// A named energy with a primary representation and a claimed domain.
#[derive(Debug, Clone)]
pub struct EnergySpec {
    pub name: String,
    form: EnergyForm,
    domain: Domain,
    expression: Option<String>,
    det_tol: f64,
}

/// Number of random orthogonal pairs used by the isotropy check.
const ISOTROPY_SAMPLES: u64 = 100;
const ISOTROPY_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-10;
const REGISTRATION_SEED: u64 = 0x5eed;

impl EnergySpec {
    /// Builds a spec, checking isotropy of matrix payloads and symmetry of
    /// bivariate payloads.
    pub fn new(name: impl Into<String>, form: EnergyForm, domain: Domain) -> Result<Self> {
        let spec = EnergySpec {
            name: name.into(),
            form,
            domain,
            expression: None,
            det_tol: DET_TOL,
        };
        match &spec.form {
            EnergyForm::MatrixW(_) => spec.check_isotropy()?,
            EnergyForm::SingularG(g) => check_symmetry(g)?,
            _ => {}
        }
        Ok(spec)
    }

    pub fn with_expression(mut self, text: impl Into<String>) -> Self {
        self.expression = Some(text.into());
        self
    }

    pub fn with_det_tol(mut self, tol: f64) -> Self {
        self.det_tol = tol;
        self
    }

    pub fn form(&self) -> &EnergyForm {
        &self.form
    }

    pub fn representation(&self) -> Representation {
        self.form.representation()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn expression(&self) -> Option<&str> {
        self.expression.as_deref()
    }

    pub fn det_tol(&self) -> f64 {
        self.det_tol
    }

    /// Same energy under a different claimed domain.
    pub fn on_domain(&self, domain: Domain) -> EnergySpec {
        EnergySpec { domain, ..self.clone() }
    }

    pub fn eval(&self, f: &Mat2) -> Result<f64> {
        self.eval_on(self.domain, f)
    }

    pub fn eval_on(&self, domain: Domain, f: &Mat2) -> Result<f64> {
        match domain {
            Domain::Sl2 => f.check_sl2(self.det_tol)?,
            Domain::GlPlus2 => f.check_glplus()?,
        }
        self.form.eval_unchecked(f)
    }

    /// Shear profile `φ`, the canonical form on SL(2).
    pub fn to_shear_phi(&self) -> ScalarProfile {
        match &self.form {
            EnergyForm::ShearPhi(phi) => phi.clone(),
            EnergyForm::InvariantPsi(psi) => phi_from_psi(psi),
            EnergyForm::RatioH(h) => phi_from_h(h),
            EnergyForm::SingularG(g) => phi_from_g(g),
            EnergyForm::MatrixW(w) => extract_phi(w),
        }
    }

    /// Invariant profile `ψ` on `[2, ∞)`.
    pub fn to_psi(&self) -> ScalarProfile {
        match &self.form {
            EnergyForm::InvariantPsi(psi) => psi.clone(),
            _ => psi_from_phi(&self.to_shear_phi()),
        }
    }

    fn check_isotropy(&self) -> Result<()> {
        let mut worst = 0.0f64;
        for k in 0..ISOTROPY_SAMPLES {
            let mut rng = sample_rng(REGISTRATION_SEED, k);
            let f = match self.domain {
                Domain::Sl2 => random_sl2(&mut rng, DEFAULT_LOG_LAMBDA_MAX),
                Domain::GlPlus2 => random_glplus(&mut rng, DEFAULT_LOG_LAMBDA_MAX),
            };
            let (q1, q2) = random_orthogonal_pair(&mut rng);
            let a = self.eval(&f)?;
            let b = self.eval(&(q1 * f * q2))?;
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
        if worst > ISOTROPY_TOL {
            return Err(Error::NotIsotropic { deviation: worst });
        }
        Ok(())
    }
}

fn check_symmetry(g: &BivariateFn) -> Result<()> {
    let mut rng = sample_rng(REGISTRATION_SEED, u64::MAX);
    let mut worst = 0.0f64;
    for _ in 0..ISOTROPY_SAMPLES {
        let a = rng.random_range(-DEFAULT_LOG_LAMBDA_MAX..=DEFAULT_LOG_LAMBDA_MAX).exp();
        let b = rng.random_range(-DEFAULT_LOG_LAMBDA_MAX..=DEFAULT_LOG_LAMBDA_MAX).exp();
        let (x, y) = (g(a, b)?, g(b, a)?);
        worst = worst.max((x - y).abs() / x.abs().max(1.0));
    }
    if worst > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { deviation: worst });
    }
    Ok(())
}

/// Variable names admitted for each parsed representation.
pub fn variables(repr: Representation) -> &'static [&'static str] {
    match repr {
        Representation::ShearPhi => &["gamma"],
        Representation::InvariantPsi => &["I"],
        Representation::RatioH => &["t"],
        Representation::SingularG => &["l1", "l2"],
        Representation::MatrixW => &[],
    }
}

fn scalar_fn(var: &'static str, expr: Expression) -> ScalarFn {
    Arc::new(move |x| expr.eval(&[x]).map_err(|e| Error::from(e).at(var, x)))
}

/// Profile with symbolic derivatives of `expr`.
fn scalar_from_expr(var: &'static str, lo: f64, expr: Expression) -> ScalarProfile {
    let d1 = expr.derivative(0);
    let d2 = d1.derivative(0);
    let f = scalar_fn(var, expr);
    ScalarProfile::new(var, lo, move |x| f(x)).with_chain(
        scalar_fn(var, d1),
        scalar_fn(var, d2),
        DerivativeMode::Analytic,
    )
}

/// Form built from a parsed expression over the representation's variables.
pub fn form_from_expr(repr: Representation, expr: Expression) -> Result<EnergyForm> {
    Ok(match repr {
        Representation::ShearPhi => EnergyForm::ShearPhi(scalar_from_expr("gamma", 0.0, expr)),
        Representation::InvariantPsi => EnergyForm::InvariantPsi(scalar_from_expr("I", 2.0, expr)),
        Representation::RatioH => EnergyForm::RatioH(scalar_from_expr("t", 0.0, expr).open_at_lo()),
        Representation::SingularG => EnergyForm::SingularG(Arc::new(move |a, b| {
            expr.eval(&[a, b]).map_err(|e| Error::from(e).at("l1", a))
        })),
        Representation::MatrixW => {
            return Err(Error::Definition {
                line: 1,
                message: "matrix energies cannot be given as expressions".into(),
            })
        }
    })
}

/// Parses a definition such as `phi: gamma^2` or a definition file holding
/// exactly one such line; `#` starts a comment.
pub fn parse_definition(src: &str) -> Result<(Representation, Expression)> {
    let mut found = None;
    let mut offset = 0;
    for (lineno, raw) in src.split('\n').enumerate() {
        let line_offset = offset;
        offset += raw.len() + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let line = lineno + 1;
        let Some((key, body)) = content.split_once(':') else {
            return Err(Error::Definition {
                line,
                message: "expected '<phi|psi|h|g>: <expression>'".into(),
            });
        };
        let repr = match key.trim() {
            "phi" => Representation::ShearPhi,
            "psi" => Representation::InvariantPsi,
            "h" => Representation::RatioH,
            "g" => Representation::SingularG,
            other => {
                return Err(Error::Definition {
                    line,
                    message: format!("unknown representation '{other}' (expected phi, psi, h or g)"),
                })
            }
        };
        if found.is_some() {
            return Err(Error::Definition {
                line,
                message: "more than one energy definition".into(),
            });
        }
        let body_start = key.len() + 1;
        let expr = exprparse::parse(body, variables(repr)).map_err(|mut e| {
            e.offset += line_offset + body_start;
            e.column += body_start;
            e.line = line;
            e
        })?;
        found = Some((repr, expr));
    }
    found.ok_or(Error::Definition {
        line: 1,
        message: "no energy definition found".into(),
    })
}

/// Spec from definition text, tagged with its canonical printed expression.
pub fn spec_from_definition(name: &str, src: &str, domain: Domain) -> Result<EnergySpec> {
    let (repr, expr) = parse_definition(src)?;
    let text = format!("{}: {}", repr.keyword(), expr);
    Ok(EnergySpec::new(name, form_from_expr(repr, expr)?, domain)?.with_expression(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn phi_sq() -> EnergySpec {
        let phi = ScalarProfile::from_fn("gamma", 0.0, |g| g * g).with_derivatives(|g| 2.0 * g, |_| 2.0);
        EnergySpec::new("sq", EnergyForm::ShearPhi(phi), Domain::Sl2).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_relative_eq!(phi_sq().eval(&Mat2::shear(1.5)).unwrap(), 2.25, epsilon = 1e-12);
        let psi = spec_from_definition("p", "psi: I - 2", Domain::Sl2).unwrap();
        assert_eq!(psi.eval(&Mat2::IDENTITY).unwrap(), 0.0);
        let h = spec_from_definition("h", "h: abs(sqrt(t) - sqrt(1/t))", Domain::Sl2).unwrap();
        assert_relative_eq!(h.eval(&Mat2::diag(2.0, 0.5)).unwrap(), 1.5, epsilon = 1e-14);
    }

    #[test]
    fn domain_violations_are_rejected() {
        let e = phi_sq();
        assert!(matches!(e.eval(&Mat2::diag(2.0, 1.0)), Err(Error::NotInSl2 { .. })));
        assert!(matches!(
            e.eval_on(Domain::GlPlus2, &Mat2::diag(-1.0, 1.0)),
            Err(Error::NotInGlPlus { .. })
        ));
        assert_relative_eq!(
            e.eval_on(Domain::GlPlus2, &Mat2::diag(4.0, 1.0)).unwrap(),
            2.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn non_isotropic_matrix_energy_is_rejected() {
        let w: MatrixFn = Arc::new(|f: &Mat2| Ok(f.a11() * f.a11()));
        assert!(matches!(
            EnergySpec::new("aniso", EnergyForm::MatrixW(w), Domain::Sl2),
            Err(Error::NotIsotropic { .. })
        ));
    }

    #[test]
    fn asymmetric_g_is_rejected() {
        let g: BivariateFn = Arc::new(|a, b| Ok(a + 2.0 * b));
        assert!(matches!(
            EnergySpec::new("asym", EnergyForm::SingularG(g), Domain::GlPlus2),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn definition_files() {
        let (r, e) = parse_definition("# shear energy\n\nphi: gamma^2 # quadratic\n").unwrap();
        assert_eq!(r, Representation::ShearPhi);
        assert_eq!(e.to_string(), "gamma^2");
        assert!(matches!(parse_definition(""), Err(Error::Definition { .. })));
        assert!(matches!(
            parse_definition("phi: gamma\npsi: I"),
            Err(Error::Definition { line: 2, .. })
        ));
        assert!(matches!(parse_definition("q: 1"), Err(Error::Definition { .. })));
        match parse_definition("\nphi: gamma + I") {
            Err(Error::Parse(p)) => assert_eq!((p.line, p.column, p.offset), (2, 14, 14)),
            other => panic!("{other:?}"),
        }
        let g = spec_from_definition("g", "g: l1/l2 + l2/l1", Domain::GlPlus2).unwrap();
        assert_relative_eq!(g.eval(&Mat2::diag(2.0, 1.0)).unwrap(), 2.5);
        assert_eq!(g.expression(), Some("g: l1 / l2 + l2 / l1"));
    }

    #[test]
    fn parsed_domain_errors_carry_location() {
        let e = spec_from_definition("bad", "phi: log(gamma - 1)", Domain::Sl2).unwrap();
        match e.eval(&Mat2::IDENTITY) {
            Err(Error::EvalAt { var: "gamma", at, .. }) => assert_eq!(at, 0.0),
            other => panic!("{other:?}"),
        }
    }
}
