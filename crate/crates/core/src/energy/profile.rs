use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor2::Mat2;

pub type ScalarFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Mat2) -> Result<f64> + Send + Sync>;
pub type BivariateFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    CentralDifference,
}

/// A real function of one variable with optional analytic derivatives.
///
/// Without analytic derivatives, `d1` uses central differences with step
/// `max(1e-5, 1e-5·|x|)` and `d2` with step `1e-4·max(1, |x|)`; both switch
/// to second-order one-sided stencils when the backward point would leave the
/// domain.
#[derive(Clone)]
pub struct ScalarProfile {
    var: &'static str,
    f: ScalarFn,
    d1: Option<ScalarFn>,
    d2: Option<ScalarFn>,
    mode: DerivativeMode,
    domain_lo: f64,
    open: bool,
}

impl fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarProfile")
            .field("var", &self.var)
            .field("mode", &self.mode)
            .field("domain_lo", &self.domain_lo)
            .field("open", &self.open)
            .finish_non_exhaustive()
    }
}

pub(crate) fn checked(what: &str, x: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain {
            what: what.to_string(),
            value: x,
        })
    }
}

impl ScalarProfile {
    /// Profile on `[domain_lo, ∞)` with finite-difference derivatives.
    pub fn new<F>(var: &'static str, domain_lo: f64, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarProfile {
            var,
            f: Arc::new(f),
            d1: None,
            d2: None,
            mode: DerivativeMode::CentralDifference,
            domain_lo,
            open: false,
        }
    }

    /// Profile from an infallible closure; non-finite outputs become domain
    /// errors.
    pub fn from_fn<F>(var: &'static str, domain_lo: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(var, domain_lo, move |x| checked(var, x, f(x)))
    }

    pub fn with_derivatives<D1, D2>(mut self, d1: D1, d2: D2) -> Self
    where
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let var = self.var;
        self.d1 = Some(Arc::new(move |x| checked(var, x, d1(x))));
        self.d2 = Some(Arc::new(move |x| checked(var, x, d2(x))));
        self.mode = DerivativeMode::Analytic;
        self
    }

    pub(crate) fn with_chain(mut self, d1: ScalarFn, d2: ScalarFn, mode: DerivativeMode) -> Self {
        self.d1 = Some(d1);
        self.d2 = Some(d2);
        self.mode = mode;
        self
    }

    /// Excludes `domain_lo` itself from the domain.
    pub fn open_at_lo(mut self) -> Self {
        self.open = true;
        self
    }

    pub fn var(&self) -> &'static str {
        self.var
    }

    pub fn domain_lo(&self) -> f64 {
        self.domain_lo
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn admits(&self, x: f64) -> bool {
        x.is_finite() && (x > self.domain_lo || (!self.open && x == self.domain_lo))
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.admits(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: self.var.to_string(),
                value: x,
            })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let v = (self.f)(x)?;
        checked(self.var, x, v)
    }

    /// Evaluates without the domain check, for extensions such as
    /// `F ↦ ψ(‖F‖²)` off SL(2).
    pub fn eval_extended(&self, x: f64) -> Result<f64> {
        let v = (self.f)(x)?;
        checked(self.var, x, v)
    }

    pub fn d1(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        match &self.d1 {
            Some(d) => d(x),
            None => self.fd_d1(x),
        }
    }

    pub fn d2(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        match &self.d2 {
            Some(d) => d(x),
            None => self.fd_d2(x),
        }
    }

    pub fn fd_d1(&self, x: f64) -> Result<f64> {
        let h = (1e-5f64).max(1e-5 * x.abs());
        if self.admits(x - h) {
            Ok((self.eval(x + h)? - self.eval(x - h)?) / (2.0 * h))
        } else {
            let (f0, f1, f2) = (self.eval(x)?, self.eval(x + h)?, self.eval(x + 2.0 * h)?);
            Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
        }
    }

    pub fn fd_d2(&self, x: f64) -> Result<f64> {
        let h = 1e-4 * x.abs().max(1.0);
        if self.admits(x - h) {
            let (fm, f0, fp) = (self.eval(x - h)?, self.eval(x)?, self.eval(x + h)?);
            Ok((fp - 2.0 * f0 + fm) / (h * h))
        } else {
            let f: Vec<f64> = (0..4).map(|k| self.eval(x + k as f64 * h)).collect::<Result<_>>()?;
            Ok((2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h))
        }
    }
}

/// `φ(γ) = ψ(2 + γ²)`, derivatives by the chain rule.
pub fn phi_from_psi(psi: &ScalarProfile) -> ScalarProfile {
    let (p0, p1, p2) = (psi.clone(), psi.clone(), psi.clone());
    let d1: ScalarFn = Arc::new(move |g| Ok(2.0 * g * p1.d1(2.0 + g * g)?));
    let d2: ScalarFn = Arc::new(move |g| {
        let i = 2.0 + g * g;
        let dd = if g == 0.0 { 0.0 } else { 4.0 * g * g * p2.d2(i)? };
        Ok(2.0 * p2.d1(i)? + dd)
    });
    let mode = psi.mode;
    ScalarProfile::new("gamma", 0.0, move |g| {
        p0.eval(2.0 + g * g).map_err(|e| e.at("gamma", g))
    })
    .with_chain(d1, d2, mode)
}

/// `ψ(I) = φ(√(I − 2))`, with `ψ′ = φ′/(2γ)` and
/// `ψ″ = φ″/(4γ²) − φ′/(4γ³)`.
///
/// At `I = 2` the first derivative exists only when `φ′(0) = 0` (then it is
/// `φ″(0)/2`); the second derivative is reported as a domain error there.
pub fn psi_from_phi(phi: &ScalarProfile) -> ScalarProfile {
    let (p0, p1, p2) = (phi.clone(), phi.clone(), phi.clone());
    let at_two = |what: &str| Error::Domain {
        what: what.to_string(),
        value: 2.0,
    };
    let d1: ScalarFn = Arc::new(move |i| {
        let g = (i - 2.0).max(0.0).sqrt();
        if g > 0.0 {
            Ok(p1.d1(g)? / (2.0 * g))
        } else if p1.d1(0.0)? == 0.0 {
            Ok(p1.d2(0.0)? / 2.0)
        } else {
            Err(at_two("psi'"))
        }
    });
    let d2: ScalarFn = Arc::new(move |i| {
        let g = (i - 2.0).max(0.0).sqrt();
        if g > 0.0 {
            Ok(p2.d2(g)? / (4.0 * g * g) - p2.d1(g)? / (4.0 * g * g * g))
        } else {
            Err(at_two("psi''"))
        }
    });
    let mode = phi.mode;
    ScalarProfile::new("I", 2.0, move |i| {
        p0.eval((i - 2.0).max(0.0).sqrt()).map_err(|e| e.at("I", i))
    })
    .with_chain(d1, d2, mode)
}

/// Largest singular value of `shear(θ)`, `(θ + √(θ² + 4))/2`.
pub fn shear_lambda(theta: f64) -> f64 {
    0.5 * (theta + (theta * theta + 4.0).sqrt())
}

/// `φ(θ) = h(λ²)` with `λ = shear_lambda(θ)`; derivatives by the chain rule
/// with `dt/dθ = 2λ²/r` and `d²t/dθ² = 2λ²(2r − θ)/r³`, `r = √(θ² + 4)`.
pub fn phi_from_h(h: &ScalarProfile) -> ScalarProfile {
    let (p0, p1, p2) = (h.clone(), h.clone(), h.clone());
    let d1: ScalarFn = Arc::new(move |th| {
        let r = (th * th + 4.0).sqrt();
        let l = shear_lambda(th);
        Ok(p1.d1(l * l)? * 2.0 * l * l / r)
    });
    let d2: ScalarFn = Arc::new(move |th| {
        let r = (th * th + 4.0).sqrt();
        let l = shear_lambda(th);
        let t1 = 2.0 * l * l / r;
        let t2 = 2.0 * l * l * (2.0 * r - th) / (r * r * r);
        Ok(p2.d2(l * l)? * t1 * t1 + p2.d1(l * l)? * t2)
    });
    let mode = h.mode;
    ScalarProfile::new("gamma", 0.0, move |th| {
        let l = shear_lambda(th);
        p0.eval(l * l).map_err(|e| e.at("gamma", th))
    })
    .with_chain(d1, d2, mode)
}

/// `φ(θ) = g(λ, 1/λ)` with `λ = shear_lambda(θ)`.
pub fn phi_from_g(g: &BivariateFn) -> ScalarProfile {
    let g = g.clone();
    ScalarProfile::new("gamma", 0.0, move |th| {
        let l = shear_lambda(th);
        g(l, 1.0 / l).map_err(|e| e.at("gamma", th))
    })
}

/// `φ(γ) = W([[1, γ], [0, 1]])`.
pub fn extract_phi(w: &MatrixFn) -> ScalarProfile {
    let w = w.clone();
    ScalarProfile::new("gamma", 0.0, move |g| w(&Mat2::shear(g)).map_err(|e| e.at("gamma", g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn psi_linear() -> ScalarProfile {
        ScalarProfile::from_fn("I", 2.0, |i| i - 2.0).with_derivatives(|_| 1.0, |_| 0.0)
    }

    #[test]
    fn domain_is_enforced() {
        let p = psi_linear();
        assert!(p.eval(1.999).is_err());
        assert_eq!(p.eval(2.0).unwrap(), 0.0);
        let h = ScalarProfile::from_fn("t", 0.0, |t| t).open_at_lo();
        assert!(h.eval(0.0).is_err());
        assert!(h.eval(f64::NAN).is_err());
    }

    #[test]
    fn finite_differences_match_analytic() {
        let exact = ScalarProfile::from_fn("x", 0.0, |x| x.powi(3) + x.exp())
            .with_derivatives(|x| 3.0 * x * x + x.exp(), |x| 6.0 * x + x.exp());
        let numeric = ScalarProfile::from_fn("x", 0.0, |x| x.powi(3) + x.exp());
        for x in [0.0, 1e-6, 0.3, 1.0, 4.5, 8.0] {
            assert_relative_eq!(numeric.d1(x).unwrap(), exact.d1(x).unwrap(), max_relative = 1e-5);
            assert_relative_eq!(numeric.d2(x).unwrap(), exact.d2(x).unwrap(), max_relative = 1e-5);
        }
    }

    #[test]
    fn phi_psi_substitution_examples() {
        let phi = phi_from_psi(&psi_linear());
        assert_eq!(phi.eval(2.0).unwrap(), 4.0);
        let phi_id = ScalarProfile::from_fn("gamma", 0.0, |g| g).with_derivatives(|_| 1.0, |_| 0.0);
        assert_eq!(psi_from_phi(&phi_id).eval(6.0).unwrap(), 2.0);
        let psi_i = ScalarProfile::from_fn("I", 2.0, |i| i).with_derivatives(|_| 1.0, |_| 0.0);
        assert_eq!(phi_from_psi(&psi_i).eval(0.0).unwrap(), 2.0);
    }

    #[test]
    fn chain_rule_psi_from_phi() {
        let phi = ScalarProfile::from_fn("gamma", 0.0, |g| g * g * g + g)
            .with_derivatives(|g| 3.0 * g * g + 1.0, |g| 6.0 * g);
        let psi = psi_from_phi(&phi);
        let numeric = ScalarProfile::new("I", 2.0, {
            let psi = psi.clone();
            move |i| psi.eval(i)
        });
        for i in [2.5, 3.0, 10.0, 40.0] {
            assert_relative_eq!(psi.d1(i).unwrap(), numeric.d1(i).unwrap(), max_relative = 1e-6);
            assert_relative_eq!(psi.d2(i).unwrap(), numeric.d2(i).unwrap(), max_relative = 1e-5);
        }
        let sq = ScalarProfile::from_fn("gamma", 0.0, |g| g * g).with_derivatives(|g| 2.0 * g, |_| 2.0);
        assert_eq!(psi_from_phi(&sq).d1(2.0).unwrap(), 1.0);
        let lin = ScalarProfile::from_fn("gamma", 0.0, |g| g).with_derivatives(|_| 1.0, |_| 0.0);
        assert!(psi_from_phi(&lin).d1(2.0).is_err());
        assert!(psi_from_phi(&lin).d2(2.0).is_err());
    }

    #[test]
    fn phi_from_h_examples() {
        let h_id = ScalarProfile::from_fn("t", 0.0, |t| t).open_at_lo();
        assert_eq!(phi_from_h(&h_id).eval(0.0).unwrap(), 1.0);
        let h_ce = ScalarProfile::from_fn("t", 0.0, |t| (t.sqrt() - 1.0 / t.sqrt()).abs());
        assert_relative_eq!(phi_from_h(&h_ce).eval(1.5).unwrap(), 1.5, epsilon = 1e-14);
        let h = ScalarProfile::from_fn("t", 0.0, |t| t + 1.0 / t)
            .with_derivatives(|t| 1.0 - 1.0 / (t * t), |t| 2.0 / (t * t * t));
        let phi = phi_from_h(&h);
        assert_relative_eq!(phi.eval(1.0).unwrap(), 3.0, epsilon = 1e-14);
        for th in [0.0, 0.5, 2.0, 7.0] {
            assert_relative_eq!(phi.eval(th).unwrap(), th * th + 2.0, max_relative = 1e-13);
            assert_relative_eq!(phi.d1(th).unwrap(), 2.0 * th, epsilon = 1e-12);
            assert_relative_eq!(phi.d2(th).unwrap(), 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn extract_phi_examples() {
        let w: MatrixFn = Arc::new(|f: &Mat2| Ok(f.norm_sq() - 2.0));
        assert_eq!(extract_phi(&w).eval(1.5).unwrap(), 2.25);
        let c: MatrixFn = Arc::new(|_: &Mat2| Ok(7.0));
        assert_eq!(extract_phi(&c).eval(3.0).unwrap(), 7.0);
        let w: MatrixFn = Arc::new(|f: &Mat2| {
            let sp = crate::tensor2::singular_values(f)?;
            Ok(sp.lmax - 1.0 / sp.lmax)
        });
        assert_relative_eq!(extract_phi(&w).eval(3.0).unwrap(), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eval_errors_name_the_offending_point() {
        let w: MatrixFn = Arc::new(|_: &Mat2| Err(Error::NonFinite));
        match extract_phi(&w).eval(0.25) {
            Err(Error::EvalAt { var, at, .. }) => assert_eq!((var, at), ("gamma", 0.25)),
            other => panic!("{other:?}"),
        }
    }
}
