//! 2×2 linear algebra kernel.
//!
//! Everything here is closed form: determinants, singular values, the
//! tangent space of SL(2) at a point, and the decomposition of a unimodular
//! matrix into rotation · simple shear · rotation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for SL(2) membership, `|det F - 1| <= DET_TOL`.
pub const DET_TOL: f64 = 1e-10;

pub type Vec2 = [f64; 2];

/// The two-dimensional alternator `[[0, 1], [-1, 0]]`.
pub const ALTERNATOR: Mat2 = Mat2::new(0.0, 1.0, -1.0, 0.0);

/// A real 2×2 matrix, stored row-major.
///
/// Serializes as `[[a11, a12], [a21, a22]]`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, b)
    }

    /// The simple shear `[[1, gamma], [0, 1]]`.
    pub const fn shear(gamma: f64) -> Self {
        Mat2::new(1.0, gamma, 0.0, 1.0)
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// Dyadic product `xi ⊗ eta`, i.e. entries `xi_i eta_j`.
    pub fn outer(xi: Vec2, eta: Vec2) -> Self {
        Mat2::new(xi[0] * eta[0], xi[0] * eta[1], xi[1] * eta[0], xi[1] * eta[1])
    }

    #[inline]
    pub fn a11(&self) -> f64 {
        self.0[0][0]
    }
    #[inline]
    pub fn a12(&self) -> f64 {
        self.0[0][1]
    }
    #[inline]
    pub fn a21(&self) -> f64 {
        self.0[1][0]
    }
    #[inline]
    pub fn a22(&self) -> f64 {
        self.0[1][1]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11() * self.a22() - self.a12() * self.a21()
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a11() + self.a22()
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a11(), self.a21(), self.a12(), self.a22())
    }

    /// Cofactor matrix, `det(F) F^{-T}` for invertible `F`.
    pub fn cofactor(&self) -> Self {
        Mat2::new(self.a22(), -self.a21(), -self.a12(), self.a11())
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular { det });
        }
        Ok(self.cofactor().transpose() * (1.0 / det))
    }

    /// `F^{-T}`.
    pub fn inverse_transpose(&self) -> Result<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular { det });
        }
        Ok(self.cofactor() * (1.0 / det))
    }

    /// Frobenius inner product `<A, B> = tr(B^T A)`.
    #[inline]
    pub fn dot(&self, other: &Mat2) -> f64 {
        self.a11() * other.a11() + self.a12() * other.a12() + self.a21() * other.a21() + self.a22() * other.a22()
    }

    /// Squared Frobenius norm `||F||^2`.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        [
            self.a11() * v[0] + self.a12() * v[1],
            self.a21() * v[0] + self.a22() * v[1],
        ]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Checks `|det F - 1| <= tol`.
    pub fn check_sl2(&self, tol: f64) -> Result<()> {
        self.check_finite()?;
        let deviation = (self.det() - 1.0).abs();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotInSl2 { deviation, tol })
        }
    }

    pub fn check_glplus(&self) -> Result<()> {
        self.check_finite()?;
        let det = self.det();
        if det > 0.0 {
            Ok(())
        } else {
            Err(Error::NotInGlPlus { det })
        }
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:?}, {:?}], [{:?}, {:?}]]",
            self.a11(),
            self.a12(),
            self.a21(),
            self.a22()
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11() + rhs.a11(),
            self.a12() + rhs.a12(),
            self.a21() + rhs.a21(),
            self.a22() + rhs.a22(),
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self * -1.0
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a11() * s, self.a12() * s, self.a21() * s, self.a22() * s)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11() * rhs.a11() + self.a12() * rhs.a21(),
            self.a11() * rhs.a12() + self.a12() * rhs.a22(),
            self.a21() * rhs.a11() + self.a22() * rhs.a21(),
            self.a21() * rhs.a12() + self.a22() * rhs.a22(),
        )
    }
}

pub fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

/// Ordered singular values of a 2×2 matrix together with the derived
/// invariants `I = ||F||^2` and `gamma = lmax - lmin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularPair {
    pub lmax: f64,
    pub lmin: f64,
    /// `lmax^2 + lmin^2`, the squared Frobenius norm.
    #[serde(rename = "I")]
    pub i: f64,
    /// `lmax - lmin`; on SL(2) this is the amount of shear `sqrt(I - 2)`.
    pub gamma: f64,
}

impl SingularPair {
    /// `lmax / lmin`.
    pub fn ratio(&self) -> f64 {
        self.lmax / self.lmin
    }
}

/// A rank-one direction `xi ⊗ eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankOneDirection {
    pub xi: Vec2,
    pub eta: Vec2,
}

impl RankOneDirection {
    pub fn new(xi: Vec2, eta: Vec2) -> Result<Self> {
        let finite = xi.iter().chain(eta.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        if xi == [0.0, 0.0] || eta == [0.0, 0.0] {
            return Err(Error::ZeroVector);
        }
        Ok(RankOneDirection { xi, eta })
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::outer(self.xi, self.eta)
    }
}

/// `det(F + H)` via `det F + det F <F^{-T}, H> + det H`.
///
/// Falls back to evaluating `det(F + H)` directly when `det F = 0`.
pub fn det_expand(f: &Mat2, h: &Mat2) -> f64 {
    let det_f = f.det();
    match f.inverse_transpose() {
        Ok(fit) if det_f != 0.0 => det_f + det_f * fit.dot(h) + h.det(),
        _ => (*f + *h).det(),
    }
}

/// Closed-form singular values.
///
/// With `s = ||F||^2` and `d = |det F|`,
/// `lmax = (sqrt(s + 2d) + sqrt(s - 2d)) / 2` and `lmin = d / lmax`.
pub fn singular_values(f: &Mat2) -> Result<SingularPair> {
    f.check_finite()?;
    let det = f.det();
    if det == 0.0 {
        return Err(Error::Singular { det });
    }
    let s = f.norm_sq();
    let d = det.abs();
    let plus = (s + 2.0 * d).sqrt();
    // s >= 2d holds exactly; clamp the rounding residue.
    let minus = (s - 2.0 * d).max(0.0).sqrt();
    let lmax = 0.5 * (plus + minus);
    Ok(SingularPair {
        lmax,
        lmin: d / lmax,
        i: s,
        gamma: minus,
    })
}

/// `<F^{-T}, xi ⊗ eta> = <xi, F^{-T} eta>`; zero iff the rank-one line through
/// `F` in direction `xi ⊗ eta` keeps the determinant constant.
pub fn tangent_test(f: &Mat2, dir: &RankOneDirection) -> Result<f64> {
    f.check_finite()?;
    let fit = f.inverse_transpose()?;
    Ok(dot2(dir.xi, fit.mul_vec(dir.eta)))
}

/// The tangent partner `xi = ε F^{-T} eta` of `eta` at `F`.
pub fn tangent_basis(f: &Mat2, eta: Vec2) -> Result<Vec2> {
    if eta == [0.0, 0.0] {
        return Err(Error::ZeroVector);
    }
    f.check_finite()?;
    let fit = f.inverse_transpose()?;
    Ok(ALTERNATOR.mul_vec(fit.mul_vec(eta)))
}

/// Full SVD `F = U diag(s1, s2) V^T` with `U`, `V` rotations.
///
/// `s1 >= |s2|`; `s2` carries the sign of `det F`.
pub fn svd_rotations(f: &Mat2) -> (Mat2, [f64; 2], Mat2) {
    let e = 0.5 * (f.a11() + f.a22());
    let g = 0.5 * (f.a11() - f.a22());
    let h = 0.5 * (f.a21() + f.a12());
    let k = 0.5 * (f.a21() - f.a12());
    let q = e.hypot(k);
    let r = g.hypot(h);
    let a1 = h.atan2(g);
    let a2 = k.atan2(e);
    let theta = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    // F = Rot(phi) diag(q + r, q - r) Rot(theta)
    (Mat2::rotation(phi), [q + r, q - r], Mat2::rotation(theta).transpose())
}

/// `F = Q1 · K(gamma) · Q2` with `K(gamma)` the simple shear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearDecomposition {
    pub q1: Mat2,
    pub gamma: f64,
    pub q2: Mat2,
}

impl ShearDecomposition {
    pub fn shear(&self) -> Mat2 {
        Mat2::shear(self.gamma)
    }

    pub fn reconstruct(&self) -> Mat2 {
        self.q1 * self.shear() * self.q2
    }
}

/// Decomposes `F ∈ SL(2)` as rotation · simple shear · rotation.
///
/// Both factors are proper rotations (`det = +1`), which is always
/// attainable on SL(2). `F = I` gives `Q1 = Q2 = I`.
pub fn shear_decompose(f: &Mat2) -> Result<ShearDecomposition> {
    shear_decompose_with_tol(f, DET_TOL)
}

pub fn shear_decompose_with_tol(f: &Mat2, tol: f64) -> Result<ShearDecomposition> {
    f.check_sl2(tol)?;
    let gamma = (f.norm_sq() - 2.0).max(0.0).sqrt();
    if f.a11() == 1.0 && f.a21() == 0.0 && f.a22() == 1.0 && f.a12() >= 0.0 {
        return Ok(ShearDecomposition {
            q1: Mat2::IDENTITY,
            gamma: f.a12(),
            q2: Mat2::IDENTITY,
        });
    }
    let (u_f, _, v_f) = svd_rotations(f);
    let (u_k, _, v_k) = svd_rotations(&Mat2::shear(gamma));
    // F = U_F S V_F^T and K = U_K S V_K^T share S.
    Ok(ShearDecomposition {
        q1: u_f * u_k.transpose(),
        gamma,
        q2: v_k * v_f.transpose(),
    })
}
