//! Seeded sampling of matrices and directions.
//!
//! Every random draw in the crate goes through a [`ChaCha8Rng`] obtained from
//! [`sample_rng`], so a `(seed, index)` pair fully determines a sample.

use std::f64::consts::{LN_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor2::{Mat2, Vec2};

/// Default half-width `L` of the `log λ` sampling interval, `ln 4`.
pub const DEFAULT_LOG_LAMBDA_MAX: f64 = 2.0 * LN_2;

/// Independent stream `index` of the generator seeded by `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    Mat2::rotation(rng.random_range(0.0..TAU))
}

/// A pair `(Q1, Q2)` in O(2) with `det Q1 · det Q2 = +1`, so `Q1 F Q2` stays
/// in the same determinant class as `F`.
pub fn random_orthogonal_pair<R: Rng + ?Sized>(rng: &mut R) -> (Mat2, Mat2) {
    let q1 = random_rotation(rng);
    let q2 = random_rotation(rng);
    if rng.random_bool(0.5) {
        let flip = Mat2::diag(1.0, -1.0);
        (q1 * flip, flip * q2)
    } else {
        (q1, q2)
    }
}

/// `Q1 · diag(λ, 1/λ) · Q2` with `log λ` uniform in `[-L, L]`; the
/// determinant is one by construction.
pub fn random_sl2<R: Rng + ?Sized>(rng: &mut R, log_lambda_max: f64) -> Mat2 {
    let lambda = rng.random_range(-log_lambda_max..=log_lambda_max).exp();
    random_rotation(rng) * Mat2::diag(lambda, 1.0 / lambda) * random_rotation(rng)
}

/// `Q1 · diag(λ1, λ2) · Q2` with independent `log λi` uniform in `[-L, L]`.
pub fn random_glplus<R: Rng + ?Sized>(rng: &mut R, log_lambda_max: f64) -> Mat2 {
    let l1 = rng.random_range(-log_lambda_max..=log_lambda_max).exp();
    let l2 = rng.random_range(-log_lambda_max..=log_lambda_max).exp();
    random_rotation(rng) * Mat2::diag(l1, l2) * random_rotation(rng)
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec2 {
    let (s, c) = rng.random_range(0.0..TAU).sin_cos();
    [c, s]
}

/// Matrix with entries uniform in `[-a, a]`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, a: f64) -> Mat2 {
    let mut e = || rng.random_range(-a..=a);
    Mat2::new(e(), e(), e(), e())
}

/// Unit directions at equally spaced angles in `[0, π)`; `η` and `-η` give
/// the same rank-one line so half a turn suffices.
pub fn direction_grid(n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|k| {
            let (s, c) = (std::f64::consts::PI * k as f64 / n as f64).sin_cos();
            [c, s]
        })
        .collect()
}
