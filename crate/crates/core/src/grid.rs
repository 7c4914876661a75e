//! Evaluation grids and divided-difference scans.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    b
                } else {
                    a + (b - a) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `n` geometrically spaced points from `a` to `b` inclusive (`0 < a`).
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    uniform(la, lb, n)
        .into_iter()
        .enumerate()
        .map(|(k, x)| match k {
            0 => a,
            _ if k == n - 1 => b,
            _ => x.exp(),
        })
        .collect()
}

pub fn sample<F>(xs: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    xs.iter().map(|&x| f(x)).collect()
}

/// Smallest value of a tested inequality together with where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub value: f64,
    pub at: Vec<f64>,
}

impl Slack {
    pub fn new(value: f64, at: Vec<f64>) -> Self {
        Slack { value, at }
    }

    pub fn min(a: Option<Slack>, b: Option<Slack>) -> Option<Slack> {
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.value < a.value { b } else { a }),
            (a, None) => a,
            (None, b) => b,
        }
    }
}

/// First divided differences `f[x_k, x_{k+1}]`.
pub fn slopes(xs: &[f64], fs: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(fs.windows(2))
        .map(|(x, f)| (f[1] - f[0]) / (x[1] - x[0]))
        .collect()
}

/// `2·f[x_{k-1}, x_k, x_{k+1}]`, which reduces to `(f₊ − 2f + f₋)/h²` on a
/// uniform grid. Entry `k - 1` belongs to interior point `k`.
pub fn second_differences(xs: &[f64], fs: &[f64]) -> Vec<f64> {
    xs.windows(3)
        .zip(fs.windows(3))
        .map(|(x, f)| {
            let left = (f[1] - f[0]) / (x[1] - x[0]);
            let right = (f[2] - f[1]) / (x[2] - x[1]);
            2.0 * (right - left) / (x[2] - x[0])
        })
        .collect()
}

/// Most negative slope, located by the pair of grid points spanning it.
pub fn min_slope(xs: &[f64], fs: &[f64]) -> Option<Slack> {
    slopes(xs, fs)
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, v)| Slack::new(v, vec![xs[k], xs[k + 1]]))
}

/// Most negative second divided difference, located by its grid triple.
pub fn min_second_difference(xs: &[f64], fs: &[f64]) -> Option<Slack> {
    second_differences(xs, fs)
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, v)| Slack::new(v, vec![xs[k], xs[k + 1], xs[k + 2]]))
}

/// Interior indices whose second difference exceeds `1e3` times both
/// neighbours' (with a small floor so that round-off on linear data does not
/// register).
pub fn kinks(xs: &[f64], fs: &[f64]) -> Vec<usize> {
    let d = second_differences(xs, fs);
    let scale = fs.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let floor = 1e-9 * (1.0 + scale);
    (0..d.len())
        .filter(|&k| {
            let left = if k > 0 { d[k - 1].abs() } else { 0.0 };
            let right = d.get(k + 1).map_or(0.0, |v| v.abs());
            d[k].abs() > 1e3 * left.max(right).max(floor)
        })
        .map(|k| k + 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_endpoints() {
        let g = uniform(0.0, 8.0, 801);
        assert_eq!((g[0], g[400], g[800]), (0.0, 4.0, 8.0));
        let t = log_spaced(1.0, 16.0, 801);
        assert_eq!((t[0], t[800]), (1.0, 16.0));
        assert!((t[400] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_second_difference_at_unit_spacing() {
        let xs = [1.0, 2.0, 3.0];
        let fs = xs.map(f64::sqrt);
        let d = second_differences(&xs, &fs)[0];
        assert!((d - (3f64.sqrt() - 2.0 * 2f64.sqrt() + 1.0)).abs() < 1e-15);
        assert!((d + 0.0964).abs() < 1e-4);
    }

    #[test]
    fn nonuniform_second_difference_matches_quadratic() {
        let xs = log_spaced(1.0, 16.0, 50);
        let fs: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - x).collect();
        for d in second_differences(&xs, &fs) {
            assert!((d - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn min_slope_finds_descent() {
        let xs = uniform(0.0, 4.0, 5);
        let fs = [0.0, 1.0, 0.5, 2.0, 3.0];
        let s = min_slope(&xs, &fs).unwrap();
        assert_eq!(s.value, -0.5);
        assert_eq!(s.at, vec![1.0, 2.0]);
    }

    #[test]
    fn kink_detection() {
        let xs = uniform(0.0, 2.0, 201);
        let fs: Vec<f64> = xs.iter().map(|x| (x - 1.0).abs()).collect();
        assert_eq!(kinks(&xs, &fs), vec![100]);
        let smooth: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(kinks(&xs, &smooth).is_empty());
        let linear: Vec<f64> = xs.iter().map(|x| 0.3 * x).collect();
        assert!(kinks(&xs, &linear).is_empty());
    }
}
