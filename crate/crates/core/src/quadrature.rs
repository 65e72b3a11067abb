//! Deterministic tensor-product quadrature over boxes, with a Monte Carlo
//! fallback for higher-dimensional integrals.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to integrate over a box power `Lambda^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum QuadratureSpec {
    /// Composite midpoint rule with a fixed number of points per axis.
    Midpoint { points_per_axis: usize },
    /// Stratified-free uniform sampling with a fixed seed.
    MonteCarlo { samples: usize, seed: u64 },
}

impl QuadratureSpec {
    pub fn midpoint(points_per_axis: usize) -> Self {
        QuadratureSpec::Midpoint { points_per_axis }
    }
}

/// Midpoint rule for `f` over the product of `n` copies of the box
/// `[lo, hi] in R^d`. The integrand receives a flat slice of `n*d`
/// coordinates, grouped point by point.
pub fn tensor_midpoint(
    lo: &[f64],
    hi: &[f64],
    n: usize,
    pts_per_axis: usize,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> f64 {
    let d = lo.len();
    let dims = n * d;
    if dims == 0 {
        return f(&[]);
    }
    let steps: Vec<f64> = (0..d).map(|a| (hi[a] - lo[a]) / pts_per_axis as f64).collect();
    let cell: f64 = steps.iter().product::<f64>().powi(n as i32);
    let mut idx = vec![0usize; dims];
    let mut x = vec![0.0f64; dims];
    let mut total = 0.0;
    loop {
        for k in 0..dims {
            let a = k % d;
            x[k] = lo[a] + (idx[k] as f64 + 0.5) * steps[a];
        }
        total += f(&x);
        // odometer increment
        let mut k = 0;
        loop {
            if k == dims {
                return total * cell;
            }
            idx[k] += 1;
            if idx[k] < pts_per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn monte_carlo(
    lo: &[f64],
    hi: &[f64],
    n: usize,
    samples: usize,
    seed: u64,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> (f64, f64) {
    let d = lo.len();
    let dims = n * d;
    if dims == 0 {
        let v = f(&[]);
        return (v, 0.0);
    }
    let vol: f64 = (0..d).map(|a| hi[a] - lo[a]).product::<f64>().powi(n as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
    let mut x = vec![0.0f64; dims];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        for k in 0..dims {
            let a = k % d;
            x[k] = lo[a] + (hi[a] - lo[a]) * rng.gen::<f64>();
        }
        let v = f(&x);
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    let stderr = (var / samples as f64).sqrt();
    (mean * vol, stderr * vol)
}

/// Integrate `f` over `n` copies of the box, returning the value and an
/// error estimate (half-resolution difference for the midpoint rule,
/// standard error for Monte Carlo).
pub fn integrate_n(
    lo: &[f64],
    hi: &[f64],
    n: usize,
    spec: QuadratureSpec,
    f: &mut dyn FnMut(&[f64]) -> f64,
) -> (f64, f64) {
    match spec {
        QuadratureSpec::Midpoint { points_per_axis } => {
            let fine = tensor_midpoint(lo, hi, n, points_per_axis, f);
            if n == 0 {
                return (fine, 0.0);
            }
            let half = (points_per_axis / 2).max(1);
            let coarse = tensor_midpoint(lo, hi, n, half, f);
            (fine, (fine - coarse).abs())
        }
        QuadratureSpec::MonteCarlo { samples, seed } => monte_carlo(lo, hi, n, samples, seed, f),
    }
}

/// Adaptive trapezoid rule on `[a, b]`, doubling the resolution until the
/// relative change drops below `rel_tol`.
pub fn adaptive_trapezoid(
    a: f64,
    b: f64,
    rel_tol: f64,
    f: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if !(b >= a) {
        return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut n = 64usize;
    let mut prev = trapezoid(a, b, n, f);
    for _ in 0..24 {
        n *= 2;
        let cur = trapezoid(a, b, n, f);
        let scale = cur.abs().max(prev.abs()).max(1e-300);
        if (cur - prev).abs() <= rel_tol * scale {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numeric(format!(
        "trapezoid rule on [{a}, {b}] did not reach relative tolerance {rel_tol}"
    )))
}

fn trapezoid(a: f64, b: f64, n: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}
