//! Monte Carlo ground truth for `L_ε` from sampled planar Brownian paths.
//!
//! Path `p` under seed `s` draws its increments from ChaCha8 keyed by `s` on
//! stream `p`, so every path is reproducible on its own and results do not
//! depend on how paths are scheduled across threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};

/// Gaussian mollifier `δ_ε(x) = exp(−|x|²/2ε) / (2πε)` in the plane.
pub fn delta_eps(x: [f64; 2], eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(density(x[0] * x[0] + x[1] * x[1], eps))
}

#[inline]
fn density(r2: f64, eps: f64) -> f64 {
    (-r2 / (2.0 * eps)).exp() / (2.0 * PI * eps)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(domain(format!("eps must be > 0, got {eps}")));
    }
    Ok(())
}

/// A discretized path `B(k·dt)`, `k = 0..=floor(T/dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub stream: u64,
    pub points: Vec<[f64; 2]>,
}

impl PathSample {
    /// Number of steps `floor(T/dt)`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// `floor(T/dt)`, treating ratios within rounding of an integer as exact.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite() && horizon.is_finite()) || dt > horizon {
        return Err(domain(format!("need 0 < dt <= T, got dt = {dt}, T = {horizon}")));
    }
    let ratio = horizon / dt;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest { nearest } else { ratio.floor() };
    Ok(steps as usize)
}

pub fn sample_path(horizon: f64, dt: f64, seed: u64) -> Result<PathSample> {
    sample_path_stream(horizon, dt, seed, 0)
}

/// Path number `stream` of the family keyed by `seed`.
pub fn sample_path_stream(horizon: f64, dt: f64, seed: u64, stream: u64) -> Result<PathSample> {
    let steps = step_count(horizon, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let scale = dt.sqrt();
    let mut points = Vec::with_capacity(steps + 1);
    let mut pos = [0.0f64; 2];
    points.push(pos);
    for _ in 0..steps {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        pos = [pos[0] + scale * dx, pos[1] + scale * dy];
        points.push(pos);
    }
    Ok(PathSample {
        dt,
        horizon,
        seed,
        stream,
        points,
    })
}

/// Left-point double Riemann sum `dt² Σ_{0≤j<i<N} δ_ε(B_i − B_j)`, `N = floor(T/dt)`.
pub fn l_eps_riemann(path: &PathSample, eps: f64) -> Result<f64> {
    Ok(l_eps_riemann_multi(path, &[eps])?[0])
}

/// [`l_eps_riemann`] for several `ε` in one pass over the pairs.
pub fn l_eps_riemann_multi(path: &PathSample, eps: &[f64]) -> Result<Vec<f64>> {
    for &e in eps {
        check_eps(e)?;
    }
    let pts = &path.points[..path.steps()];
    let scales: Vec<f64> = eps.iter().map(|e| -1.0 / (2.0 * e)).collect();
    let mut sums = vec![0.0; eps.len()];
    let mut row = vec![0.0; eps.len()];
    for (i, p) in pts.iter().enumerate() {
        row.iter_mut().for_each(|r| *r = 0.0);
        for q in &pts[..i] {
            let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
            let r2 = dx * dx + dy * dy;
            for (r, &c) in row.iter_mut().zip(&scales) {
                *r += (r2 * c).exp();
            }
        }
        sums.iter_mut().zip(&row).for_each(|(s, r)| *s += r);
    }
    let dt2 = path.dt * path.dt;
    Ok(sums.iter().zip(eps).map(|(s, e)| dt2 * s / (2.0 * PI * e)).collect())
}

/// Exact expectation of the discrete estimator:
/// `dt² Σ_{k=1}^{N−1} (N−k) / (2π(k·dt + ε))`.
pub fn riemann_mean(horizon: f64, dt: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let steps = step_count(horizon, dt)?;
    let sum: f64 = (1..steps)
        .rev()
        .map(|k| (steps - k) as f64 / (k as f64 * dt + eps))
        .sum();
    Ok(dt * dt * sum / (2.0 * PI))
}

/// Sample moments of `L_ε` over independent paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub eps: f64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error_mean: f64,
    /// Standard error of the sample variance from the fourth central moment.
    pub std_error_variance: f64,
    pub n_paths: usize,
    pub seed: u64,
}

fn moments(values: &[f64], eps: f64, seed: u64) -> MCEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in values {
        let d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    let m4 = m4 / n;
    let var_of_var = (m4 - (n - 3.0) / (n - 1.0) * variance * variance) / n;
    MCEstimate {
        eps,
        mean,
        variance,
        std_error_mean: (variance / n).sqrt(),
        std_error_variance: var_of_var.max(0.0).sqrt(),
        n_paths: values.len(),
        seed,
    }
}

pub fn mc_moments(horizon: f64, eps: f64, dt: f64, n_paths: usize, seed: u64) -> Result<MCEstimate> {
    Ok(mc_moments_multi(horizon, &[eps], dt, n_paths, seed)?[0])
}

/// Moments for each `ε` from one shared set of paths.
pub fn mc_moments_multi(horizon: f64, eps: &[f64], dt: f64, n_paths: usize, seed: u64) -> Result<Vec<MCEstimate>> {
    if n_paths < 2 {
        return Err(domain(format!("need n_paths >= 2, got {n_paths}")));
    }
    if eps.is_empty() {
        return Err(domain("need at least one eps"));
    }
    for &e in eps {
        check_eps(e)?;
    }
    step_count(horizon, dt)?;
    let per_path: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| l_eps_riemann_multi(&sample_path_stream(horizon, dt, seed, p)?, eps))
        .collect::<Result<_>>()?;
    Ok(eps
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let column: Vec<f64> = per_path.iter().map(|v| v[k]).collect();
            moments(&column, e, seed)
        })
        .collect())
}
