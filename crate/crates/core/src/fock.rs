//! Fock-space norms of the chaos kernels, level by level and summed.
//!
//! # Reduction
//!
//! A level-`n` kernel depends on its `2n` times only through `u = min` and
//! `v = max`, so integrating out the interior times gives
//!
//! ```text
//! ∫_{[0,T]^{2n}} g(min, max) = 2n(2n−1) ∫∫_{u<v} (v−u)^{2n−2} g(u, v) du dv.
//! ```
//!
//! Summing `(2n)! ‖F_{2n}‖²` over the multi-indices `n₁ + n₂ = n` turns the
//! `(n₁! n₂!)⁻²` of the prefactor into `c_n = Σ_k C(2k,k) C(2n−2k,n−k) = 4ⁿ`, so
//! level `n ≥ 2` is
//!
//! ```text
//! c_n 2n(2n−1) / (n(n−1) 2π 2ⁿ)² · ∫∫_{u<v} ((v−u)^{n−1} K)² = (2n−1)/(2π² n(n−1)²) · ∫∫ (…)²
//! ```
//!
//! with `K` the bracket (or bracket difference). Each scaled bracket is a signed
//! sum of ratios `(v−u)/b ≤ 1` raised to `n−1`.
//!
//! # Level one
//!
//! The multi-indices `(1,0)` and `(0,1)` have the same kernel, each weighted
//! by `2! = 2`; the integrand is symmetric under `u ↔ v`, so
//! `Σ (2)! ‖F₂‖² = 2 · 2 · 2 ∫∫_{u<v} F₂² = 8 ∫∫_{u<v} F₂²`.
//! The factor `c₁ = 4` already contains the two `(2)!/(1!)²` multi-index terms.
//!
//! # Remainder
//!
//! Levels decay only like `T²/(2π² n²)` once `n` exceeds `T/ε`, so partial
//! sums converge slowly. Expanding the square of the scaled bracket pointwise
//! as `Σ σᵢσⱼ (rᵢ rⱼ)^{n−1}`, the sum over all levels beyond the truncation
//! is `(1/2π²) Σ σᵢσⱼ level_tail(N, rᵢ rⱼ)` and is integrated once.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::higher_level_tail_bound;
use crate::error::{domain, Error, Result};
use crate::kernels::{log_kernel, log_kernel_diff, scaled_bracket, scaled_diff_bracket, ModelParams};
use crate::quadrature::{integrate_triangle, QuadratureConfig, QuadratureResult, TrianglePoint};
use crate::resummation::{level_coefficient, level_tail};

/// Weight of the level-one integral over `u < v`.
pub const LEVEL_ONE_WEIGHT: f64 = 8.0;

/// Rate used for the certified truncation bound of the difference series.
pub const TAIL_BOUND_ALPHA: f64 = 0.9;

const INV_2PI2: f64 = 1.0 / (2.0 * PI * PI);

/// `c_n = Σ_{k=0}^{n} C(2k,k) C(2n−2k,n−k)`, exact for `n ≤ 30`.
pub fn combinatorial_weight(n: u32) -> Result<u64> {
    if n > 30 {
        return Err(domain(format!("combinatorial_weight is exact only for n <= 30, got {n}")));
    }
    let central: Vec<u128> = (0..=n as u128)
        .scan(1u128, |c, k| {
            let out = *c;
            // C(2k+2, k+1) = C(2k, k) · 2(2k+1)/(k+1)
            *c = *c * 2 * (2 * k + 1) / (k + 1);
            Some(out)
        })
        .collect();
    let total: u128 = (0..=n as usize).map(|k| central[k] * central[n as usize - k]).sum();
    u64::try_from(total).map_err(|_| domain(format!("combinatorial_weight({n}) overflows u64")))
}

/// Weight `(2n−1)/(2π² n(n−1)²)` of the reduced level-`n` integral, `n ≥ 2`.
pub fn level_weight(n: u32) -> f64 {
    INV_2PI2 * level_coefficient(n)
}

/// One total level: `Σ_{n₁+n₂=n} (2n)! ‖·‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaosLevelResult {
    pub n: u32,
    pub value: f64,
    #[serde(skip)]
    pub quad: QuadratureResult,
}

/// Partial sum up to `truncation_level` plus the resummed remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    /// `partial_sum + remainder.value`.
    pub total: f64,
    pub partial_sum: f64,
    /// All levels beyond the truncation, summed in closed form and integrated.
    pub remainder: QuadratureResult,
    pub levels: Vec<ChaosLevelResult>,
    pub truncation_level: u32,
    /// Certified upper bound on the levels beyond the truncation.
    pub tail_bound: f64,
}

impl SeriesResult {
    pub fn converged(&self) -> bool {
        self.remainder.converged && self.levels.iter().all(|l| l.quad.converged)
    }

    /// `Err(NotConverged)` for the first piece that exhausted its budget.
    pub fn ensure_converged(&self) -> Result<&Self> {
        for quad in self.levels.iter().map(|l| &l.quad).chain([&self.remainder]) {
            quad.ensure_converged()?;
        }
        Ok(self)
    }

    pub fn abs_error_estimate(&self) -> f64 {
        self.remainder.abs_error_estimate + self.levels.iter().map(|l| l.quad.abs_error_estimate).sum::<f64>()
    }
}

fn level_result(n: u32, weight: f64, quad: QuadratureResult) -> ChaosLevelResult {
    let quad = quad.scaled(weight);
    ChaosLevelResult { n, value: quad.value, quad }
}

fn singular_edge(pt: &TrianglePoint) -> Result<()> {
    if pt.gap == 0.0 {
        return Err(Error::SingularInput("reduced integrand undefined on u = v".into()));
    }
    Ok(())
}

/// Level `n ≥ 2` of `‖L_{ε,c} − L_c‖²`.
pub fn level_diff_norm_sq(n: u32, params: &ModelParams, cfg: &QuadratureConfig) -> Result<ChaosLevelResult> {
    if n < 2 {
        return Err(domain(format!("level_diff_norm_sq needs n >= 2, got {n}")));
    }
    cfg.validate()?;
    let (horizon, eps) = (params.horizon(), params.eps());
    if eps == 0.0 {
        return Ok(level_result(n, 1.0, QuadratureResult::exact(0.0)));
    }
    let m = n - 1;
    let quad = integrate_triangle(
        |pt| {
            singular_edge(&pt)?;
            let k = scaled_diff_bracket(m, pt.u, pt.gap, horizon, eps);
            Ok(k * k)
        },
        horizon,
        cfg,
    )?;
    Ok(level_result(n, level_weight(n), quad))
}

/// Level one of `‖L_{ε,c} − L_c‖²`.
pub fn level_one_diff_norm_sq(params: &ModelParams, cfg: &QuadratureConfig) -> Result<ChaosLevelResult> {
    cfg.validate()?;
    let (horizon, eps) = (params.horizon(), params.eps());
    if eps == 0.0 {
        return Ok(level_result(1, 1.0, QuadratureResult::exact(0.0)));
    }
    let quad = integrate_triangle(
        |pt| {
            singular_edge(&pt)?;
            let k = log_kernel_diff(pt.u, pt.gap, horizon, eps);
            Ok(k * k)
        },
        horizon,
        cfg,
    )?;
    Ok(level_result(1, LEVEL_ONE_WEIGHT, quad))
}

/// Level `n ≥ 1` of `‖L_{ε,c}‖²`; `ε = 0` gives the level of `L_c`.
pub fn level_norm_sq(n: u32, params: &ModelParams, cfg: &QuadratureConfig) -> Result<ChaosLevelResult> {
    if n < 1 {
        return Err(domain("level_norm_sq needs n >= 1"));
    }
    cfg.validate()?;
    let (horizon, eps) = (params.horizon(), params.eps());
    let quad = if n == 1 {
        integrate_triangle(
            |pt| {
                if eps == 0.0 {
                    singular_edge(&pt)?;
                }
                let k = log_kernel(pt.u, pt.gap, horizon, eps);
                Ok(k * k)
            },
            horizon,
            cfg,
        )?
    } else {
        let m = n - 1;
        integrate_triangle(
            |pt| {
                if eps == 0.0 {
                    singular_edge(&pt)?;
                }
                let k = scaled_bracket(m, pt.u, pt.gap, horizon, eps);
                Ok(k * k)
            },
            horizon,
            cfg,
        )?
    };
    let weight = if n == 1 { LEVEL_ONE_WEIGHT } else { level_weight(n) };
    Ok(level_result(n, weight, quad))
}

/// `(1/2π²) Σᵢⱼ σᵢσⱼ level_tail(N, rᵢ rⱼ)` for signed ratios `(σ, r)`.
fn resummed_square(n_max: u32, ratios: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for (i, &(si, ri)) in ratios.iter().enumerate() {
        acc += level_tail(n_max, ri * ri);
        for &(sj, rj) in &ratios[..i] {
            acc += 2.0 * si * sj * level_tail(n_max, ri * rj);
        }
    }
    INV_2PI2 * acc
}

fn diff_remainder(params: &ModelParams, n_max: u32, cfg: &QuadratureConfig) -> Result<QuadratureResult> {
    let (horizon, eps) = (params.horizon(), params.eps());
    if eps == 0.0 {
        return Ok(QuadratureResult::exact(0.0));
    }
    integrate_triangle(
        |pt| {
            singular_edge(&pt)?;
            let TrianglePoint { u, v, gap } = pt;
            let ratios = [
                (1.0, gap / horizon),
                (-1.0, gap / (horizon + eps)),
                (-1.0, gap / v),
                (1.0, gap / (v + eps)),
                (-1.0, gap / (horizon - u)),
                (1.0, gap / (horizon - u + eps)),
                (1.0, 1.0),
                (-1.0, gap / (gap + eps)),
            ];
            Ok(resummed_square(n_max, &ratios).max(0.0))
        },
        horizon,
        cfg,
    )
}

fn norm_remainder(params: &ModelParams, n_max: u32, cfg: &QuadratureConfig) -> Result<QuadratureResult> {
    let (horizon, eps) = (params.horizon(), params.eps());
    integrate_triangle(
        |pt| {
            if eps == 0.0 {
                singular_edge(&pt)?;
            }
            let TrianglePoint { u, v, gap } = pt;
            let ratios = [
                (1.0, gap / (horizon + eps)),
                (-1.0, gap / (v + eps)),
                (-1.0, gap / (horizon - u + eps)),
                (1.0, gap / (gap + eps)),
            ];
            Ok(resummed_square(n_max, &ratios).max(0.0))
        },
        horizon,
        cfg,
    )
}

enum Piece {
    Level(ChaosLevelResult),
    Remainder(QuadratureResult),
}

fn assemble(
    n_max: u32,
    tail_bound: f64,
    level: impl Fn(u32) -> Result<ChaosLevelResult> + Sync,
    remainder: impl Fn() -> Result<QuadratureResult> + Sync,
) -> Result<SeriesResult> {
    // the remainder is the slowest piece; it runs alongside the levels
    let pieces: Vec<Piece> = (0..=n_max)
        .into_par_iter()
        .map(|n| if n == 0 { remainder().map(Piece::Remainder) } else { level(n).map(Piece::Level) })
        .collect::<Result<_>>()?;
    let mut levels = Vec::with_capacity(n_max as usize);
    let mut remainder = QuadratureResult::exact(0.0);
    for piece in pieces {
        match piece {
            Piece::Level(l) => levels.push(l),
            Piece::Remainder(r) => remainder = r,
        }
    }
    let partial_sum: f64 = levels.iter().map(|l| l.value).sum();
    Ok(SeriesResult {
        total: partial_sum + remainder.value,
        partial_sum,
        remainder,
        levels,
        truncation_level: n_max,
        tail_bound,
    })
}

/// `‖L_{ε,c} − L_c‖² = Σ_{n ≥ 1} (2n)! ‖F_{2n,0} − F_{2n,ε}‖²`, levels `1..=n_max`
/// integrated one by one and the rest resummed.
pub fn total_diff_norm_sq(params: &ModelParams, n_max: u32, cfg: &QuadratureConfig) -> Result<SeriesResult> {
    if n_max < 2 {
        return Err(domain(format!("total_diff_norm_sq needs n_max >= 2, got {n_max}")));
    }
    cfg.validate()?;
    let tail_bound = if params.eps() > 0.0 {
        higher_level_tail_bound(params, TAIL_BOUND_ALPHA, n_max)?
    } else {
        0.0
    };
    assemble(
        n_max,
        tail_bound,
        |n| {
            if n == 1 {
                level_one_diff_norm_sq(params, cfg)
            } else {
                level_diff_norm_sq(n, params, cfg)
            }
        },
        || diff_remainder(params, n_max, cfg),
    )
}

/// `‖L_{ε,c}‖² = Var(L_ε)`, levels `1..=n_max` integrated one by one and the rest resummed.
pub fn total_norm_sq(params: &ModelParams, n_max: u32, cfg: &QuadratureConfig) -> Result<SeriesResult> {
    if n_max < 1 {
        return Err(domain("total_norm_sq needs n_max >= 1"));
    }
    cfg.validate()?;
    // every scaled bracket is bounded by ρ^{n−1}, ρ = T/(T+ε), on a triangle of area T²/2
    let (horizon, eps) = (params.horizon(), params.eps());
    let rho = horizon / (horizon + eps);
    let tail_bound = 0.5 * horizon * horizon * INV_2PI2 * level_tail(n_max, rho * rho);
    assemble(
        n_max,
        tail_bound,
        |n| level_norm_sq(n, params, cfg),
        || norm_remainder(params, n_max, cfg),
    )
}
