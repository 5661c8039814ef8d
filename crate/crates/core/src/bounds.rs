//! The explicit Hölder bound on `‖L_{ε,c} − L_c‖²` and empirical rate fits.
//!
//! For levels `n ≥ 2` the dominant-term estimate plus Hölder's inequality with
//! conjugate exponents `1/p + 1/q = 1` give
//!
//! ```text
//! Σ_{n≥2} level_n ≤ 4p/((2−p)π²) · T^{2/p} · ε^{2/q} · Σ_{n≥2} 2n(2n−1) / (n² (pn−1)^{2/p})
//! ```
//!
//! (the multi-index factor `Σ_{n₁+n₂=n} (2n)!/(n!)² = 4ⁿ` is already folded in).
//! The series converges iff `2/p > 1`, i.e. `q > 2`; taking `q = 2/α` yields
//! the rate `ε^α` for every `α < 1`.
//!
//! # Level one
//!
//! With `g(a) = ln(1 + ε/a) = ∫₀^ε dx/(x+a)`, decreasing in `a`,
//!
//! ```text
//! F_{2,0} − F_{2,ε} = −(1/4π) [ (g(v−u) − g(v)) − (g(T−u) − g(T)) ]
//! ```
//!
//! and both differences lie in `[0, g(v−u)]`, so `|F_{2,0} − F_{2,ε}| ≤ g(v−u)/4π`.
//! The level-one contribution `8 ∫∫_{u<v} (F_{2,0} − F_{2,ε})²` is therefore at
//! most `T/(2π²) ∫₀^T g(τ)² dτ`. Hölder on `g(τ) ≤ ε^{1/q} (τ^{1−p}/(p−1))^{1/p}`
//! and `∫₀^T τ^{2/p−2} dτ = p T^{2/p−1}/(2−p)` give
//!
//! ```text
//! level_1 ≤ p T^{2/p} ε^{2/q} / (2π² (2−p) (p−1)^{2/p}),
//! ```
//!
//! which scales in `T` and `ε` exactly like the higher-level part.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::ModelParams;

/// Conjugate Hölder exponents for a target rate `α`: `q = 2/α`, `p = 2/(2−α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoelderParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

pub fn hoelder_from_alpha(alpha: f64) -> Result<HoelderParams> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!(
            "alpha must lie in (0, 1) for the bound series to converge, got {alpha}"
        )));
    }
    Ok(HoelderParams {
        alpha,
        p: 2.0 / (2.0 - alpha),
        q: 2.0 / alpha,
    })
}

/// Level `n` term `2n(2n−1) / (n² (pn−1)^{2/p})`, continued to real `x`.
fn series_term(p: f64, x: f64) -> f64 {
    (4.0 - 2.0 / x) * (p * x - 1.0).powf(-2.0 / p)
}

/// Σ_{n ≥ 2} of the level terms, `1 < p < 2`.
pub fn bound_series(p: f64) -> Result<f64> {
    bound_series_from(p, 2)
}

/// Σ_{n ≥ n_from} of the level terms, `n_from ≥ 2`.
///
/// The first terms are summed directly; the rest, which decay only like
/// `n^{−2/p}`, are evaluated by Euler–Maclaurin from `N ≥ 1000` with the exact
/// tail integral. The first omitted correction is `O(N^{−5−2/p})`.
pub fn bound_series_from(p: f64, n_from: u32) -> Result<f64> {
    check_p(p)?;
    if n_from < 2 {
        return Err(domain(format!("bound series starts at n = 2, got {n_from}")));
    }
    let cut = n_from.max(1000);
    let direct: f64 = (n_from..cut).rev().map(|n| series_term(p, n as f64)).sum();
    Ok(direct + euler_maclaurin_tail(p, cut as f64))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p < 2.0) {
        return Err(domain(format!("bound series needs 1 < p < 2 (converges iff 2/p > 1), got {p}")));
    }
    Ok(())
}

/// `Σ_{n ≥ N} t(n) ≈ ∫_N^∞ t + t(N)/2 − t'(N)/12 + t'''(N)/720`.
fn euler_maclaurin_tail(p: f64, n: f64) -> f64 {
    let s = 2.0 / p;
    let y = p * n - 1.0;
    let h0 = y.powf(-s);
    let h1 = -s * p * h0 / y;
    let h2 = s * (s + 1.0) * p * p * h0 / (y * y);
    let h3 = -s * (s + 1.0) * (s + 2.0) * p.powi(3) * h0 / (y * y * y);
    let (g0, g1, g2, g3) = (4.0 - 2.0 / n, 2.0 / (n * n), -4.0 / n.powi(3), 12.0 / n.powi(4));
    let t0 = g0 * h0;
    let t1 = g1 * h0 + g0 * h1;
    let t3 = g3 * h0 + 3.0 * g2 * h1 + 3.0 * g1 * h2 + g0 * h3;

    // ∫_N^∞ (px−1)^{−s} dx
    let i0 = y.powf(1.0 - s) / (p * (s - 1.0));
    // ∫_N^∞ x^{−1}(px−1)^{−s} dx, expanding (1 − 1/(px))^{−s} binomially
    let base = (p * n).powf(-s);
    let r = 1.0 / (p * n);
    let mut coeff = 1.0;
    let mut rk = 1.0;
    let mut i1 = 0.0;
    for k in 0..200 {
        let k = k as f64;
        let term = coeff * rk / (s + k);
        i1 += term;
        if term < 1e-20 * i1 {
            break;
        }
        coeff *= (s + k) / (k + 1.0);
        rk *= r;
    }
    i1 *= base;

    4.0 * i0 - 2.0 * i1 + 0.5 * t0 - t1 / 12.0 + t3 / 720.0
}

/// Prefactor `4p/((2−p)π²) · T^{2/p} · ε^{2/q}` of the higher-level bound.
fn higher_prefactor(params: &ModelParams, hp: &HoelderParams) -> f64 {
    4.0 * hp.p / ((2.0 - hp.p) * PI * PI)
        * params.horizon().powf(2.0 / hp.p)
        * params.eps().powf(2.0 / hp.q)
}

/// Hölder bound on the level-one contribution (see module docs).
pub fn level_one_bound(params: &ModelParams, hp: &HoelderParams) -> f64 {
    let p = hp.p;
    p * params.horizon().powf(2.0 / p) * params.eps().powf(2.0 / hp.q)
        / (2.0 * PI * PI * (2.0 - p) * (p - 1.0).powf(2.0 / p))
}

/// Hölder bound on `Σ_{n > n_max}` of the difference levels.
pub fn higher_level_tail_bound(params: &ModelParams, alpha: f64, n_max: u32) -> Result<f64> {
    let hp = hoelder_from_alpha(alpha)?;
    Ok(higher_prefactor(params, &hp) * bound_series_from(hp.p, n_max.max(1) + 1)?)
}

/// The pieces of [`theoretical_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    pub hoelder: HoelderParams,
    pub series: f64,
    pub higher_levels: f64,
    pub level_one: f64,
    pub total: f64,
}

pub fn bound_breakdown(params: &ModelParams, alpha: f64) -> Result<BoundBreakdown> {
    let hoelder = hoelder_from_alpha(alpha)?;
    if params.eps() <= 0.0 {
        return Err(domain("the convergence bound needs eps > 0"));
    }
    let series = bound_series(hoelder.p)?;
    let higher_levels = higher_prefactor(params, &hoelder) * series;
    let level_one = level_one_bound(params, &hoelder);
    Ok(BoundBreakdown {
        hoelder,
        series,
        higher_levels,
        level_one,
        total: higher_levels + level_one,
    })
}

/// Upper bound `C(T, α) ε^α` on `‖L_{ε,c} − L_c‖²`: higher levels plus level one.
pub fn theoretical_bound(params: &ModelParams, alpha: f64) -> Result<f64> {
    Ok(bound_breakdown(params, alpha)?.total)
}

/// Least-squares power law `value ≈ C ε^{α̂}` in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub alpha_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(domain(format!("rate fit needs at least 2 points, got {}", points.len())));
    }
    for &(eps, value) in points {
        if !(eps > 0.0 && eps.is_finite() && value > 0.0 && value.is_finite()) {
            return Err(domain(format!("rate fit needs positive finite data, got ({eps}, {value})")));
        }
    }
    let mut sorted: Vec<f64> = points.iter().map(|p| p.0).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(domain("rate fit needs distinct eps values"));
    }

    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit {
        alpha_hat: slope,
        intercept,
        r_squared,
        points_used: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn hoelder_examples() {
        let h = hoelder_from_alpha(0.5).unwrap();
        assert_eq!(h.q, 4.0);
        assert!((h.p - 4.0 / 3.0).abs() < 1e-15);
        let h = hoelder_from_alpha(0.9).unwrap();
        assert!((h.q - 20.0 / 9.0).abs() < 1e-15 && (h.p - 20.0 / 11.0).abs() < 1e-15);
        assert!(matches!(hoelder_from_alpha(1.0), Err(Error::Domain(_))));
        assert!(hoelder_from_alpha(0.0).is_err());
        assert!(hoelder_from_alpha(f64::NAN).is_err());
    }

    #[test]
    fn conjugacy_on_dense_grid() {
        for i in 1..1000 {
            let h = hoelder_from_alpha(i as f64 / 1000.0).unwrap();
            assert!((1.0 / h.p + 1.0 / h.q - 1.0).abs() <= 1e-15);
            assert!(h.q > 2.0 && 2.0 / h.p > 1.0);
        }
    }

    #[test]
    fn bound_series_domain() {
        assert!(matches!(bound_series(2.0), Err(Error::Domain(_))));
        assert!(bound_series(1.0).is_err());
        assert!(bound_series_from(1.5, 1).is_err());
    }

    #[test]
    fn bound_series_grows_toward_divergence() {
        let mut prev = 0.0;
        for &p in &[1.1, 1.3, 1.5, 1.7, 1.9, 1.99, 1.999] {
            let s = bound_series(p).unwrap();
            assert!(s.is_finite() && s > prev, "p = {p}");
            prev = s;
        }
        assert!(prev > 1e3);
    }

    #[test]
    fn bound_series_matches_direct_summation() {
        // direct sum to 10⁶ bracketed by the integral test on the monotone tail
        let p = 1.5;
        let cut = 1_000_000u32;
        let direct: f64 = (2..=cut).rev().map(|n| series_term(p, n as f64)).sum();
        let s = 2.0 / p;
        let upper_tail = 4.0 * (p * cut as f64 - 1.0).powf(1.0 - s) / (p * (s - 1.0));
        let got = bound_series(p).unwrap();
        assert!(got > direct && got < direct + upper_tail);
        let mid = direct + 0.5 * upper_tail;
        assert!((got - mid).abs() < 0.5 * upper_tail);
        // 40-digit references: direct sum to 2·10⁴ plus exact tail integrals
        for (p, reference) in [(1.2, 4.536_228_704_554_293), (1.5, 6.555_414_247_156_02), (1.9, 37.895_239_880_997_19)] {
            let got = bound_series(p).unwrap();
            assert!((got - reference).abs() < 1e-12 * reference, "p = {p}: {got}");
        }
    }

    #[test]
    fn euler_maclaurin_agrees_with_later_start() {
        // summing 1000..5000 directly and starting EM at 5000 must agree
        for &p in &[1.2, 1.5, 1.9] {
            let a = euler_maclaurin_tail(p, 1000.0);
            let direct: f64 = (1000..5000).map(|n| series_term(p, n as f64)).sum();
            let b = direct + euler_maclaurin_tail(p, 5000.0);
            assert!((a - b).abs() < 1e-13 * a, "p = {p}: {a} vs {b}");
        }
    }

    #[test]
    fn bound_scales_as_power_laws() {
        let hp = hoelder_from_alpha(0.9).unwrap();
        let p1 = ModelParams::new(1.0, 0.01).unwrap();
        let p2 = ModelParams::new(1.0, 0.005).unwrap();
        let b1 = bound_breakdown(&p1, 0.9).unwrap();
        let b2 = bound_breakdown(&p2, 0.9).unwrap();
        let ratio = 2f64.powf(-0.9);
        assert!((b2.higher_levels / b1.higher_levels - ratio).abs() < 1e-14);
        assert!((b2.level_one / b1.level_one - ratio).abs() < 1e-14);
        let p3 = ModelParams::new(2.0, 0.01).unwrap();
        let b3 = bound_breakdown(&p3, 0.9).unwrap();
        assert!((b3.higher_levels / b1.higher_levels - 2f64.powf(2.0 / hp.p)).abs() < 1e-13);
    }

    #[test]
    fn bound_needs_positive_eps() {
        let p = ModelParams::new(1.0, 0.0).unwrap();
        assert!(theoretical_bound(&p, 0.9).is_err());
    }

    #[test]
    fn tail_bound_shrinks_with_truncation() {
        let p = ModelParams::new(1.0, 0.1).unwrap();
        let t15 = higher_level_tail_bound(&p, 0.9, 15).unwrap();
        let t25 = higher_level_tail_bound(&p, 0.9, 25).unwrap();
        let full = bound_breakdown(&p, 0.9).unwrap().higher_levels;
        assert!(t25 < t15 && t15 < full);
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = [0.1, 0.01, 0.001].iter().map(|&e: &f64| (e, 3.0 * e.powf(0.9))).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.alpha_hat - 0.9).abs() <= 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() <= 1e-12);
        assert_eq!(f.r_squared, 1.0);
        assert_eq!(f.points_used, 3);

        let f = fit_rate(&[(0.5, 2.0), (0.25, 0.5)]).unwrap();
        assert!((f.alpha_hat - 2.0).abs() < 1e-15);

        assert!(fit_rate(&[(0.5, 2.0)]).is_err());
        assert!(fit_rate(&[(0.5, 2.0), (0.5, 1.0)]).is_err());
        assert!(fit_rate(&[(0.5, 2.0), (0.25, -1.0)]).is_err());
        assert!(fit_rate(&[(0.0, 2.0), (0.25, 1.0)]).is_err());
    }
}
