//! Chaos kernels of the centered approximate self-intersection local time
//! `L_{ε,c}` of planar Brownian motion on `[0, T]`.
//!
//! The kernel at Fock level `2n = (2n₁, 2n₂)` depends on its `2n` time
//! arguments only through `u = min` and `v = max`:
//!
//! ```text
//! F_{2n,ε} = (1/2π) (−1/2)ⁿ / (n(n−1) n₁! n₂!)
//!            · [ (T+ε)^{1−n} − (v+ε)^{1−n} − (T−u+ε)^{1−n} + (v−u+ε)^{1−n} ]      (n > 1)
//! F_{2,ε}  = −(1/4π) [ ln(v+ε) + ln(T−u+ε) − ln(v−u+ε) − ln(T+ε) ]                (n = 1)
//! ```
//!
//! `ε = 0` gives the kernels of the renormalized limit `L_c`. Levels with an
//! odd component vanish identically and are not represented.
//!
//! Brackets are evaluated grouped as `(T-term − (T−u)-term) + ((v−u)-term − v-term)`
//! so that the cancellations at `u = 0` and `v = T` are exact in floating point.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Time horizon `T` and mollifier width `ε` of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    horizon: f64,
    eps: f64,
}

impl ModelParams {
    /// `horizon > 0` and `eps ≥ 0`, both finite. `eps = 0` denotes the limit object `L_c`.
    pub fn new(horizon: f64, eps: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(domain(format!("time horizon must be finite and > 0, got {horizon}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(domain(format!("eps must be finite and >= 0, got {eps}")));
        }
        Ok(Self { horizon, eps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Same horizon, different `ε`.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.horizon, eps)
    }
}

/// Multi-index `(n₁, n₂)` of a chaos level of the two-component Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub n1: u32,
    pub n2: u32,
}

impl MultiIndex {
    pub fn new(n1: u32, n2: u32) -> Self {
        Self { n1, n2 }
    }

    /// `n = n₁ + n₂`.
    pub fn total(&self) -> u32 {
        self.n1 + self.n2
    }

    /// `n! = n₁!·n₂!` as an exact integer, `None` when a component exceeds 20
    /// or the product overflows.
    pub fn factorial(&self) -> Option<u64> {
        factorial(self.n1)?.checked_mul(factorial(self.n2)?)
    }

    /// `ln(n₁!·n₂!)`.
    pub fn ln_factorial(&self) -> f64 {
        ln_factorial(self.n1) + ln_factorial(self.n2)
    }
}

/// Exact `k!` for `k ≤ 20`.
pub fn factorial(k: u32) -> Option<u64> {
    if k > 20 {
        return None;
    }
    Some((1..=k as u64).product())
}

/// `ln(k!)`: exact integer factorial up to 20, summed logarithms (log-gamma at
/// integer arguments) beyond.
pub fn ln_factorial(k: u32) -> f64 {
    match factorial(k) {
        Some(f) => (f as f64).ln(),
        None => (21..=k).map(|j| (j as f64).ln()).sum::<f64>() + (factorial(20).unwrap() as f64).ln(),
    }
}

/// The `2n` time arguments of a kernel, with their minimum `u` and maximum `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPoint {
    times: Vec<f64>,
    u: f64,
    v: f64,
}

impl KernelPoint {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(domain("kernel point needs at least one time"));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(domain(format!("non-finite time argument {t}")));
        }
        let u = times.iter().copied().fold(f64::INFINITY, f64::min);
        let v = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { times, u, v })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest time.
    pub fn u(&self) -> f64 {
        self.u
    }

    /// Largest time.
    pub fn v(&self) -> f64 {
        self.v
    }

    fn in_support(&self, horizon: f64) -> bool {
        self.u >= 0.0 && self.v <= horizon
    }
}

/// `x^m` for `m ≥ 0`; repeated multiplication for small exponents.
#[inline]
pub(crate) fn pow_u(x: f64, m: u32) -> f64 {
    if m <= 7 {
        x.powi(m as i32)
    } else {
        x.powf(m as f64)
    }
}

/// `b^{−m} − (b+ε)^{−m}` without cancellation.
#[inline]
fn inverse_power_gap(b: f64, m: u32, eps: f64) -> f64 {
    let m = m as f64;
    (-m * b.ln()).exp() * -(-m * (eps / b).ln_1p()).exp_m1()
}

/// `r^m · (1 − (b/(b+ε))^m)` with `r = gap/b`; the scaled form of
/// [`inverse_power_gap`] multiplied by `gap^m`.
#[inline]
fn scaled_power_gap(gap: f64, b: f64, m: u32, eps: f64) -> f64 {
    pow_u(gap / b, m) * -(-(m as f64) * (eps / b).ln_1p()).exp_m1()
}

/// Difference kernel `K_ε(u, v, T)` for level `n ≥ 2`:
/// the bracket of `F_{2n,0}` minus the bracket of `F_{2n,ε}`.
pub fn k_epsilon(n: u32, u: f64, v: f64, params: &ModelParams) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("k_epsilon needs n >= 2, got {n}")));
    }
    let (horizon, eps) = (params.horizon, params.eps);
    if eps <= 0.0 {
        return Err(domain("k_epsilon needs eps > 0"));
    }
    check_ordered(u, v, horizon)?;
    if v == u {
        return Err(Error::SingularInput(format!("K_eps diverges on the diagonal u = v = {u}")));
    }
    let m = n - 1;
    let gap = v - u;
    let f = |b: f64| inverse_power_gap(b, m, eps);
    Ok((f(horizon) - f(horizon - u)) + (f(gap) - f(v)))
}

fn check_ordered(u: f64, v: f64, horizon: f64) -> Result<()> {
    if !(u.is_finite() && v.is_finite()) || u < 0.0 || u > v || v > horizon {
        return Err(domain(format!("need 0 <= u <= v <= T, got u = {u}, v = {v}, T = {horizon}")));
    }
    Ok(())
}

/// Prefactor `(1/2π)(−1/2)ⁿ / (n(n−1) n₁! n₂!)` of the level-`2n` kernel, `n ≥ 2`.
pub fn prefactor(idx: MultiIndex) -> Result<f64> {
    let n = idx.total();
    if n < 2 {
        return Err(domain(format!("level kernel needs n = n1 + n2 >= 2, got {n}")));
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let nf = n as f64;
    let magnitude = match idx.factorial() {
        Some(f) => 0.5f64.powi(n as i32) / (nf * (nf - 1.0) * f as f64),
        _ => (-nf * std::f64::consts::LN_2 - (nf * (nf - 1.0)).ln() - idx.ln_factorial()).exp(),
    };
    Ok(sign * magnitude / (2.0 * PI))
}

/// Bracket `(T+ε)^{1−n} − (v+ε)^{1−n} − (T−u+ε)^{1−n} + (v−u+ε)^{1−n}` of the
/// level-`2n` kernel, for `0 ≤ u ≤ v ≤ T`.
pub fn bracket(n: u32, u: f64, v: f64, params: &ModelParams) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("bracket needs n >= 2, got {n}")));
    }
    let (horizon, eps) = (params.horizon, params.eps);
    check_ordered(u, v, horizon)?;
    if eps == 0.0 && v == u {
        return Err(Error::SingularInput(format!(
            "renormalized kernel diverges on the diagonal u = v = {u}"
        )));
    }
    let m = n - 1;
    let p = |x: f64| 1.0 / pow_u(x, m);
    Ok((p(horizon + eps) - p(horizon - u + eps)) + (p(v - u + eps) - p(v + eps)))
}

/// Kernel `F_{2n,ε}` at level `2n = (2n₁, 2n₂)`, `n = n₁ + n₂ > 1`.
///
/// Zero when any time lies outside `[0, T]`. At `ε = 0` the kernel is infinite
/// on the diagonal `u = v`, reported as [`Error::SingularInput`].
pub fn kernel_f2n(idx: MultiIndex, point: &KernelPoint, params: &ModelParams) -> Result<f64> {
    let n = idx.total();
    let pre = prefactor(idx)?;
    if point.len() != 2 * n as usize {
        return Err(domain(format!(
            "level 2n = {} kernel takes {} time arguments, got {}",
            2 * n,
            2 * n,
            point.len()
        )));
    }
    if !point.in_support(params.horizon) {
        return Ok(0.0);
    }
    Ok(pre * bracket(n, point.u, point.v, params)?)
}

/// Level-one kernel `F_{2,ε}(u₁, u₂)`.
pub fn kernel_f2(times: [f64; 2], params: &ModelParams) -> Result<f64> {
    let point = KernelPoint::new(times.to_vec())?;
    if !point.in_support(params.horizon) {
        return Ok(0.0);
    }
    if params.eps == 0.0 && point.u == point.v {
        return Err(Error::SingularInput(format!(
            "renormalized level-one kernel has a log singularity at u = v = {}",
            point.u
        )));
    }
    Ok(log_kernel(point.u, point.v - point.u, params.horizon, params.eps))
}

/// `F_{2,ε}` from `u` and the gap `v − u`:
/// `−(1/4π)[ln((v+ε)/(v−u+ε)) + ln((T−u+ε)/(T+ε))]`.
#[inline]
pub(crate) fn log_kernel(u: f64, gap: f64, horizon: f64, eps: f64) -> f64 {
    -((u / (gap + eps)).ln_1p() + (-u / (horizon + eps)).ln_1p()) / (4.0 * PI)
}

/// `F_{2,0} − F_{2,ε}` from `u` and the gap, evaluated through
/// `g(a) = ln(1 + ε/a)` so that small `ε` does not cancel.
#[inline]
pub(crate) fn log_kernel_diff(u: f64, gap: f64, horizon: f64, eps: f64) -> f64 {
    let g = |a: f64| (eps / a).ln_1p();
    -((g(gap) - g(u + gap)) + (g(horizon) - g(horizon - u))) / (4.0 * PI)
}

/// `(v−u)^{n−1} · K_ε(u, v, T)` from `u` and the gap; bounded by 4.
#[inline]
pub(crate) fn scaled_diff_bracket(m: u32, u: f64, gap: f64, horizon: f64, eps: f64) -> f64 {
    let f = |b: f64| scaled_power_gap(gap, b, m, eps);
    (f(horizon) - f(horizon - u)) + (f(gap) - f(u + gap))
}

/// `(v−u)^{n−1} · bracket of F_{2n,ε}` from `u` and the gap; bounded by 1.
#[inline]
pub(crate) fn scaled_bracket(m: u32, u: f64, gap: f64, horizon: f64, eps: f64) -> f64 {
    let r = |b: f64| pow_u(gap / b, m);
    (r(horizon + eps) - r(horizon - u + eps)) + (r(gap + eps) - r(u + gap + eps))
}

/// Mean of the approximate self-intersection local time,
/// `E[L_ε] = (1/2π)[(T+ε) ln((T+ε)/ε) − T]`.
///
/// Follows from `E δ_ε(B_t − B_s) = 1/(2π(t − s + ε))` integrated over
/// `0 < s < t < T`. Infinite at `ε = 0`.
pub fn mean_l_eps(horizon: f64, eps: f64) -> Result<f64> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(domain(format!("time horizon must be finite and >= 0, got {horizon}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(domain(format!("E[L_eps] is infinite unless eps > 0, got {eps}")));
    }
    Ok(((horizon + eps) * (horizon / eps).ln_1p() - horizon) / (2.0 * PI))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn params(t: f64, eps: f64) -> ModelParams {
        ModelParams::new(t, eps).unwrap()
    }

    #[test]
    fn k_epsilon_examples() {
        let p = params(1.0, 0.3);
        assert_eq!(k_epsilon(2, 0.0, 0.5, &p).unwrap(), 0.0);
        let p = params(1.0, 0.1);
        assert_eq!(k_epsilon(2, 0.25, 1.0, &p).unwrap(), 0.0);
        // 1/11 − 2(4/3 − 20/17) + (2 − 5/3), exact rationals
        let expected = 1.0 / 11.0 - 2.0 * (4.0 / 3.0 - 20.0 / 17.0) + (2.0 - 5.0 / 3.0);
        let got = k_epsilon(2, 0.25, 0.75, &p).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        assert!((got - 0.110_516_934_046_345_81).abs() < 1e-15);
    }

    #[test]
    fn k_epsilon_errors() {
        let p = params(1.0, 0.1);
        assert!(matches!(k_epsilon(2, 0.6, 0.5, &p), Err(Error::Domain(_))));
        assert!(matches!(k_epsilon(2, -0.1, 0.5, &p), Err(Error::Domain(_))));
        assert!(matches!(k_epsilon(2, 0.1, 1.5, &p), Err(Error::Domain(_))));
        assert!(matches!(k_epsilon(1, 0.1, 0.5, &p), Err(Error::Domain(_))));
        assert!(matches!(k_epsilon(3, 0.4, 0.4, &p), Err(Error::SingularInput(_))));
        assert!(matches!(k_epsilon(2, 0.1, 0.5, &params(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_f2n_examples() {
        let p = params(1.0, 0.0);
        let idx = MultiIndex::new(1, 1);
        let pt = KernelPoint::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let expected = (1.0 / (2.0 * PI)) * 0.25 * 0.5 * (1.0 - 2.5 - 1.0 / 0.9 + 1.0 / 0.3);
        let got = kernel_f2n(idx, &pt, &p).unwrap();
        assert!((got - expected).abs() < 1e-16);
        assert!((got - 0.014_368_154_584_684_996).abs() < 1e-17);

        let rev = KernelPoint::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(kernel_f2n(idx, &rev, &p).unwrap().to_bits(), got.to_bits());

        let outside = KernelPoint::new(vec![0.1, 0.2, 0.3, 1.4]).unwrap();
        assert_eq!(kernel_f2n(idx, &outside, &p).unwrap(), 0.0);
    }

    #[test]
    fn kernel_f2n_errors() {
        let p = params(1.0, 0.0);
        let diag = KernelPoint::new(vec![0.3; 4]).unwrap();
        assert!(matches!(
            kernel_f2n(MultiIndex::new(2, 0), &diag, &p),
            Err(Error::SingularInput(_))
        ));
        let wrong_len = KernelPoint::new(vec![0.1, 0.2]).unwrap();
        assert!(kernel_f2n(MultiIndex::new(1, 1), &wrong_len, &p).is_err());
        assert!(kernel_f2n(MultiIndex::new(1, 0), &wrong_len, &p).is_err());
        // the diagonal is harmless once ε > 0
        assert!(kernel_f2n(MultiIndex::new(2, 0), &diag, &params(1.0, 0.1)).unwrap().is_finite());
    }

    #[test]
    fn kernel_f2_examples() {
        assert_eq!(kernel_f2([0.0, 0.5], &params(1.0, 0.2)).unwrap(), 0.0);
        let got = kernel_f2([0.5, 0.5], &params(1.0, 0.1)).unwrap();
        let expected = -(2.0 * 0.6f64.ln() - 0.1f64.ln() - 1.1f64.ln()) / (4.0 * PI);
        assert!((got - expected).abs() < 1e-16);
        assert!((got + 0.094_348_933_518_080_933).abs() < 1e-16);
        let got = kernel_f2([0.25, 0.75], &params(1.0, 0.0)).unwrap();
        assert!((got + 0.009_372_876_168_541_194).abs() < 1e-17);
        assert_eq!(kernel_f2([0.75, 0.25], &params(1.0, 0.0)).unwrap(), got);
        assert_eq!(kernel_f2([0.2, 1.2], &params(1.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(
            kernel_f2([0.4, 0.4], &params(1.0, 0.0)),
            Err(Error::SingularInput(_))
        ));
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_l_eps(0.0, 1.0).unwrap(), 0.0);
        let m = mean_l_eps(1.0, 1.0).unwrap();
        assert!((m - (2.0 * 2f64.ln() - 1.0) / (2.0 * PI)).abs() < 1e-16);
        assert!((m - 0.061_480_657_060_756_258).abs() < 1e-16);
        assert!((mean_l_eps(1.0, 0.1).unwrap() - 0.260_645_631_158_909_12).abs() < 1e-15);
        assert!(matches!(mean_l_eps(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn mean_diverges_as_eps_shrinks() {
        for &t in &[0.1, 1.0, 7.0] {
            let mut eps = 1.0;
            for _ in 0..30 {
                assert!(mean_l_eps(t, eps / 2.0).unwrap() > mean_l_eps(t, eps).unwrap());
                eps /= 2.0;
            }
        }
    }

    #[test]
    fn multi_index_degeneracy() {
        let p = params(2.0, 0.05);
        let pt = KernelPoint::new(vec![0.3, 0.9, 1.1, 1.7]).unwrap();
        let a = kernel_f2n(MultiIndex::new(2, 0), &pt, &p).unwrap() * 2.0;
        let b = kernel_f2n(MultiIndex::new(1, 1), &pt, &p).unwrap();
        assert!((a - b).abs() <= 1e-15 * b.abs());
    }

    #[test]
    fn prefactor_sign_alternates() {
        for n in 2..12 {
            let pre = prefactor(MultiIndex::new(n, 0)).unwrap();
            assert_eq!(pre > 0.0, n % 2 == 0);
        }
        let p = params(1.0, 0.0);
        let b = bracket(3, 0.2, 0.6, &p).unwrap();
        assert!(b > 0.0);
        let pt = KernelPoint::new(vec![0.2, 0.3, 0.4, 0.5, 0.55, 0.6]).unwrap();
        assert!(kernel_f2n(MultiIndex::new(2, 1), &pt, &p).unwrap() < 0.0);
    }

    #[test]
    fn prefactor_large_levels_use_log_factorials() {
        let small = prefactor(MultiIndex::new(10, 10)).unwrap();
        let expected = 0.5f64.powi(20) / (20.0 * 19.0 * 3628800.0f64.powi(2)) / (2.0 * PI);
        assert!((small - expected).abs() < 1e-14 * expected);
        let big = prefactor(MultiIndex::new(25, 0)).unwrap();
        assert!(big < 0.0 && big.is_finite());
    }

    #[test]
    fn eps_continuity_monotone() {
        let idx = MultiIndex::new(1, 2);
        let pt = KernelPoint::new(vec![0.2, 0.3, 0.3, 0.4, 0.5, 0.7]).unwrap();
        let f0 = kernel_f2n(idx, &pt, &params(1.0, 0.0)).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..30 {
            let eps = 0.5f64.powi(k);
            let d = (kernel_f2n(idx, &pt, &params(1.0, eps)).unwrap() - f0).abs();
            assert!(d < prev, "k = {k}");
            prev = d;
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn scaled_forms_match_direct_brackets() {
        let (t, eps) = (1.3, 0.07);
        let p = params(t, eps);
        for &(u, v) in &[(0.1, 0.4), (0.0, 0.9), (0.5, 1.3), (0.2, 0.2000001)] {
            for n in 2..9u32 {
                let gap: f64 = v - u;
                let m = n - 1;
                let k = k_epsilon(n, u, v, &p).unwrap();
                let s = scaled_diff_bracket(m, u, gap, t, eps);
                assert!((s - gap.powi(m as i32) * k).abs() < 1e-12, "n={n} u={u} v={v}");
                let b = bracket(n, u, v, &p).unwrap();
                let sb = scaled_bracket(m, u, gap, t, eps);
                assert!((sb - gap.powi(m as i32) * b).abs() < 1e-12);
            }
            let f_eps = kernel_f2([u, v], &p).unwrap();
            let f_0 = if u < v { kernel_f2([u, v], &params(t, 0.0)).unwrap() } else { continue };
            assert!((log_kernel_diff(u, v - u, t, eps) - (f_0 - f_eps)).abs() < 1e-14);
        }
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), Some(1));
        assert_eq!(factorial(20), Some(2_432_902_008_176_640_000));
        assert_eq!(factorial(21), None);
        assert!((ln_factorial(25) - 58.003_605_222_980_52).abs() < 1e-11);
        assert_eq!(MultiIndex::new(3, 2).factorial(), Some(12));
    }
}
