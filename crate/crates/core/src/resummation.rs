//! Closed-form sums over chaos levels.
//!
//! After the multi-index collapse, level `n ≥ 2` of either series carries the
//! weight `(2n−1) / (2π² n (n−1)²)`, and its integrand is a signed sum of
//! powers `x^{n−1}` with `0 ≤ x ≤ 1`. Splitting the weight into partial fractions,
//!
//! ```text
//! (2n−1)/(n(n−1)²) = 1/(n−1)² + 1/(n−1) − 1/n,
//! ```
//!
//! the sum over all `n ≥ 2` is `Li₂(x) + (1−x)ln(1−x)/x + 1`, finite on `[0, 1]`.
//! [`level_tail`] evaluates the part beyond a truncation level.

use std::f64::consts::PI;

const PI2_6: f64 = PI * PI / 6.0;

/// `B_{2k} / (2k+1)!` for `k = 1..=10`.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 6.0 / 6.0,
    -1.0 / 30.0 / 120.0,
    1.0 / 42.0 / 5040.0,
    -1.0 / 30.0 / 362_880.0,
    5.0 / 66.0 / 39_916_800.0,
    -691.0 / 2730.0 / 6_227_020_800.0,
    7.0 / 6.0 / 1_307_674_368_000.0,
    -3617.0 / 510.0 / 355_687_428_096_000.0,
    43867.0 / 798.0 / 121_645_100_408_832_000.0,
    -174_611.0 / 330.0 / 51_090_942_171_709_440_000.0,
];

/// Dilogarithm `Li₂(x) = Σ_{k≥1} x^k / k²` on `[0, 1]`.
///
/// Uses the Bernoulli series in `−ln(1−x)` for `x ≤ 1/2` and the reflection
/// `Li₂(x) = π²/6 − ln x ln(1−x) − Li₂(1−x)` above.
pub fn dilog(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x), "dilog argument {x} outside [0, 1]");
    if x == 0.0 {
        0.0
    } else if x == 1.0 {
        PI2_6
    } else if x <= 0.5 {
        dilog_bernoulli(x)
    } else {
        let y = 1.0 - x;
        PI2_6 - x.ln() * y.ln() - dilog_bernoulli(y)
    }
}

fn dilog_bernoulli(x: f64) -> f64 {
    let t = -(-x).ln_1p();
    let t2 = t * t;
    // t − t²/4 + Σ B_{2k} t^{2k+1} / (2k+1)!
    let mut acc = 0.0;
    for c in BERNOULLI_OVER_FACTORIAL.iter().rev() {
        acc = acc * t2 + c;
    }
    t - 0.25 * t2 + acc * t2 * t
}

/// Partial-fraction weight `1/(n−1)² + 1/(n−1) − 1/n` of level `n ≥ 2`.
#[inline]
pub(crate) fn level_coefficient(n: u32) -> f64 {
    let m = (n - 1) as f64;
    1.0 / (m * m) + 1.0 / m - 1.0 / n as f64
}

/// `Σ_{n ≥ 2} level_coefficient(n) x^{n−1}` on `[0, 1]`.
pub fn level_sum(x: f64) -> f64 {
    level_tail(1, x)
}

/// `Σ_{n > n_max} level_coefficient(n) x^{n−1}` for `0 ≤ x ≤ 1`, `n_max ≥ 1`.
pub fn level_tail(n_max: u32, x: f64) -> f64 {
    debug_assert!(n_max >= 1);
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.5 {
        // geometric decay: direct summation
        let mut n = n_max + 1;
        let mut pw = x.powi(n_max as i32);
        let mut acc = 0.0;
        loop {
            let term = level_coefficient(n) * pw;
            acc += term;
            if term < 1e-18 * acc || pw < 1e-300 {
                break;
            }
            pw *= x;
            n += 1;
        }
        return acc;
    }
    let full = if x >= 1.0 {
        PI2_6 + 1.0
    } else {
        let y = 1.0 - x;
        dilog(x) + y * y.ln() / x + 1.0
    };
    let mut partial = 0.0;
    let mut pw = 1.0;
    for n in 2..=n_max {
        pw *= x;
        partial += level_coefficient(n) * pw;
    }
    full - partial
}
