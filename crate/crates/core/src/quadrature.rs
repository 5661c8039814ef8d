//! Adaptive quadrature over the triangle `0 ≤ u ≤ v ≤ T` and over intervals.
//!
//! Both integrators use the embedded 7-point Gauss / 15-point Kronrod pair,
//! take `|K15 − G7|` as the error of a cell, and bisect the cell with the
//! largest error until the total error meets the tolerance or the cell
//! budget is spent. Cells are reduced in creation order, so results are
//! bit-for-bit reproducible.
//!
//! The triangle is mapped onto the unit square by
//!
//! ```text
//! v − u = T·w^g,   u = (T − (v − u))·s,   (w, s) ∈ [0, 1]²
//! ```
//!
//! where `g = edge_grading`. Nodes crowd toward the `v = u` edge, where the
//! renormalized kernels are singular, and the gap `v − u` is handed to the
//! integrand exactly instead of being recovered by a cancelling subtraction.
//! Square cells are split in whichever direction carries the larger
//! one-directional error, which keeps refinement anisotropic along edges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

/// Tolerances and budget for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    /// Grading exponent toward the `v = u` edge, `≥ 1`.
    pub edge_grading: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_cells: 20_000,
            edge_grading: 2.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(domain(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(domain(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if self.max_cells < 4 {
            return Err(domain(format!("max_cells must be >= 4, got {}", self.max_cells)));
        }
        if !(self.edge_grading >= 1.0 && self.edge_grading.is_finite()) {
            return Err(domain(format!("edge_grading must be >= 1, got {}", self.edge_grading)));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value and error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub cells_used: usize,
    pub converged: bool,
}

impl QuadratureResult {
    /// An exactly known value.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error_estimate: 0.0,
            cells_used: 0,
            converged: true,
        }
    }

    /// Scale value and error by a constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            ..self
        }
    }

    /// `Err(NotConverged)` carrying the best estimate when the budget ran out.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                value: self.value,
                abs_error: self.abs_error_estimate,
                cells: self.cells_used,
            })
        }
    }
}

/// A node inside the triangle: `u ≤ v` and the exact gap `v − u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePoint {
    pub u: f64,
    pub v: f64,
    pub gap: f64,
}

// 15-point Kronrod abscissae (non-negative half) and weights; the 7-point
// Gauss rule uses the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Full 15-point rule on `[-1, 1]`: abscissa, Kronrod weight, Gauss weight (0 off the Gauss nodes).
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for (i, slot) in out.iter_mut().enumerate() {
        let k = if i <= 7 { i } else { 14 - i };
        let x = if i < 7 { -XGK[k] } else { XGK[k] };
        let g = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        *slot = (x, WGK[k], g);
    }
    out
}

/// Neumaier-compensated sum.
#[derive(Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    id: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    value: f64,
    error: f64,
    split_dim: usize,
}

struct Ranked(Cell);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

/// Generic adaptive driver over boxes in up to two dimensions.
fn adapt<E>(dims: usize, cfg: &QuadratureConfig, mut eval: E) -> Result<QuadratureResult>
where
    E: FnMut([f64; 2], [f64; 2]) -> Result<(f64, f64, usize)>,
{
    cfg.validate()?;
    let mut next_id = 0;
    let mut make = |lo: [f64; 2], hi: [f64; 2], eval: &mut E| -> Result<Cell> {
        let (value, error, split_dim) = eval(lo, hi)?;
        let id = next_id;
        next_id += 1;
        Ok(Cell { id, lo, hi, value, error, split_dim })
    };

    let root = make([0.0, 0.0], [1.0, 1.0], &mut eval)?;
    let mut total = root.value;
    let mut total_err = root.error;
    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    heap.push(Ranked(root));
    let mut cells = 1;

    while total_err > cfg.target(total) && cells < cfg.max_cells {
        let Some(Ranked(cell)) = heap.pop() else { break };
        let d = cell.split_dim.min(dims - 1);
        let mid = 0.5 * (cell.lo[d] + cell.hi[d]);
        if !(mid > cell.lo[d] && mid < cell.hi[d]) {
            frozen.push(cell);
            continue;
        }
        let mut left_hi = cell.hi;
        left_hi[d] = mid;
        let mut right_lo = cell.lo;
        right_lo[d] = mid;
        let left = make(cell.lo, left_hi, &mut eval)?;
        let right = make(right_lo, cell.hi, &mut eval)?;
        total += left.value + right.value - cell.value;
        total_err += left.error + right.error - cell.error;
        heap.push(Ranked(left));
        heap.push(Ranked(right));
        cells += 1;
    }

    let mut all: Vec<Cell> = heap.into_iter().map(|r| r.0).chain(frozen).collect();
    all.sort_by_key(|c| c.id);
    let mut value = Sum::default();
    let mut error = Sum::default();
    for c in &all {
        value.add(c.value);
        error.add(c.error);
    }
    let value = value.value();
    let abs_error_estimate = error.value();
    Ok(QuadratureResult {
        value,
        abs_error_estimate,
        cells_used: all.len(),
        converged: abs_error_estimate <= cfg.target(value),
    })
}

/// Integrate `f(u, v)` over the triangle `0 ≤ u ≤ v ≤ horizon`.
///
/// The integrand may report [`Error::SingularInput`] only on the measure-zero
/// edge `v = u` (gap exactly zero), where the point is dropped; anywhere else
/// the flag becomes [`Error::PropagatedSingularity`]. Other errors pass through.
/// Exhausting `max_cells` is not an error: the result carries `converged = false`.
pub fn integrate_triangle<F>(f: F, horizon: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: Fn(TrianglePoint) -> Result<f64>,
{
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(domain(format!("triangle horizon must be > 0, got {horizon}")));
    }
    let grading = cfg.edge_grading;
    let rule = rule();
    let eval_cell = |lo: [f64; 2], hi: [f64; 2]| -> Result<(f64, f64, usize)> {
        let (cw, hw) = (0.5 * (lo[0] + hi[0]), 0.5 * (hi[0] - lo[0]));
        let (cs, hs) = (0.5 * (lo[1] + hi[1]), 0.5 * (hi[1] - lo[1]));
        let mut grid = [[0.0f64; 15]; 15];
        for (i, &(xw, _, _)) in rule.iter().enumerate() {
            let w = cw + hw * xw;
            let gap = horizon * w.powf(grading);
            let jac = grading * horizon * w.powf(grading - 1.0) * (horizon - gap);
            for (j, &(xs, _, _)) in rule.iter().enumerate() {
                let s = cs + hs * xs;
                let u = (horizon - gap) * s;
                let pt = TrianglePoint { u, v: u + gap, gap };
                grid[i][j] = match f(pt) {
                    Ok(y) => y * jac,
                    Err(Error::SingularInput(_)) if gap == 0.0 => 0.0,
                    Err(Error::SingularInput(_)) => {
                        return Err(Error::PropagatedSingularity { u: pt.u, v: pt.v })
                    }
                    Err(e) => return Err(e),
                };
            }
        }
        Ok(tensor_estimates(&rule, &grid, hw * hs))
    };
    adapt(2, cfg, eval_cell)
}

/// Kronrod value, error, and the direction whose Gauss-reduced rule differs most.
fn tensor_estimates(rule: &[(f64, f64, f64); 15], grid: &[[f64; 15]; 15], area: f64) -> (f64, f64, usize) {
    let (mut kk, mut gg, mut gk, mut kg) = (0.0, 0.0, 0.0, 0.0);
    for (i, &(_, ki, gi)) in rule.iter().enumerate() {
        for (j, &(_, kj, gj)) in rule.iter().enumerate() {
            let y = grid[i][j];
            kk += ki * kj * y;
            gg += gi * gj * y;
            gk += gi * kj * y;
            kg += ki * gj * y;
        }
    }
    let value = kk * area;
    let error = ((kk - gg) * area).abs();
    let dim = if (kk - gk).abs() >= (kk - kg).abs() { 0 } else { 1 };
    (value, error, dim)
}

/// Integrate `f(t)` over `[a, b]`, tolerating integrable endpoint singularities.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(domain(format!("need finite a <= b, got [{a}, {b}]")));
    }
    if a == b {
        cfg.validate()?;
        return Ok(QuadratureResult::exact(0.0));
    }
    let rule = rule();
    let len = b - a;
    adapt(1, cfg, |lo, hi| {
        let (x0, x1) = (a + len * lo[0], a + len * hi[0]);
        let (c, h) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        let (mut k, mut g) = (0.0, 0.0);
        for &(x, kw, gw) in &rule {
            let y = f(c + h * x);
            k += kw * y;
            g += gw * y;
        }
        Ok((k * h, ((k - g) * h).abs(), 0))
    })
}
