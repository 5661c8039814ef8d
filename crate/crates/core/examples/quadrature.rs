//! Adaptive integration over the triangle 0 <= u <= v <= T with an
//! integrable singularity along the diagonal.
//!
//! Run with `cargo run --example quadrature`.

use planar_slt::quadrature::{integrate_interval, integrate_triangle, QuadratureConfig};

fn main() -> Result<(), planar_slt::error::Error> {
    let cfg = QuadratureConfig {
        rel_tol: 1e-12,
        ..Default::default()
    };

    // ∫∫_{u<v<1} ln²(v−u) = 7/4
    let r = integrate_triangle(|pt| Ok(pt.gap.ln().powi(2)), 1.0, &cfg)?;
    println!(
        "log^2 edge: {:.15} (exact 1.75), error estimate {:.1e}, {} cells",
        r.value, r.abs_error_estimate, r.cells_used
    );

    // ∫∫_{u<v<2} (v−u)^{-1/2} = 8√2/3
    let r = integrate_triangle(|pt| Ok(pt.gap.powf(-0.5)), 2.0, &cfg)?;
    println!(
        "inverse sqrt edge: {:.15} (exact {:.15}), {} cells",
        r.value,
        8.0 * 2f64.sqrt() / 3.0,
        r.cells_used
    );

    let r = integrate_interval(|t| t.sin() / t.sqrt(), 0.0, 1.0, &cfg)?;
    println!("∫_0^1 sin(t)/sqrt(t): {:.15}, {} cells", r.value, r.cells_used);

    // a small budget reports the best estimate instead of failing
    let tight = QuadratureConfig {
        rel_tol: 1e-15,
        max_cells: 8,
        ..Default::default()
    };
    let r = integrate_triangle(|pt| Ok((1e-3 / pt.gap).ln_1p().powi(2)), 1.0, &tight)?;
    println!("budget of 8 cells: converged = {}, value {:.6e}", r.converged, r.value);
    Ok(())
}
