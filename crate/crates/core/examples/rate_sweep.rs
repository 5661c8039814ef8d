//! Sweep eps over a dyadic grid, fit the empirical rate and compare against
//! the explicit bound.
//!
//! Run with `cargo run --release --example rate_sweep`.

use planar_slt::bounds::{fit_rate, theoretical_bound};
use planar_slt::fock::total_diff_norm_sq;
use planar_slt::kernels::ModelParams;
use planar_slt::quadrature::QuadratureConfig;

fn main() -> Result<(), planar_slt::error::Error> {
    let cfg = QuadratureConfig::default();
    let mut points = Vec::new();
    println!("{:>12} {:>14} {:>14} {:>12}", "eps", "norm^2", "partial(25)", "bound(0.9)");
    for k in 4..=10 {
        let params = ModelParams::new(1.0, 2f64.powi(-k))?;
        let s = total_diff_norm_sq(&params, 25, &cfg)?;
        let bound = theoretical_bound(&params, 0.9)?;
        println!("{:>12.6e} {:>14.6e} {:>14.6e} {:>12.4e}", params.eps(), s.total, s.partial_sum, bound);
        points.push((params.eps(), s.total));
    }
    let fit = fit_rate(&points)?;
    println!("alpha_hat = {:.4}, r^2 = {:.5}", fit.alpha_hat, fit.r_squared);
    for w in points.windows(2) {
        println!("local slope at eps = {:.3e}: {:.4}", w[1].0, (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln());
    }
    Ok(())
}
