//! Sample planar Brownian paths, estimate the mean and variance of L_eps,
//! and compare with the closed-form mean and the chaos-side variance.
//!
//! Run with `cargo run --release --example monte_carlo_validation`.

use planar_slt::fock::total_norm_sq;
use planar_slt::kernels::{mean_l_eps, ModelParams};
use planar_slt::mc::{mc_moments_multi, riemann_mean, sample_path};
use planar_slt::quadrature::QuadratureConfig;

fn main() -> Result<(), planar_slt::error::Error> {
    let (horizon, dt, n_paths, seed) = (1.0, 2e-3, 2000, 7);

    let path = sample_path(horizon, dt, seed)?;
    println!("one path: {} points, endpoint {:?}", path.points.len(), path.points.last().unwrap());

    let eps = [1.0, 0.5];
    let estimates = mc_moments_multi(horizon, &eps, dt, n_paths, seed)?;
    for est in &estimates {
        let exact = mean_l_eps(horizon, est.eps)?;
        let discrete = riemann_mean(horizon, dt, est.eps)?;
        let chaos = total_norm_sq(&ModelParams::new(horizon, est.eps)?, 15, &QuadratureConfig::default())?;
        println!(
            "eps = {}: mean {:.6e} +- {:.1e} (closed form {:.6e}, discrete {:.6e}); variance {:.4e} +- {:.1e} (chaos {:.4e})",
            est.eps, est.mean, est.std_error_mean, exact, discrete, est.variance, est.std_error_variance, chaos.total
        );
    }
    Ok(())
}
