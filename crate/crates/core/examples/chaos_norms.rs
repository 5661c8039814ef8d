//! Chaos decomposition of Var(L_eps) and of the distance to the renormalized
//! limit, level by level, with the resummed remainder.
//!
//! Run with `cargo run --release --example chaos_norms`.

use planar_slt::fock::{combinatorial_weight, total_diff_norm_sq, total_norm_sq};
use planar_slt::kernels::ModelParams;
use planar_slt::quadrature::QuadratureConfig;

fn main() -> Result<(), planar_slt::error::Error> {
    let cfg = QuadratureConfig::default();
    let n_max = 8;

    println!("multi-index weights c_n: {:?}", (0..=6).map(combinatorial_weight).collect::<Result<Vec<_>, _>>()?);

    let params = ModelParams::new(1.0, 0.5)?;
    let var = total_norm_sq(&params, n_max, &cfg)?;
    println!("\nVar(L_eps), T = 1, eps = 0.5");
    for level in &var.levels {
        println!("  level {:2}: {:.6e}", level.n, level.value);
    }
    println!("  beyond {n_max}: {:.3e} (bound {:.3e})", var.remainder.value, var.tail_bound);
    println!("  total: {:.10e}", var.total);

    let params = params.with_eps(0.01)?;
    let diff = total_diff_norm_sq(&params, n_max, &cfg)?;
    println!("\n||L_eps,c - L_c||^2, T = 1, eps = 0.01");
    for level in &diff.levels {
        println!("  level {:2}: {:.6e}", level.n, level.value);
    }
    println!("  beyond {n_max}: {:.6e} (certified bound {:.3e})", diff.remainder.value, diff.tail_bound);
    println!("  partial sum {:.6e}, total {:.10e}", diff.partial_sum, diff.total);

    let limit = ModelParams::new(1.0, 0.0)?;
    println!("\n||L_c||^2 at T = 1: {:.10e}", total_norm_sq(&limit, n_max, &cfg)?.total);
    Ok(())
}
