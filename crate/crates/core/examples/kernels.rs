//! Evaluate chaos kernels of the renormalized self-intersection local time.
//!
//! Run with `cargo run --example kernels`.

use planar_slt::kernels::{k_epsilon, kernel_f2, kernel_f2n, mean_l_eps, KernelPoint, ModelParams, MultiIndex};

fn main() -> Result<(), planar_slt::error::Error> {
    let limit = ModelParams::new(1.0, 0.0)?;
    let smoothed = limit.with_eps(0.1)?;

    let point = KernelPoint::new(vec![0.1, 0.2, 0.3, 0.4])?;
    for idx in [MultiIndex::new(2, 0), MultiIndex::new(1, 1), MultiIndex::new(0, 2)] {
        println!(
            "F_4 {:?} at (0.1, 0.2, 0.3, 0.4): eps = 0 -> {:.12}, eps = 0.1 -> {:.12}",
            (idx.n1, idx.n2),
            kernel_f2n(idx, &point, &limit)?,
            kernel_f2n(idx, &point, &smoothed)?
        );
    }

    println!("F_2(0.25, 0.75), eps = 0: {:.12}", kernel_f2([0.25, 0.75], &limit)?);
    println!("F_2(0.25, 0.75), eps = 0.1: {:.12}", kernel_f2([0.25, 0.75], &smoothed)?);

    // the difference kernel vanishes when u = 0 or v = T
    for n in [2, 5, 10] {
        println!(
            "K_eps n = {n}: interior {:+.3e}, u = 0 {:+.1e}, v = T {:+.1e}",
            k_epsilon(n, 0.2, 0.6, &smoothed)?,
            k_epsilon(n, 0.0, 0.6, &smoothed)?,
            k_epsilon(n, 0.2, 1.0, &smoothed)?
        );
    }

    for eps in [0.5, 0.1, 0.01, 0.001] {
        println!("E[L_eps] at T = 1, eps = {eps}: {:.10}", mean_l_eps(1.0, eps)?);
    }
    Ok(())
}
