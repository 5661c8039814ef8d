//! The explicit bound C(T, alpha) eps^alpha and its pieces.
//!
//! Run with `cargo run --example holder_bound`.

use planar_slt::bounds::{bound_breakdown, bound_series};
use planar_slt::kernels::ModelParams;

fn main() -> Result<(), planar_slt::error::Error> {
    for p in [1.1, 1.2, 1.5, 1.9, 1.99] {
        println!("bound series at p = {p}: {:.12}", bound_series(p)?);
    }
    let params = ModelParams::new(1.0, 0.01)?;
    for alpha in [0.5, 0.75, 0.9, 0.99] {
        let b = bound_breakdown(&params, alpha)?;
        println!(
            "alpha = {alpha}: p = {:.6}, q = {:.6}, level one {:.4e}, higher levels {:.4e}, bound {:.4e}",
            b.hoelder.p, b.hoelder.q, b.level_one, b.higher_levels, b.total
        );
    }
    Ok(())
}
