//! Drive the command-line pipeline from code: norms table and synthetic rate fit.
//!
//! Run with `cargo run --release --example cli_pipeline`.

fn main() {
    let out = std::env::temp_dir().join("slt-example");
    let out = out.to_str().unwrap();
    let code = planar_slt::cli::run(["slt", "norms", "--eps-grid", "0.2,0.1", "--n-max", "4", "--out-dir", out]);
    println!("norms exit code {code}");
    println!("{}", std::fs::read_to_string(format!("{out}/norms.csv")).unwrap());
    let code = planar_slt::cli::run(["slt", "rate", "--synthetic", "0.9", "--plot", "--out-dir", out]);
    println!("rate exit code {code}");
    println!("{}", std::fs::read_to_string(format!("{out}/rate_plot.csv")).unwrap());
}
