fn main() {
    std::process::exit(planar_slt::cli::run(std::env::args_os()));
}
