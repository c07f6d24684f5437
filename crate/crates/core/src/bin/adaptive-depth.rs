fn main() {
    std::process::exit(adaptive_depth::cli::run(std::env::args_os()));
}
