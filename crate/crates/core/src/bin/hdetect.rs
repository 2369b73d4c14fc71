fn main() {
    std::process::exit(harmonic_detect::harness::cli::run_cli(std::env::args_os()));
}
