fn main() {
    std::process::exit(cainfer_cli::run_cli(std::env::args_os()));
}
