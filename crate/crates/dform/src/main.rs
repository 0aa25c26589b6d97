fn main() {
    std::process::exit(dform::cli::run_cli(std::env::args_os()));
}
