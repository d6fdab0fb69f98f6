fn main() {
    std::process::exit(ballpoly_cli::args::run_cli(std::env::args_os()));
}
