fn main() {
    std::process::exit(mstgn::cli::run_cli(std::env::args_os()));
}
