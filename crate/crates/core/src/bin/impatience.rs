fn main() {
    std::process::exit(impatience::cli::run_cli(std::env::args_os()));
}
