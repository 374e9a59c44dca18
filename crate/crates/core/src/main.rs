fn main() {
    std::process::exit(polylab::cli::run_command(std::env::args_os()));
}
