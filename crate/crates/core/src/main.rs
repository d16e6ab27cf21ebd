fn main() {
    std::process::exit(ulam::cli::run_command(std::env::args_os()));
}
