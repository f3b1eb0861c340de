fn main() {
    std::process::exit(tropiscope::cli::main_with_args(std::env::args_os()));
}
