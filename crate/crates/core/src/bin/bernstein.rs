fn main() {
    std::process::exit(bernstein_core::cli::main_with_args(std::env::args_os()));
}
