fn main() {
    std::process::exit(alexandrov::cli::main_with_args(std::env::args_os()));
}
