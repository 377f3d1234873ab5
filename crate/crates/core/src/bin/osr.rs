fn main() {
    std::process::exit(osr_core::cli::main_with_args(std::env::args_os()));
}
