fn main() {
    std::process::exit(kollektiv::cli::main_with_args(std::env::args_os()));
}
