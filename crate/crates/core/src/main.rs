fn main() {
    std::process::exit(rydwave::cli::main_with_args(std::env::args_os()));
}
