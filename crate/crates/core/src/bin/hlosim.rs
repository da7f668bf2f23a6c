fn main() {
    std::process::exit(hlosim::cli::main_with_args(std::env::args_os()));
}
