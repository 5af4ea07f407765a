fn main() {
    std::process::exit(gplab::cli::main_with_args(std::env::args_os()));
}
