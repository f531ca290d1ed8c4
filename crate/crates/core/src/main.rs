fn main() {
    std::process::exit(madcantor::cli::main_with_args(std::env::args_os()));
}
