fn main() {
    std::process::exit(multimodel::cli::main_with_args(std::env::args_os()));
}
