fn main() {
    std::process::exit(whataboutism::cli::main_with_args(std::env::args_os()));
}
