fn main() {
    std::process::exit(qet::cli::main_with_args(std::env::args_os()));
}
