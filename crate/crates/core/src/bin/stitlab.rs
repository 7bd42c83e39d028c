fn main() {
    std::process::exit(stitlab::cli::main_with_args(std::env::args_os()));
}
