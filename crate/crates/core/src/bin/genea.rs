fn main() {
    std::process::exit(genea::cli::main_with_args(std::env::args_os()));
}
