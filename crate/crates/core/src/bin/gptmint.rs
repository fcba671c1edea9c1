fn main() {
    gptmint::cli::init_logging();
    std::process::exit(gptmint::cli::main_with_args(std::env::args_os()));
}
