fn main() {
    std::process::exit(casimir_core::cli::run(std::env::args_os()));
}
