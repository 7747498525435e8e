fn main() {
    std::process::exit(kvcert::cli::run(std::env::args_os()));
}
