fn main() {
    std::process::exit(cbreason::cli::run(std::env::args_os()));
}
