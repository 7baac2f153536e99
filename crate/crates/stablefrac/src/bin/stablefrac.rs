fn main() {
    std::process::exit(stablefrac::cli::run(std::env::args_os()));
}
