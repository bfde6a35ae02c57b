fn main() {
    std::process::exit(orlicz_spectral::cli::run(std::env::args_os()));
}
