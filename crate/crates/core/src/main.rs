fn main() {
    std::process::exit(prbm_surrogate::cli::run(std::env::args_os()));
}
