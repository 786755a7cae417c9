fn main() {
    std::process::exit(statgamma::cli::run(std::env::args_os()));
}
