fn main() {
    std::process::exit(hcopula::cli::run(std::env::args_os()));
}
