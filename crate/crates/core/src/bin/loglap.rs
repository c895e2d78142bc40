fn main() {
    std::process::exit(loglap::cli::run(std::env::args_os()));
}
