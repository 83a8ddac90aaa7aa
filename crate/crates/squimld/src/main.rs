fn main() {
    std::process::exit(squimld::cli::run(std::env::args_os()));
}
