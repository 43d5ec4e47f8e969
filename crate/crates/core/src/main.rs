fn main() {
    std::process::exit(buffon::cli::run(std::env::args_os()));
}
