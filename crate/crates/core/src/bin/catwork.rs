fn main() {
    std::process::exit(catwork::cli::run(std::env::args_os()));
}
