fn main() {
    std::process::exit(heilbronn::cli::run(std::env::args_os()));
}
