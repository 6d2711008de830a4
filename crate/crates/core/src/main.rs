fn main() {
    std::process::exit(ridgeprec::cli::run(std::env::args_os()));
}
