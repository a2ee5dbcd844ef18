fn main() {
    std::process::exit(sgqei::cli::run(std::env::args_os()));
}
