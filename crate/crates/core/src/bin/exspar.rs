fn main() {
    std::process::exit(exspar::cli::run(std::env::args_os()));
}
