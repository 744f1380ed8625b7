fn main() {
    std::process::exit(monoquad::cli::run(std::env::args_os()));
}
