fn main() {
    std::process::exit(oufpt::cli::run(std::env::args_os()));
}
