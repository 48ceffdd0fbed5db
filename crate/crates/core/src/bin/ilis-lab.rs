fn main() {
    std::process::exit(ilis_lab::cli::run(std::env::args_os()));
}
