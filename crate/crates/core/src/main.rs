fn main() {
    std::process::exit(frieze_lab::cli::run(std::env::args_os()));
}
