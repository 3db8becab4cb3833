fn main() {
    std::process::exit(besov_lab::cli::run(std::env::args_os()));
}
