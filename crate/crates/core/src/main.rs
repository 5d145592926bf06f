fn main() {
    std::process::exit(survtrans::cli::run_from(std::env::args_os()));
}
