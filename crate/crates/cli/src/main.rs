fn main() {
    std::process::exit(gencert_cli::run(std::env::args_os()));
}
