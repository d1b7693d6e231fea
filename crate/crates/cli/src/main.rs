fn main() {
    std::process::exit(fracdio_cli::main_with(std::env::args_os()));
}
