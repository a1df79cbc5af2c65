fn main() {
    std::process::exit(tennisprob::cli::main_with_args(std::env::args_os()));
}
