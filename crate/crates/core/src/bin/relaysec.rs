fn main() {
    std::process::exit(relaysec::cli::main_with_args(std::env::args_os()));
}
