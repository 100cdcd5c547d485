fn main() {
    std::process::exit(holder_cli::main_with_args(std::env::args_os()));
}
