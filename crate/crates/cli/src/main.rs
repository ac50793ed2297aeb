fn main() {
    std::process::exit(handforge_cli::main_with_args(std::env::args_os()));
}
