fn main() {
    std::process::exit(ipm_cli::main_with_args(std::env::args_os()));
}
