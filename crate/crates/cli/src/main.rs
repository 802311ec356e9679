fn main() {
    std::process::exit(smx_cli::main_with(std::env::args_os()));
}
