fn main() {
    std::process::exit(nlsmooth_cli::main_with(std::env::args_os()));
}
