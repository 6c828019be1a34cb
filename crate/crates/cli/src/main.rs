fn main() {
    std::process::exit(subfrac_cli::main_with(std::env::args_os()));
}
