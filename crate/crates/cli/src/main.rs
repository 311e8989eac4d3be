fn main() {
    std::process::exit(ramsey_wigner_cli::main_with(
        std::env::args_os(),
        std::env::vars(),
    ));
}
