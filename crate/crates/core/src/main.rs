fn main() {
    std::process::exit(chronoscale::cli::main_with_args(std::env::args_os()));
}
