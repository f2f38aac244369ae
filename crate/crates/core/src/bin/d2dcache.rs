fn main() {
    std::process::exit(d2dcache::experiments::cli::main_with_args(std::env::args_os()));
}
