fn main() {
    std::process::exit(cartan_nf::cli::main_with_args(std::env::args_os()));
}
