fn main() {
    std::process::exit(lmimo_mbm::cli::main_with_args(std::env::args_os()));
}
