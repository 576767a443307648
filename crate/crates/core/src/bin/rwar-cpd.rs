fn main() {
    std::process::exit(rwar_cpd::cli::main_with_args(std::env::args_os()));
}
