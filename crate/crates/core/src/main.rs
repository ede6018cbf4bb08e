fn main() {
    std::process::exit(selftest_lab::cli::main_with_args(std::env::args_os()));
}
