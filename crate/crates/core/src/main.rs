fn main() {
    std::process::exit(chromasift::cli::main_with_args(std::env::args_os()));
}
