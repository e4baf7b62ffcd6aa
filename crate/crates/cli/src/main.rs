fn main() {
    std::process::exit(cgframe_cli::run(std::env::args_os()));
}
