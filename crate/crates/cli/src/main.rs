fn main() {
    std::process::exit(hhk_cli::run(std::env::args_os()));
}
