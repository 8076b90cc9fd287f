fn main() {
    std::process::exit(argbank_cli::run(std::env::args_os()));
}
