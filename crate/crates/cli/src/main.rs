fn main() {
    std::process::exit(iqht_cli::run(std::env::args_os()));
}
