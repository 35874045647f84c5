fn main() {
    std::process::exit(rav_cli::run(std::env::args_os()));
}
