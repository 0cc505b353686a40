fn main() {
    std::process::exit(oddcycle_cli::run(std::env::args_os()));
}
