fn main() {
    std::process::exit(rixs_cli::run(std::env::args()));
}
