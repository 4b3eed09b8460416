fn main() {
    std::process::exit(serrin_cli::run(std::env::args()));
}
