fn main() {
    std::process::exit(tracecause::cli::main());
}
