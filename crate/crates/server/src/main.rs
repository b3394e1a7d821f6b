fn main() {
    std::process::exit(saris::cli::main());
}
