fn main() {
    std::process::exit(formal_groupoid::cli::main());
}
