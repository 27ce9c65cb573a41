fn main() {
    std::process::exit(scenred::cli::run());
}
