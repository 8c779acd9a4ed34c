fn main() {
    std::process::exit(tcd::cli::run());
}
