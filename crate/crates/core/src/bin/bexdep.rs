fn main() {
    std::process::exit(bexdep::cli::run());
}
