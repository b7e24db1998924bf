fn main() {
    std::process::exit(tubecantor::cli::run());
}
