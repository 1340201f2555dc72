fn main() {
    std::process::exit(glance_seq::cli::run());
}
