fn main() {
    std::process::exit(optrec::cli::run());
}
