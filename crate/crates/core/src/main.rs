fn main() {
    std::process::exit(credal_lln::cli::run());
}
