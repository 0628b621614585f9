fn main() {
    std::process::exit(entree::cli::run_from_env());
}
