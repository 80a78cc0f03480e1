fn main() {
    std::process::exit(pairsplit::cli::run(std::env::args_os()));
}
