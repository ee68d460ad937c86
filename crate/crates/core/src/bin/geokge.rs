fn main() {
    std::process::exit(geokge::cli::run(std::env::args_os()));
}
