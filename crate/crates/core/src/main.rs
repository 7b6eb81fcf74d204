fn main() {
    std::process::exit(pieprox::bench::cli::main_with_std());
}
