fn main() {
    std::process::exit(hologlyph::cli::main());
}
