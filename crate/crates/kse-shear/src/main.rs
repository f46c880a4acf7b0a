fn main() {
    std::process::exit(kse_shear::cli::main());
}
