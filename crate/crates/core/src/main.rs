fn main() {
    std::process::exit(paramarkov::cli::main());
}
