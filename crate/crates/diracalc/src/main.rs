fn main() {
    std::process::exit(diracalc::cli_main());
}
