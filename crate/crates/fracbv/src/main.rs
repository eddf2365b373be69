fn main() {
    std::process::exit(fracbv::run_cli());
}
