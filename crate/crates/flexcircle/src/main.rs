fn main() {
    std::process::exit(flexcircle::run_cli());
}
