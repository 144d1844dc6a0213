fn main() {
    std::process::exit(hyperc::run(std::env::args_os()));
}
