fn main() {
    std::process::exit(fraclift::cli::run(std::env::args_os()));
}
