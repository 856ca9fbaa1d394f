fn main() {
    std::process::exit(pqstring::cli::run(std::env::args_os()));
}
