fn main() {
    std::process::exit(mi_isac::cli::run(std::env::args_os()));
}
