fn main() {
    std::process::exit(nsgate::cli::execute(std::env::args_os()));
}
