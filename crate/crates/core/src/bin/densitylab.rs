fn main() {
    std::process::exit(densitylab::cli::run(std::env::args_os()));
}
