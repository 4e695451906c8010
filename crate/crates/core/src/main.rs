fn main() {
    binclust::cli::init_logging();
    std::process::exit(binclust::cli::run_command(std::env::args_os()));
}
