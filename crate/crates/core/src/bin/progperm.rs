fn main() {
    std::process::exit(progperm::cli::cli_main(std::env::args_os()));
}
