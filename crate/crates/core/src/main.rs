fn main() {
    std::process::exit(qlowdeg::cli::run_cli(std::env::args_os()));
}
