fn main() {
    std::process::exit(ltpg::cli::run(std::env::args_os()));
}
