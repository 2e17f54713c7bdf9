fn main() {
    std::process::exit(sll::cli::run(std::env::args_os()));
}
