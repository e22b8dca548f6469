fn main() {
    std::process::exit(krein::cli::main_with(std::env::args_os()));
}
