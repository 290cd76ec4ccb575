fn main() {
    std::process::exit(linext::cli::main_from_env());
}
