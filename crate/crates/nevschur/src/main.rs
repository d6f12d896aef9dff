fn main() {
    let code = nevschur::cli::main_entry(std::env::args_os());
    std::process::exit(code);
}
