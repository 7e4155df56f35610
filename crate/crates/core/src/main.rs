fn main() {
    let code = overlap_ifs::cli::run(std::env::args_os());
    std::process::exit(code);
}
