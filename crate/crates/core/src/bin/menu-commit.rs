fn main() {
    let (code, out) = menu_commit::cli::run(std::env::args_os());
    print!("{out}");
    std::process::exit(code);
}
