fn main() {
    if let Err(msg) = switchrisk::cli::init_workers() {
        eprintln!("error: {msg}");
        std::process::exit(2);
    }
    let code = switchrisk::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
