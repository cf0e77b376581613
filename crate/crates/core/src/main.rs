use clap::Parser;

fn main() {
    let cli = dgnn::cli::Cli::parse();
    if let Err(e) = dgnn::cli::run(cli) {
        eprintln!("{}", dgnn::cli::error_line(&e));
        std::process::exit(1);
    }
}
