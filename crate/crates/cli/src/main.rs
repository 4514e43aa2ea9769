use clap::Parser;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = windtree::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = windtree::run(cli, &argv, &mut out) {
        eprintln!("windtree: {e}");
        std::process::exit(e.exit_code());
    }
}
