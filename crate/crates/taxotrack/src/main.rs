use clap::Parser;
use tracing_subscriber::EnvFilter;

fn main() {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(EnvFilter::try_from_env("TAXOTRACK_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .init();
    let cli = taxotrack::cli::Cli::parse();
    if let Err(e) = taxotrack::cli::run(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(1);
    }
}
