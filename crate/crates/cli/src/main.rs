use clap::Parser;

fn main() {
    let cli = hardlda_cli::Cli::parse();
    if let Err(e) = hardlda_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
