use clap::Parser;

fn main() {
    let cli = hetcycle_cli::Cli::parse();
    std::process::exit(hetcycle_cli::run(cli));
}
