use clap::Parser;

fn main() {
    let cli = semiframe_cli::Cli::parse();
    std::process::exit(semiframe_cli::main_with(cli));
}
