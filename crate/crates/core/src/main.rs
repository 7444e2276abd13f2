use clap::Parser;

fn main() {
    let cli = lociso::cli::Cli::parse();
    std::process::exit(lociso::cli::run(&cli));
}
