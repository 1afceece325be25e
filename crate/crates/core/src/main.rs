use clap::Parser;

fn main() {
    std::process::exit(wfspec::cli::run(wfspec::cli::Cli::parse()));
}
