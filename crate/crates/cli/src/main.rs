use clap::Parser;

use ckn_cli::run::{run, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}
