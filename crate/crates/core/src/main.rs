use clap::Parser;

use bergman_density::harness::{run, Cli};

fn main() {
    let status = run(Cli::parse());
    std::process::exit(status.code());
}
