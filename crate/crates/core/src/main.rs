use clap::Parser;
use spectral_lmp::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()).code());
}
