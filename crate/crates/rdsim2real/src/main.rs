use clap::Parser;

use rdsim2real::cli::{run, Cli};
use rdsim2real::Error;

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error[{}]: {error}", error.category());
        let code = if matches!(error, Error::Usage(_)) { 2 } else { 1 };
        std::process::exit(code);
    }
}
