use clap::Parser;

use recipsum::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string(&outcome.summary).unwrap_or_default());
        }
        Err(e) => {
            eprintln!("recipsum: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
