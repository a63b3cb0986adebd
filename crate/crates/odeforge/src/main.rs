use clap::Parser;
use odeforge_cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}
