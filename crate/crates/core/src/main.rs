use clap::Parser;

use kantorovich_sampling::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match cli::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
