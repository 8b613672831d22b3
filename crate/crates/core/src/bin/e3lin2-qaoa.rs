use clap::Parser;
use e3lin2_qaoa::cli::{execute, write_output, Cli};

fn main() {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|out| write_output(cli.out.as_deref(), &out.0));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
