use clap::Parser;

mod args;
mod config;
mod failure;
mod run;

fn main() {
    let cli = args::Cli::parse();
    if let Err(e) = run::run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
