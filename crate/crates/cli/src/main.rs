use clap::Parser;

use pepkit_cli::args::{run, Cli};
use pepkit_cli::EXIT_BAD_INPUT;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("PEPKIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(&cli));
}
