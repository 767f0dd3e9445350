use clap::Parser;
use defocus_cli::commands::{run, Cli};
use defocus_cli::exit;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            std::process::exit(exit::USAGE);
        }
    };
    if let Err(err) = run(cli) {
        let (code, status) = exit::classify(&err);
        let detail = format!("{err:#}").replace('\n', " ");
        eprintln!("error: {code}: {detail}");
        std::process::exit(status);
    }
}
