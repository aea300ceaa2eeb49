use std::process::ExitCode;

use clap::Parser;
use smb_cli::{run, summarize, Cli, CliError, CommandArgs};

fn execute(cli: Cli) -> Result<(), CliError> {
    if let CommandArgs::Summarize {
        files,
        tol,
        min_pass_fraction,
        out,
    } = &cli.command
    {
        let summary = summarize(files, *tol, *min_pass_fraction)?;
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        return match out {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError::IoFailure {
                path: path.display().to_string(),
                source: e,
            }),
            None => {
                print!("{text}");
                Ok(())
            }
        };
    }
    let config = cli
        .command
        .experiment()?
        .expect("non-summarize commands build a config");
    run(&config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
