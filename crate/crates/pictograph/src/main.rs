use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use pictograph::cli::{run, Cli, Format};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    if !cli.command.accepts(format) {
        Cli::command()
            .error(
                clap::error::ErrorKind::InvalidValue,
                format!("--format {format:?} is not available for this subcommand").to_lowercase(),
            )
            .exit();
    }
    match run(&cli.command, format) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, out),
                None => {
                    print!("{out}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error[io]: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            if format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({ "ok": false, "code": f.code, "message": f.message })
                );
            }
            eprintln!("{f}");
            ExitCode::from(1)
        }
    }
}
