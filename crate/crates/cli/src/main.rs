use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use lcsim_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.command.resolve().context("resolving configuration")?;
    let sub = cfg.subcommand()?.name();
    let (record, written) = lcsim_cli::run(&cfg).with_context(|| format!("running `{sub}`"))?;
    for w in &record.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", written.payload.display());
    if let Some(meta) = &written.meta {
        println!("{}", meta.display());
    }
    Ok(())
}
