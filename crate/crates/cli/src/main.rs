mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PROSODY_EVAL_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };

    let result = match cli.command {
        Command::Extract(a) => commands::extract(a),
        Command::Events(a) => commands::events(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::SelfValidate(a) => commands::self_validate(a),
        Command::Perception(a) => commands::perception(a),
        Command::Report(a) => commands::report(a),
        Command::MakeFixture(a) => commands::make_fixture(a),
    };
    match result {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
