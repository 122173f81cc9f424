mod args;
mod commands;
mod config;
mod error;
mod report;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::EXIT_USAGE;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let (name, result) = match cli.command {
        Command::Train(a) => ("train", commands::train(a)),
        Command::Grid(a) => ("grid", commands::grid(a)),
        Command::Evaluate(a) => ("evaluate", commands::evaluate(a)),
        Command::Score(a) => ("score", commands::score(a)),
        Command::Synth(a) => ("synth", commands::synth(a)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ddos-elm {name}: {e}");
            e.code
        }
    }
}
