//! `storyalign` command-line tool.

mod commands;
mod failure;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use failure::{classify, report};
use provenance::write_output;

#[derive(Debug, Parser)]
#[command(
    name = "storyalign",
    version,
    about = "Align, evaluate and split story video-text data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Records)]
    format: Format,

    /// Seed for every random choice; always recorded in the output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// JSON document with provenance.
    Records,
    /// Plain-text table preceded by a provenance comment line.
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align clips to sentences with Drop-DTW.
    Align(commands::align::AlignArgs),
    /// Score predicted alignments against gold annotations.
    Eval(commands::eval::EvalArgs),
    /// Derive clip-sentence pairs from subtitle timing.
    Weaklabel(commands::weaklabel::WeaklabelArgs),
    /// Split annotated videos and drop weak videos of annotated movies.
    Split(commands::split::SplitArgs),
    /// Inter-annotator IoU between two annotation files.
    Agreement(commands::agreement::AgreementArgs),
    /// Render a method x language grid from evaluation results.
    Report(commands::report::ReportArgs),
}

/// Options shared by commands that need them, echoed into provenance.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub seed: u64,
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let globals = Globals { seed: cli.seed };
    let rendered = match &cli.command {
        Command::Align(a) => commands::align::run(a, globals)?,
        Command::Eval(a) => commands::eval::run(a, globals)?,
        Command::Weaklabel(a) => commands::weaklabel::run(a, globals)?,
        Command::Split(a) => commands::split::run(a, globals)?,
        Command::Agreement(a) => commands::agreement::run(a, globals)?,
        Command::Report(a) => commands::report::run(a, globals)?,
    };
    let text = match cli.format {
        Format::Records => rendered.records()?,
        Format::Table => rendered.table()?,
    };
    write_output(cli.out.as_ref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", report("usage", message.trim_end()));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, status) = classify(&err);
            eprintln!("{}", report(code, &format!("{err:#}")));
            ExitCode::from(status as u8)
        }
    }
}
