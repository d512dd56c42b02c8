use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lil_lab_cli::{presets, run_config, run_file, CliError};

#[derive(Parser)]
#[command(name = "lil-lab", version, about = "Monte Carlo checks of liminf LILs for jump processes")]
struct Cli {
  #[command(subcommand)]
  cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
  /// Run an experiment file.
  Run {
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
  },
  /// Run a preset, or print it with --emit.
  Preset {
    name: String,
    #[arg(long)]
    emit: bool,
    #[arg(long)]
    out: Option<PathBuf>,
  },
  /// List preset names.
  ListPresets,
}

fn main() -> ExitCode {
  let cli = Cli::parse();
  let result = match cli.cmd {
    Cmd::ListPresets => {
      for n in presets::names() {
        println!("{n}");
      }
      return ExitCode::SUCCESS;
    }
    Cmd::Preset { name, emit: true, .. } => match presets::source(&name) {
      Ok(text) => {
        print!("{text}");
        return ExitCode::SUCCESS;
      }
      Err(e) => Err(e),
    },
    Cmd::Preset { name, out, .. } => presets::preset(&name).and_then(|cfg| run_config(&cfg, out.as_deref())),
    Cmd::Run { config, out } => run_file(&config, out.as_deref()),
  };
  match result {
    Ok(o) => {
      println!("{}: {}", o.out_dir.display(), if o.passed { "pass" } else { "check failed" });
      ExitCode::from(o.exit_code() as u8)
    }
    Err(e) => {
      eprintln!("lil-lab: {e}");
      ExitCode::from(exit_code(&e))
    }
  }
}

fn exit_code(e: &CliError) -> u8 {
  e.exit_code() as u8
}
