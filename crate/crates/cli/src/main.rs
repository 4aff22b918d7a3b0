mod commands;
mod model;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wqpe_core::windows::WindowKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] wqpe_core::Error),
    #[error("{0}")]
    Check(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wqpe", version, about = "Windowed phase estimation and filter-based ground-state preparation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Window amplitudes and filter values
    #[command(subcommand)]
    Windows(WindowsCommand),
    /// Phase-estimation error rates, qubit counts and simulations
    #[command(subcommand)]
    Qpe(QpeCommand),
    /// Iterative filtering of a Thirring initial state
    Prepare(commands::PrepareArgs),
    /// Variational warm start for the Thirring model
    Varprep(commands::VarprepArgs),
    /// Numerical checks of the analytic bounds
    #[command(subcommand)]
    Bounds(BoundsCommand),
}

#[derive(Debug, Subcommand)]
enum WindowsCommand {
    Dump(commands::DumpArgs),
}

#[derive(Debug, Subcommand)]
enum QpeCommand {
    ErrorRate(commands::ErrorRateArgs),
    Qubits(commands::QubitsArgs),
    Run(commands::RunArgs),
    Cbar(commands::CbarArgs),
}

#[derive(Debug, Subcommand)]
enum BoundsCommand {
    Check(commands::BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    #[value(alias = "rectangular")]
    Rect,
    #[value(alias = "cosine")]
    Cos,
    Both,
}

impl WindowArg {
    pub fn kinds(self) -> Vec<WindowKind> {
        match self {
            WindowArg::Rect => vec![WindowKind::Rectangular],
            WindowArg::Cos => vec![WindowKind::Cosine],
            WindowArg::Both => WindowKind::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowArg::Rect => "rect",
            WindowArg::Cos => "cos",
            WindowArg::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    #[value(alias = "rectangular")]
    Rect,
    #[value(alias = "cosine")]
    Cos,
}

impl From<KindArg> for WindowKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Rect => WindowKind::Rectangular,
            KindArg::Cos => WindowKind::Cosine,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArg {
    /// Output CSV path; stdout when omitted or `-`
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    pub fn path(&self) -> Option<PathBuf> {
        self.out.clone().filter(|p| p.as_os_str() != "-")
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Windows(WindowsCommand::Dump(a)) => commands::windows_dump(&a),
        Command::Qpe(QpeCommand::ErrorRate(a)) => commands::qpe_error_rate(&a),
        Command::Qpe(QpeCommand::Qubits(a)) => commands::qpe_qubits(&a),
        Command::Qpe(QpeCommand::Run(a)) => commands::qpe_run(&a),
        Command::Qpe(QpeCommand::Cbar(a)) => commands::qpe_cbar(&a),
        Command::Prepare(a) => commands::prepare(&a),
        Command::Varprep(a) => commands::varprep(&a),
        Command::Bounds(BoundsCommand::Check(a)) => commands::bounds_check(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
