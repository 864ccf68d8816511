use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nv_dnp::config::OutputFormat;
use nv_dnp::run::{load_config, run, RunOptions, Subcommand};

#[derive(Parser)]
#[command(name = "nv-dnp", version, about = "NV-center to 13C polarization transfer simulator")]
struct Cli {
    #[arg(value_enum)]
    subcommand: Command,
    /// TOML configuration, or a run manifest to repeat a run
    #[arg(long)]
    config: PathBuf,
    /// Data file; the manifest goes next to it unless `output.manifest` is set
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Eigen,
    SweepFrequency,
    SweepPower,
    SweepField,
    SteadyState,
    Transitions,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Structured,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.subcommand {
        Command::Eigen => Subcommand::Eigen,
        Command::SweepFrequency => Subcommand::SweepFrequency,
        Command::SweepPower => Subcommand::SweepPower,
        Command::SweepField => Subcommand::SweepField,
        Command::SteadyState => Subcommand::SteadyState,
        Command::Transitions => Subcommand::Transitions,
    };
    let opts = RunOptions {
        out: cli.out,
        format: cli.format.map(|f| match f {
            Format::Table => OutputFormat::Table,
            Format::Structured => OutputFormat::Structured,
        }),
        threads: cli.threads,
    };
    let result = load_config(&cli.config).and_then(|cfg| run(cmd, cfg, &opts));
    match result {
        Ok(out) => {
            if out.data_path.is_none() {
                print!("{}", out.data);
            }
            for w in out.manifest["warning_messages"].as_array().into_iter().flatten() {
                eprintln!("warning: {}", w.as_str().unwrap_or_default());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
