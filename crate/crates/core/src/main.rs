use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use purisim::runner::{self, Scenario};
use purisim::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NO_COINCIDENCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "purisim",
    version,
    about = "Hyperentanglement purification simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `detection.seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the eight reference experiments and write a comparison table.
    PaperSuite {
        #[arg(long, default_value = "out/paper-suite")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-plot the density matrices in a saved report.
    Plot { report: PathBuf },
}

fn exec(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let scenario = Scenario::from_file(&config)?;
            let output = runner::run(&scenario, seed)?;
            runner::write_run(&output, &out)?;
            if !output.report.coincidence {
                eprintln!(
                    "no coincidence: post-selection probability {:e}",
                    output.report.success_probability
                );
                return Ok(EXIT_NO_COINCIDENCE);
            }
            let _ = writeln!(
                std::io::stdout(),
                "wrote {}",
                out.join("report.json").display()
            );
        }
        Command::PaperSuite { out, seed } => {
            let suite = runner::run_paper_suite(seed)?;
            runner::write_suite(&suite, &out)?;
            let _ = write!(
                std::io::stdout(),
                "{}",
                runner::comparison_markdown(&suite.table)
            );
        }
        Command::Plot { report } => {
            let mut stdout = std::io::stdout().lock();
            for path in runner::plot_report(&report)? {
                let _ = writeln!(stdout, "{}", path.display());
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Scenario(_) => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(code)
        }
    }
}
