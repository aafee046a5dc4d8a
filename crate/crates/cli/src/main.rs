use std::process::ExitCode;

use actionrd_cli::args::{Cli, Command};
use actionrd_cli::commands::{cmd_analytic, cmd_codes, cmd_dmax, cmd_point, cmd_sweep};
use actionrd_cli::output::POINT_COLUMNS;
use actionrd_cli::Result;
use clap::Parser;

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.overrides.resolve()?;
    match cli.command {
        Command::Sweep { nonadaptive } => {
            for path in cmd_sweep(&cfg, nonadaptive)? {
                println!("{}", path.display());
            }
        }
        Command::Point { s, m } => {
            let (row, _) = cmd_point(&cfg, s, m)?;
            println!("{POINT_COLUMNS}\n{row}");
        }
        Command::Analytic => println!("{}", cmd_analytic(&cfg)?.display()),
        Command::Dmax => println!("{}", cmd_dmax(&cfg)?.display()),
        Command::Codes => {
            let (summaries, _) = cmd_codes(&cfg)?;
            for s in &summaries {
                println!(
                    "D={} C={}: rate {:.4} distortion {:.4} cost {:.4} bound {:.4} gap {:.4} failures {}",
                    s.target_d,
                    s.target_c,
                    s.rate,
                    s.distortion,
                    s.cost,
                    s.bound,
                    s.gap(),
                    s.failures
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
