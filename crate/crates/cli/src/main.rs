//! `tnlab`: runs tensor-network experiments and writes CSV or JSON reports.

mod args;
mod commands;
mod error;
mod input;
mod report;

use std::process::ExitCode;

use clap::Parser;
use tnlab::limits::{set_limits, Limits};

use args::{Cli, Command, Global};
use error::CliError;
use report::emit;

fn setup(g: &Global) -> Result<(), CliError> {
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))?;
    }
    let mut l = Limits::from_env();
    let caps = [
        (&mut l.max_state, g.max_state),
        (&mut l.max_region, g.max_region),
        (&mut l.max_hilbert, g.max_hilbert),
        (&mut l.max_tensor, g.max_tensor),
        (&mut l.max_mpo_site, g.max_mpo_site),
    ];
    for (slot, value) in caps {
        if let Some(v) = value {
            *slot = v;
        }
    }
    set_limits(l);
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    setup(&cli.global)?;
    let g = &cli.global;
    let report = match &cli.command {
        Command::Model(a) => {
            emit(&commands::model(a, g.seed)?, g.out.as_deref())?;
            return Ok(false);
        }
        Command::Mps { action } => commands::mps(action, g.seed)?,
        Command::WielandtScan(a) => commands::wielandt(a, g.seed)?,
        Command::Primitivity(a) => commands::primitivity(a, g.seed)?,
        Command::Injectivity(a) => commands::injectivity(a, g.seed)?,
        Command::ParentGap(a) => commands::parent_gap(a, g.seed)?,
        Command::DlCheck(a) => commands::dl_check(a, g.seed)?,
        Command::BoundaryFit(a) => commands::boundary_fit(a, g.seed)?,
        Command::SptClassify(a) => commands::spt_classify(a, g.seed)?,
    };
    emit(&report.render(g.format)?, g.out.as_deref())?;
    Ok(report.has_error)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("tnlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
