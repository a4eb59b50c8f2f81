use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use turbsynth::cli::commands::{
    cmd_estimate, cmd_mixture, cmd_spectra, cmd_synthesize, cmd_validate, exit_code_for,
};
use turbsynth::cli::{Cli, Command};
use turbsynth::Result;

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> Result<bool> {
    let common = match &cli.command {
        Command::Spectra(a) | Command::Mixture(a) | Command::Synthesize(a) | Command::Validate(a) => a,
        Command::Estimate(a) => &a.common,
    };
    let mut cfg = common.resolve()?;
    if let Command::Estimate(a) = &cli.command {
        if let Some(input) = &a.input {
            cfg.estimate.input = Some(input.clone());
        }
    }
    if cfg.synthesis.workers > 0 {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.synthesis.workers)
            .build_global();
    }
    match &cli.command {
        Command::Spectra(_) => print_paths(&cmd_spectra(&cfg)?),
        Command::Mixture(_) => {
            let out = cmd_mixture(&cfg)?;
            eprintln!(
                "reconstruction error: max {:.4e}, mean {:.4e}",
                out.max_error, out.mean_error
            );
            print_paths(&out.files);
        }
        Command::Synthesize(_) => print_paths(&cmd_synthesize(&cfg, common.amplitude_scale)?),
        Command::Estimate(_) => print_paths(&cmd_estimate(&cfg)?),
        Command::Validate(_) => {
            let out = cmd_validate(&cfg, common.amplitude_scale)?;
            let mut text = Vec::new();
            out.report.write(&mut text)?;
            eprint!("{}", String::from_utf8_lossy(&text));
            print_paths(&out.files);
            return Ok(out.report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
