use std::process::ExitCode;

use clap::Parser;

use renorm_cli::args::{Cli, Command};
use renorm_cli::manifest::{compare_runs, RunManifest};
use renorm_cli::{run, ExperimentSpec, HarnessError, EXIT_CHECK_FAILED, EXIT_OK};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, HarnessError> {
    if let Command::Compare(c) = &cli.command {
        let left = RunManifest::read(&c.left)?;
        let right = RunManifest::read(&c.right)?;
        let report = compare_runs(&left, &right)?;
        let table = report.to_table();
        if let Some(dir) = &cli.global.out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.csv", table.name)), table.to_csv()?)?;
        }
        print!("{}", String::from_utf8_lossy(&table.to_csv()?));
        return Ok(EXIT_OK);
    }
    let spec = ExperimentSpec::from_cli(cli)?.expect("compare handled above");
    let manifest = run(&spec)?;
    if let Some(dir) = &spec.global.out {
        manifest.write(dir)?;
    }
    for c in &manifest.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", c.name, c.detail);
    }
    if manifest.passed() {
        Ok(EXIT_OK)
    } else {
        for c in manifest.failed_checks() {
            eprintln!("check failed: {}", c.name);
        }
        Ok(EXIT_CHECK_FAILED)
    }
}
