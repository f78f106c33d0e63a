//! Thin command-line front end: parses a jobfile, runs the task, prints
//! the report. Exit status: 0 on success, 1 on mathematical failure,
//! 2 on input errors.

use clap::Parser;
use silt_lab::job::{self, Options};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "silt-lab",
    about = "Filtration combinatorics, Koszul/Cech invariants, and the localization-completion calculus on finite spectra windows"
)]
struct Cli {
    /// Path to the jobfile.
    jobfile: String,

    /// Override or supply the task name ([task] section params are kept).
    #[arg(long)]
    task: Option<String>,

    /// Truncation level for integer-window arithmetic.
    #[arg(long, default_value_t = 4)]
    level: u32,

    /// Override the homology degree box, e.g. `--box=-3..3`.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    box_override: Option<(i64, i64)>,

    /// Output format.
    #[arg(long, default_value = "human", value_parser = ["human", "structured"])]
    format: String,

    /// Seed for randomized self-checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_box(s: &str) -> Result<(i64, i64), String> {
    let Some((lo, hi)) = s.split_once("..") else {
        return Err("expected lo..hi".to_string());
    };
    let lo: i64 = lo.trim().parse().map_err(|_| "bad lower bound")?;
    let hi: i64 = hi.trim().parse().map_err(|_| "bad upper bound")?;
    if lo > hi {
        return Err("empty box".to_string());
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.jobfile) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.jobfile);
            return ExitCode::from(2);
        }
    };
    let mut parsed = match job::parse_job(&text) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(task) = cli.task {
        if !job::TASKS.contains(&task.as_str()) {
            eprintln!("error: unknown task `{task}`");
            return ExitCode::from(2);
        }
        parsed.task = task;
    }
    let opts = Options {
        level: cli.level,
        box_override: cli.box_override,
        seed: cli.seed,
    };
    match job::run(&parsed, &opts) {
        Ok(report) => {
            if cli.format == "structured" {
                print!("{}", report.structured());
            } else {
                println!("{}", report.human);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
