use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use varcalc::cli::{
    analyze_file, analyze_source, combined_exit_code, parallel_map, profile, to_csv, ProblemFile,
    Profile, Report, FIXTURES,
};

#[derive(Parser)]
#[command(
    name = "varcalc",
    version,
    about = "Classify critical paths of one-dimensional variational problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse problem files and print a JSON report.
    Analyze {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print P, Q, r or the Jacobi field along the path as CSV.
    Profile {
        file: PathBuf,
        #[arg(long)]
        what: Profile,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Work with the bundled example problems.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    List,
    RunAll {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| e.to_string())
        }
    }
}

fn emit_reports(reports: &[Report], single: bool, out: Option<&PathBuf>) -> ExitCode {
    for r in reports {
        if let Some(e) = &r.error {
            eprintln!("error: {e}");
        }
    }
    let text = if single {
        reports[0].to_json()
    } else {
        serde_json::to_string_pretty(reports).expect("reports serialise")
    };
    if let Err(e) = emit(&text, out) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(combined_exit_code(reports) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { files, out, jobs } => {
            let reports = parallel_map(&files, jobs, |f| analyze_file(f));
            emit_reports(&reports, files.len() == 1, out.as_ref())
        }
        Command::Profile {
            file,
            what,
            samples,
        } => {
            let rows = ProblemFile::read(&file)
                .map_err(|e| e.to_string())
                .and_then(|p| profile(&p, what, samples));
            match rows {
                Ok(rows) => {
                    print!("{}", to_csv(&rows));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", file.display());
                    ExitCode::from(1)
                }
            }
        }
        Command::Fixtures {
            action: FixtureAction::List,
        } => {
            for f in &FIXTURES {
                println!("{}", f.name);
            }
            ExitCode::SUCCESS
        }
        Command::Fixtures {
            action: FixtureAction::RunAll { out, jobs },
        } => {
            let reports = parallel_map(&FIXTURES, jobs, |f| {
                analyze_source(f.source, Some(format!("fixtures/{}.prob", f.name)))
            });
            emit_reports(&reports, false, out.as_ref())
        }
    }
}
