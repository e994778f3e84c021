//! Problem files, the analysis driver and JSON reports.

pub mod fixtures;
pub mod problem;
pub mod profile;
pub mod report;
pub mod run;

pub use fixtures::{Fixture, FIXTURES};
pub use problem::{
    AnalysisSection, ConstraintSection, PathSection, ProblemError, ProblemFile, ProblemSection,
};
pub use profile::{profile, to_csv, Profile};
pub use report::{validate_report, without_timings, Report, RunStatus, SCHEMA_VERSION};
pub use run::{analyze, analyze_file, analyze_source};

/// Runs `work` over `items` on up to `jobs` threads, keeping input order.
pub fn parallel_map<T, R, F>(items: &[T], jobs: usize, work: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&work).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&work).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Combined exit code: 1 if any run failed, else 2 if any was
/// indeterminate, else 0.
pub fn combined_exit_code(reports: &[Report]) -> i32 {
    let codes: Vec<i32> = reports.iter().map(Report::exit_code).collect();
    if codes.contains(&1) {
        1
    } else if codes.contains(&2) {
        2
    } else {
        0
    }
}
