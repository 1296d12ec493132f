//! Result tables. Comma separated with a header row; angles in degrees.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use swarmtrack::formats;
use swarmtrack::{
    build_cost_matrix, pseudo_measurements, AssignmentScore, Candidate, ConvergenceTrace, FitnessReport, ObservationSet,
};

use crate::CliError;

/// Shortest round-trip text, switching to exponent form for very small or
/// very large magnitudes.
pub fn number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn write_elements(path: &Path, candidate: &Candidate) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    formats::write_elements(BufWriter::new(file), candidate).map_err(|e| io_error(path, e))
}

pub fn read_elements(path: &Path) -> Result<Candidate, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    formats::read_elements(file).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_convergence(path: &Path, trace: &ConvergenceTrace) -> Result<(), CliError> {
    write_rows(
        path,
        &["iteration", "best_fitness", "mean_fitness", "evaluations"],
        trace.rows.iter().map(|r| {
            [
                r.iteration.to_string(),
                number(r.best_fitness),
                number(r.mean_fitness),
                r.evaluations.to_string(),
            ]
        }),
    )
}

/// Running residual of every object after every date, one row per pair.
pub fn write_residuals(path: &Path, obs: &ObservationSet, report: &FitnessReport) -> Result<(), CliError> {
    let rows = report.residuals.iter().enumerate().flat_map(|(j, per_object)| {
        per_object.iter().enumerate().map(move |(i, r)| {
            [
                (j + 1).to_string(),
                number(obs.dates()[j]),
                obs.night_membership()[j].to_string(),
                (i + 1).to_string(),
                number(*r),
            ]
        })
    });
    write_rows(path, &["date", "epoch_s", "night", "object", "residual"], rows)
}

/// Which measurement row explained each object on each date, and at what cost.
pub fn write_assignments(
    path: &Path,
    obs: &ObservationSet,
    candidate: &Candidate,
    report: &FitnessReport,
) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (j, a) in report.assignments.iter().enumerate() {
        let pseudo = pseudo_measurements(candidate, obs, j).map_err(|e| CliError::Compute(e.to_string()))?;
        let costs = build_cost_matrix(&pseudo, obs.batch(j), &obs.sigmas()[j], j)
            .map_err(|e| CliError::Compute(e.to_string()))?;
        for (i, &row) in a.row_of.iter().enumerate() {
            rows.push([
                (j + 1).to_string(),
                number(obs.dates()[j]),
                (i + 1).to_string(),
                (row + 1).to_string(),
                number(costs.get(row, i)),
            ]);
        }
    }
    write_rows(path, &["date", "epoch_s", "object", "row", "cost"], rows)
}

pub fn write_scores(path: &Path, score: &AssignmentScore) -> Result<(), CliError> {
    let identity: Vec<String> = score
        .identity
        .iter()
        .map(|t| t.map_or_else(|| "-".to_owned(), |t| (t + 1).to_string()))
        .collect();
    write_rows(
        path,
        &["purity", "consistency", "truth_of_object"],
        [[number(score.purity), number(score.consistency), identity.join(" ")]],
    )
}
