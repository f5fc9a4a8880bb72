//! Files written by a run: `log.csv`, `summary.json` and the final agent blocks.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use cdadt::problem::write_matrix_csv;
use cdadt::{AgentState, IterationLog, Metrics};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const LOG_HEADER: [&str; 6] = ["iter", "stat_viol", "consensus_err", "feas_viol", "objective", "merit"];

/// Streams iteration records; floats use shortest round-trip formatting.
pub struct LogWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl LogWriter {
    pub fn create(path: &Path) -> CliResult<Self> {
        let file = File::create(path).map_err(CliError::io(path))?;
        let mut inner = csv::Writer::from_writer(file);
        inner.write_record(LOG_HEADER).map_err(|e| csv_error(path, e))?;
        Ok(LogWriter {
            path: path.to_path_buf(),
            inner,
        })
    }

    pub fn write(&mut self, log: &IterationLog) -> CliResult<()> {
        let merit = log.merit.map(|m| m.to_string()).unwrap_or_default();
        self.inner
            .write_record([
                log.iter.to_string(),
                log.stat_viol.to_string(),
                log.consensus_err.to_string(),
                log.feas_viol.to_string(),
                log.objective.to_string(),
                merit,
            ])
            .map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.inner.flush().map_err(CliError::io(&self.path))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::input(path)(e.to_string())
}

/// Reads a log back; rejects a wrong header or unparsable rows.
pub fn read_log(path: &Path) -> CliResult<Vec<IterationLog>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(LOG_HEADER) {
        return Err(CliError::input(path)(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut logs = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let num = |i: usize| -> CliResult<f64> {
            record[i]
                .parse()
                .map_err(|_| CliError::input(path)(format!("row {row}: bad {} value {:?}", LOG_HEADER[i], &record[i])))
        };
        let iter = record[0]
            .parse()
            .map_err(|_| CliError::input(path)(format!("row {row}: bad iter value {:?}", &record[0])))?;
        let merit = if record[5].is_empty() { None } else { Some(num(5)?) };
        logs.push(IterationLog {
            iter,
            stat_viol: num(1)?,
            consensus_err: num(2)?,
            feas_viol: num(3)?,
            objective: num(4)?,
            merit,
        });
    }
    if logs.is_empty() {
        return Err(CliError::input(path)("log has no rows".into()));
    }
    Ok(logs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: Status,
    pub converged: bool,
    pub iterations: usize,
    pub rounds: usize,
    pub final_metrics: Metrics,
    pub objective: f64,
    /// Iteration at which non-finite values appeared, if any.
    pub diverged_at: Option<usize>,
    pub wall_time_secs: f64,
}

pub fn write_states(dir: &Path, states: &[AgentState<f64>]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    for (i, s) in states.iter().enumerate() {
        for (name, block) in [("x", &s.x), ("u", &s.u), ("v", &s.v)] {
            let path = dir.join(format!("agent{i}_{name}.csv"));
            write_matrix_csv(&path, block).map_err(|e| match e {
                cdadt::Error::Io(source) => CliError::Io {
                    path: path.clone(),
                    source,
                },
                other => CliError::Engine(other),
            })?;
        }
    }
    Ok(())
}
