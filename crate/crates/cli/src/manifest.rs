//! Self-contained experiment descriptions and the instances they rebuild.

use std::fs;
use std::path::{Path, PathBuf};

use cdadt::engine::{default_init, RunConfig};
use cdadt::network::{erdos_renyi, grid, metropolis_weights, ring, Topology};
use cdadt::problem::{build_cca, default_regularizer, load_matrix_csv, synth_factor, CcaData};
use cdadt::{Mat64, MixingMatrix64, Problem64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DataSource {
    /// `A` is drawn with `seed`, `B` with `seed + 1`.
    Synthetic {
        n: usize,
        m: usize,
        q: usize,
        xi_a: f64,
        xi_b: f64,
        seed: u64,
    },
    Csv {
        a: PathBuf,
        b: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub source: DataSource,
    pub p: usize,
    /// Samples per agent.
    pub partition: Vec<usize>,
    pub regularizer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Er,
    Grid,
    Ring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub d: usize,
    pub p_edge: f64,
    pub seed: u64,
    /// Lattice shape used when `kind` is `grid`.
    pub grid: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub lambda: f64,
    pub n: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub code_version: String,
    pub problem: ProblemSpec,
    pub topology: TopologySpec,
    pub run: RunConfig,
    /// Seed of the shared starting point.
    pub init_seed: u64,
    pub derived: Derived,
}

/// Written by `gen-data` next to the generated matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataManifest {
    pub code_version: String,
    pub source: DataSource,
    pub a: PathBuf,
    pub b: PathBuf,
}

/// A fully built experiment.
pub struct Instance {
    pub problem: Problem64,
    pub mixing: MixingMatrix64,
    pub x_init: Mat64,
}

/// `rows × cols = d` with `rows ≤ cols` as close to square as possible.
pub fn grid_shape(d: usize) -> (usize, usize) {
    let mut rows = (d as f64).sqrt() as usize;
    while rows > 1 && !d.is_multiple_of(rows) {
        rows -= 1;
    }
    (rows.max(1), d / rows.max(1))
}

pub fn build_topology(spec: &TopologySpec) -> CliResult<Option<Topology>> {
    if spec.d == 1 {
        return Ok(None);
    }
    let t = match spec.kind {
        TopologyKind::Er => erdos_renyi(spec.d, spec.p_edge, spec.seed)?,
        TopologyKind::Ring => ring(spec.d)?,
        TopologyKind::Grid => {
            let (r, c) = spec.grid.unwrap_or_else(|| grid_shape(spec.d));
            if r * c != spec.d {
                return Err(CliError::Usage(format!(
                    "a {r}x{c} grid does not have {} agents",
                    spec.d
                )));
            }
            grid(r, c)?
        }
    };
    Ok(Some(t))
}

pub fn build_mixing(spec: &TopologySpec) -> CliResult<MixingMatrix64> {
    Ok(match build_topology(spec)? {
        Some(t) => metropolis_weights(&t)?,
        None => MixingMatrix64::single(),
    })
}

pub fn load_data(source: &DataSource) -> CliResult<(Mat64, Mat64)> {
    match source {
        DataSource::Synthetic {
            n,
            m,
            q,
            xi_a,
            xi_b,
            seed,
        } => {
            check_synthetic(*n, *m, *q, *xi_a, *xi_b)?;
            Ok((
                synth_factor(*n, *q, *xi_a, *seed)?,
                synth_factor(*m, *q, *xi_b, seed.wrapping_add(1))?,
            ))
        }
        DataSource::Csv { a, b } => Ok((load_csv(a)?, load_csv(b)?)),
    }
}

fn load_csv(path: &Path) -> CliResult<Mat64> {
    load_matrix_csv(path).map_err(|e| match e {
        cdadt::Error::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Input {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}

pub fn check_synthetic(n: usize, m: usize, q: usize, xi_a: f64, xi_b: f64) -> CliResult<()> {
    if n == 0 || m == 0 {
        return Err(CliError::Usage("--n and --m must be positive".into()));
    }
    if q < n.max(m) {
        return Err(CliError::Usage(format!(
            "--q must be at least max(n, m) = {}, got {q}",
            n.max(m)
        )));
    }
    for (flag, xi) in [("--xi-a", xi_a), ("--xi-b", xi_b)] {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(CliError::Usage(format!("{flag} must lie in (0, 1), got {xi}")));
        }
    }
    Ok(())
}

impl ExperimentManifest {
    /// Resolves defaults (partition, regularizer, grid shape, λ) so the
    /// manifest alone reproduces the run.
    pub fn resolve(
        source: DataSource,
        p: usize,
        topology: TopologySpec,
        run: RunConfig,
        init_seed: u64,
    ) -> CliResult<(Self, Instance)> {
        let (a, b) = load_data(&source)?;
        let data = CcaData::uniform(a, b, topology.d)?;
        let regularizer = default_regularizer(&data);
        let mut topology = topology;
        if topology.kind == TopologyKind::Grid && topology.grid.is_none() {
            topology.grid = Some(grid_shape(topology.d));
        }
        let manifest = ExperimentManifest {
            code_version: CODE_VERSION.to_string(),
            problem: ProblemSpec {
                source,
                p,
                partition: data.partition().to_vec(),
                regularizer,
            },
            topology,
            run,
            init_seed,
            derived: Derived {
                lambda: f64::NAN,
                n: 0,
                p,
            },
        };
        manifest.instantiate_from(data)
    }

    /// Rebuilds the instance described by a saved manifest.
    pub fn instantiate(self) -> CliResult<(Self, Instance)> {
        let (a, b) = load_data(&self.problem.source)?;
        let data = CcaData::new(a, b, self.problem.partition.clone())?;
        if data.agents() != self.topology.d {
            return Err(CliError::Usage(format!(
                "partition has {} agents but the topology has {}",
                data.agents(),
                self.topology.d
            )));
        }
        self.instantiate_from(data)
    }

    fn instantiate_from(mut self, data: CcaData<f64>) -> CliResult<(Self, Instance)> {
        self.run.validate()?;
        let problem = build_cca(&data, self.problem.p, Some(self.problem.regularizer))?;
        let mixing = build_mixing(&self.topology)?;
        let x_init = default_init(&problem, self.init_seed)?;
        self.derived = Derived {
            lambda: mixing.lambda(),
            n: problem.n(),
            p: problem.p(),
        };
        Ok((
            self,
            Instance {
                problem,
                mixing,
                x_init,
            },
        ))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(path)(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("manifest types serialize");
    fs::write(path, text + "\n").map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(grid_shape(16), (4, 4));
        assert_eq!(grid_shape(12), (3, 4));
        assert_eq!(grid_shape(32), (4, 8));
        assert_eq!(grid_shape(7), (1, 7));
        assert_eq!(grid_shape(2), (1, 2));
    }

    #[test]
    fn synthetic_checks() {
        assert!(check_synthetic(3, 2, 10, 0.9, 0.5).is_ok());
        assert!(matches!(check_synthetic(3, 2, 10, 1.5, 0.5), Err(CliError::Usage(_))));
        assert!(matches!(check_synthetic(3, 2, 2, 0.9, 0.5), Err(CliError::Usage(_))));
    }
}
