use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cdadt::engine::{Cdadt, RunConfig, ROUNDS_PER_ITERATION};
use cdadt::oracle::solve_cca_centralized;
use cdadt::problem::{build_cca, write_matrix_csv, CcaData};
use cdadt::{IterationLog, Metrics};
use serde::Serialize;

use crate::cli::{GenDataArgs, NetworkArgs, OracleArgs, ProblemArgs, ReportArgs, RunArgs, SolverArgs, SweepArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{
    check_synthetic, load_data, write_json, DataManifest, DataSource, ExperimentManifest, TopologySpec, CODE_VERSION,
};
use crate::output::{read_log, write_states, LogWriter, RunSummary, Status};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn absolute(path: &Path) -> CliResult<PathBuf> {
    fs::canonicalize(path).map_err(CliError::io(path))
}

pub fn gen_data(args: &GenDataArgs) -> CliResult<()> {
    let s = &args.synthetic;
    check_synthetic(s.n, s.m, s.q, s.xi_a, s.xi_b)?;
    let source = DataSource::Synthetic {
        n: s.n,
        m: s.m,
        q: s.q,
        xi_a: s.xi_a,
        xi_b: s.xi_b,
        seed: s.seed,
    };
    let (a, b) = load_data(&source)?;
    create_dir(&args.out)?;
    let (pa, pb) = (args.out.join("A.csv"), args.out.join("B.csv"));
    for (path, m) in [(&pa, &a), (&pb, &b)] {
        write_matrix_csv(path, m).map_err(|e| match e {
            cdadt::Error::Io(source) => CliError::Io {
                path: path.clone(),
                source,
            },
            other => other.into(),
        })?;
    }
    let stub = DataManifest {
        code_version: CODE_VERSION.to_string(),
        source,
        a: PathBuf::from("A.csv"),
        b: PathBuf::from("B.csv"),
    };
    write_json(&args.out.join("manifest.json"), &stub)?;
    eprintln!("wrote {} and {}", pa.display(), pb.display());
    Ok(())
}

fn data_source(problem: &ProblemArgs) -> CliResult<DataSource> {
    match (&problem.data_a, &problem.data_b) {
        (Some(a), Some(b)) => Ok(DataSource::Csv {
            a: absolute(a)?,
            b: absolute(b)?,
        }),
        _ => {
            let s = &problem.synthetic;
            check_synthetic(s.n, s.m, s.q, s.xi_a, s.xi_b)?;
            Ok(DataSource::Synthetic {
                n: s.n,
                m: s.m,
                q: s.q,
                xi_a: s.xi_a,
                xi_b: s.xi_b,
                seed: s.seed,
            })
        }
    }
}

fn topology_spec(problem: &ProblemArgs, network: &NetworkArgs) -> TopologySpec {
    TopologySpec {
        kind: network.topology,
        d: problem.d,
        p_edge: network.p_edge,
        seed: problem.synthetic.seed,
        grid: None,
    }
}

fn run_config(solver: &SolverArgs, beta: f64) -> RunConfig {
    RunConfig {
        eta: solver.eta,
        beta,
        max_iters: solver.max_iters,
        rho: solver.rho,
        record_merit: true,
        ..RunConfig::default()
    }
    .with_tol(solver.tol)
}

/// Executes a resolved manifest into `out`, returning the summary. A
/// divergence is reported in the summary rather than as an error.
fn execute(manifest: ExperimentManifest, out: &Path) -> CliResult<RunSummary> {
    let (manifest, inst) = manifest.instantiate()?;
    create_dir(out)?;
    manifest.save(&out.join("manifest.json"))?;
    let log_path = out.join("log.csv");
    let mut log = LogWriter::create(&log_path)?;
    let mut io_error = None;
    let mut last: Option<IterationLog> = None;
    let start = Instant::now();
    let engine = Cdadt::new(&inst.problem, &inst.mixing, &inst.x_init, manifest.run)?;
    let outcome = engine.run_observed(|entry, _| {
        last = Some(*entry);
        if io_error.is_none() {
            io_error = log.write(entry).err();
        }
    });
    let wall_time_secs = start.elapsed().as_secs_f64();
    if let Some(e) = io_error {
        return Err(e);
    }
    log.finish()?;
    let summary = match outcome {
        Ok(result) => {
            write_states(&out.join("final_states"), &result.final_states)?;
            let l = result.last();
            RunSummary {
                status: if result.converged {
                    Status::Converged
                } else {
                    Status::MaxIters
                },
                converged: result.converged,
                iterations: result.iterations,
                rounds: result.rounds_of_communication,
                final_metrics: l.metrics(),
                objective: l.objective,
                diverged_at: None,
                wall_time_secs,
            }
        }
        Err(cdadt::Error::Diverged { iteration }) => {
            let l = last.expect("iteration 0 is logged before any step");
            RunSummary {
                status: Status::Diverged,
                converged: false,
                iterations: iteration,
                rounds: ROUNDS_PER_ITERATION * iteration,
                final_metrics: l.metrics(),
                objective: l.objective,
                diverged_at: Some(iteration),
                wall_time_secs,
            }
        }
        Err(e) => return Err(e.into()),
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn run(args: &RunArgs) -> CliResult<()> {
    let manifest = match &args.manifest {
        Some(path) => ExperimentManifest::load(path)?,
        None => {
            let topology = topology_spec(&args.problem, &args.network);
            let source = data_source(&args.problem)?;
            let run = run_config(&args.solver, args.beta);
            ExperimentManifest::resolve(source, args.problem.p, topology, run, args.problem.synthetic.seed)?.0
        }
    };
    let summary = execute(manifest, &args.out)?;
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    match summary.diverged_at {
        Some(iteration) => Err(CliError::Engine(cdadt::Error::Diverged { iteration })),
        None => Ok(()),
    }
}

fn beta_dir(beta: f64) -> String {
    format!("beta_{beta}")
}

#[derive(Serialize)]
struct SweepRow {
    beta: f64,
    status: Status,
    iterations: usize,
    rounds: usize,
    stat_viol: f64,
    consensus_err: f64,
    feas_viol: f64,
    objective: f64,
    diverged_at: Option<usize>,
}

pub fn sweep_beta(args: &SweepArgs) -> CliResult<()> {
    if args.betas.is_empty() {
        return Err(CliError::Usage("--betas needs at least one value".into()));
    }
    let topology = topology_spec(&args.problem, &args.network);
    let source = data_source(&args.problem)?;
    let (base, _) = ExperimentManifest::resolve(
        source,
        args.problem.p,
        topology,
        run_config(&args.solver, args.betas[0]),
        args.problem.synthetic.seed,
    )?;
    create_dir(&args.out)?;
    let summary_path = args.out.join("summary.csv");
    let mut rows = Vec::new();
    for &beta in &args.betas {
        let mut manifest = base.clone();
        manifest.run.beta = beta;
        let s = execute(manifest, &args.out.join(beta_dir(beta)))?;
        eprintln!("beta {beta}: {:?} after {} iterations", s.status, s.iterations);
        rows.push(SweepRow {
            beta,
            status: s.status,
            iterations: s.iterations,
            rounds: s.rounds,
            stat_viol: s.final_metrics.stat_viol,
            consensus_err: s.final_metrics.consensus_err,
            feas_viol: s.final_metrics.feas_viol,
            objective: s.objective,
            diverged_at: s.diverged_at,
        });
    }
    write_csv(&summary_path, &rows)
}

fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::input(path)(e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::input(path)(e.to_string()))?;
    }
    w.flush().map_err(CliError::io(path))
}

#[derive(Serialize)]
struct ReportRow {
    run: String,
    topology: String,
    d: usize,
    lambda: f64,
    beta: f64,
    eta: f64,
    iterations: usize,
    rounds: usize,
    stat_viol: f64,
    consensus_err: f64,
    feas_viol: f64,
    objective: f64,
    iters_to_stat_tol: Option<usize>,
    iters_to_consensus_tol: Option<usize>,
    iters_to_feas_tol: Option<usize>,
    wall_time_secs: Option<f64>,
}

fn find_runs(dir: &Path, found: &mut Vec<PathBuf>) -> CliResult<()> {
    let entries = fs::read_dir(dir).map_err(CliError::io(dir))?;
    let mut children: Vec<PathBuf> = Vec::new();
    for entry in entries {
        children.push(entry.map_err(CliError::io(dir))?.path());
    }
    children.sort();
    if dir.join("log.csv").is_file() {
        found.push(dir.to_path_buf());
    }
    for child in children.into_iter().filter(|c| c.is_dir()) {
        find_runs(&child, found)?;
    }
    Ok(())
}

fn first_below(logs: &[IterationLog], tol: f64, pick: fn(&Metrics) -> f64) -> Option<usize> {
    logs.iter().find(|l| pick(&l.metrics()) <= tol).map(|l| l.iter)
}

fn report_row(run_dir: &Path, root: &Path) -> CliResult<ReportRow> {
    let manifest = ExperimentManifest::load(&run_dir.join("manifest.json"))?;
    let logs = read_log(&run_dir.join("log.csv"))?;
    let wall_time_secs = fs::read_to_string(run_dir.join("summary.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<RunSummary>(&t).ok())
        .map(|s| s.wall_time_secs);
    let last = logs.last().expect("read_log rejects empty logs");
    let cfg = manifest.run;
    let name = run_dir.strip_prefix(root).unwrap_or(run_dir).display().to_string();
    Ok(ReportRow {
        run: if name.is_empty() { ".".into() } else { name },
        topology: format!("{:?}", manifest.topology.kind).to_lowercase(),
        d: manifest.topology.d,
        lambda: manifest.derived.lambda,
        beta: cfg.beta,
        eta: cfg.eta,
        iterations: last.iter,
        rounds: ROUNDS_PER_ITERATION * last.iter,
        stat_viol: last.stat_viol,
        consensus_err: last.consensus_err,
        feas_viol: last.feas_viol,
        objective: last.objective,
        iters_to_stat_tol: first_below(&logs, cfg.tol_stationarity, |m| m.stat_viol),
        iters_to_consensus_tol: first_below(&logs, cfg.tol_consensus, |m| m.consensus_err),
        iters_to_feas_tol: first_below(&logs, cfg.tol_feasibility, |m| m.feas_viol),
        wall_time_secs,
    })
}

pub fn report(args: &ReportArgs) -> CliResult<()> {
    let mut runs = Vec::new();
    find_runs(&args.dir, &mut runs)?;
    if runs.is_empty() {
        return Err(CliError::Report(format!(
            "no runs (log.csv) found under {}",
            args.dir.display()
        )));
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for run in &runs {
        match report_row(run, &args.dir) {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(e.to_string()),
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Report(format!("unreadable runs:\n  {}", errors.join("\n  "))));
    }
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then_with(|| a.run.cmp(&b.run)));
    match &args.out {
        Some(path) => write_csv(path, &rows),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for row in &rows {
                w.serialize(row).map_err(|e| CliError::Report(e.to_string()))?;
            }
            w.flush().map_err(CliError::io("<stdout>"))
        }
    }
}

#[derive(Serialize)]
struct OracleOutput {
    objective_star: f64,
    top_eigvals: Vec<f64>,
    eigen_gap: Option<f64>,
}

pub fn oracle(args: &OracleArgs) -> CliResult<()> {
    let (a, b) = load_data(&data_source(&args.problem)?)?;
    let data = CcaData::uniform(a, b, args.problem.d)?;
    let problem = build_cca(&data, args.problem.p, None)?;
    let sol = solve_cca_centralized(&problem)?;
    let out = OracleOutput {
        objective_star: sol.objective_star,
        top_eigvals: sol.top_eigvals,
        eigen_gap: sol.eigen_gap,
    };
    println!("{}", serde_json::to_string(&out).expect("oracle output serializes"));
    Ok(())
}
