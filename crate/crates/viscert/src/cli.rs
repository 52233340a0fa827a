//! Command implementations behind the `viscert` binary: explore, certify,
//! convergence, simulate. All output is a deterministic function of
//! `(config, seed)`, including under parallel workers.

use crate::artifacts;
use crate::config::RunConfig;
use crate::error::{Error, Result, Stage};
use crate::geometry::{FailureSet, Polytope2D};
use crate::pipeline::{
    build_surrogate, certify_is, certify_mc, convergence_study, learn_failure_set, CertReport,
    Problem,
};
use crate::rng::{lane, run, stream};
use crate::systems::{stl_monitor_quadrotor, CandidateSet, LossOracle};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Is,
    Mc,
    Both,
}

impl std::str::FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "is" => Ok(Estimator::Is),
            "mc" => Ok(Estimator::Mc),
            "both" => Ok(Estimator::Both),
            other => Err(Error::Config(format!(
                "unknown estimator '{other}' (expected is|mc|both)"
            ))),
        }
    }
}

/// Runs failure-set learning and writes the GP artifacts and the
/// failure-set descriptor into the output directory.
pub fn cmd_explore(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let problem = Problem::from_config(cfg)?;
    let exploration = learn_failure_set(&problem, cfg, cfg.certify.seed)
        .map_err(Error::at_stage(Stage::FailureSet))?;
    artifacts::write_exploration(&cfg.output_dir, &exploration)?;
    println!(
        "explore: {} labeled points, failure polytope with {} vertices (area {})",
        exploration.samples.len(),
        exploration.failure_set.polytope.vertices().len(),
        exploration.failure_set.polytope.area()
    );
    Ok(())
}

/// Reads back a failure-set descriptor, revalidating every geometric
/// invariant (the serialized form bypasses the constructors).
pub fn load_failure_set(dir: &Path) -> Result<FailureSet> {
    let path = dir.join(artifacts::FAILURE_SET_FILE);
    let text = std::fs::read_to_string(&path).map_err(|_| {
        Error::Config(format!(
            "failure-set descriptor {} not found; run `explore` first",
            path.display()
        ))
    })?;
    #[derive(Deserialize)]
    struct RawFailureSet {
        projection_dims: (usize, usize),
        polytope: RawPolytope,
        ambient: crate::geometry::HyperRect,
    }
    #[derive(Deserialize)]
    struct RawPolytope {
        vertices: Vec<[f64; 2]>,
    }
    let raw: RawFailureSet = serde_json::from_str(&text)?;
    let polytope = Polytope2D::from_vertices(raw.polytope.vertices)?;
    FailureSet::new(raw.projection_dims, polytope, raw.ambient)
}

/// Certifies the failure probability with the selected estimator(s), writes
/// `report.txt`, and prints one stable line per estimator.
pub fn cmd_certify(cfg: &RunConfig, estimator: Estimator) -> Result<()> {
    cfg.validate()?;
    let problem = Problem::from_config(cfg)?;
    let mut reports: Vec<(&str, CertReport)> = Vec::new();
    if matches!(estimator, Estimator::Is | Estimator::Both) {
        let failure = load_failure_set(&cfg.output_dir)?;
        let surrogate = build_surrogate(&failure).map_err(Error::at_stage(Stage::Surrogate))?;
        let report = certify_is(
            &problem.oracle,
            &problem.nominal,
            &surrogate,
            cfg.certify.alpha,
            cfg.certify.beta,
            cfg.certify.n,
            cfg.certify.seed,
            cfg.workers,
        )
        .map_err(Error::at_stage(Stage::Certify))?;
        reports.push(("is", report));
    }
    if matches!(estimator, Estimator::Mc | Estimator::Both) {
        let report = certify_mc(
            &problem.oracle,
            &problem.nominal,
            cfg.certify.beta,
            cfg.certify.n,
            cfg.certify.seed,
            cfg.workers,
        )
        .map_err(Error::at_stage(Stage::Certify))?;
        reports.push(("mc", report));
    }
    let refs: Vec<&CertReport> = reports.iter().map(|(_, r)| r).collect();
    artifacts::write_report(&cfg.output_dir, &refs)?;
    for (tag, report) in &reports {
        println!("{}", artifacts::report_line(tag, report));
    }
    Ok(())
}

/// Runs the estimator convergence study over a sample-size ladder, writes
/// `convergence.csv`, and prints the fitted slopes.
pub fn cmd_convergence(cfg: &RunConfig, ladder: &[usize]) -> Result<()> {
    cfg.validate()?;
    let problem = Problem::from_config(cfg)?;
    let failure = load_failure_set(&cfg.output_dir)?;
    let surrogate = build_surrogate(&failure).map_err(Error::at_stage(Stage::Surrogate))?;
    let table = convergence_study(&problem, &surrogate, ladder, cfg)?;
    artifacts::write_convergence(&cfg.output_dir, &table)?;
    println!("slope mc_cp = {}", table.slope_mc);
    for (a, s) in table.alphas.iter().zip(&table.slope_is) {
        println!("slope is_{} = {}", artifacts::alpha_tag(*a), s);
    }
    Ok(())
}

/// Simulates one trajectory from `theta` (default: the candidate-set
/// center) and writes it as CSV.
pub fn cmd_simulate(cfg: &RunConfig, theta: Option<Vec<f64>>) -> Result<()> {
    cfg.validate()?;
    let problem = Problem::from_config(cfg)?;
    let theta = match theta {
        Some(t) => {
            if t.len() != problem.oracle.dim() {
                return Err(Error::DimensionMismatch {
                    expected: problem.oracle.dim(),
                    got: t.len(),
                });
            }
            t
        }
        None => match &problem.candidate {
            CandidateSet::Box(r) => r.center(),
            CandidateSet::Planar(p) => p.centroid().to_vec(),
        },
    };
    let mut sim = stream(cfg.certify.seed, run::SIMULATE, 0, lane::SIM);
    let traj = problem.oracle.trajectory(&theta, &mut sim)?;
    let loss = match &problem.oracle {
        LossOracle::Quadrotor(p) => stl_monitor_quadrotor(&traj, p)?,
        LossOracle::Acc(_) => u8::from(traj.states().iter().any(|s| s[0] <= 0.0)),
        LossOracle::Synthetic(_) => unreachable!("synthetic has no trajectory"),
    };
    artifacts::write_file(
        &cfg.output_dir,
        artifacts::TRAJECTORY_FILE,
        &artifacts::trajectory_csv(&traj, problem.oracle.state_names()),
    )?;
    println!("simulate: {} samples, loss={loss}", traj.len());
    Ok(())
}

/// Parses a comma-separated ladder like "1000,10000,100000,1000000".
pub fn parse_ladder(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad ladder entry '{tok}'")))
        })
        .collect()
}

/// Parses a comma-separated initial condition.
pub fn parse_theta(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad theta component '{tok}'")))
        })
        .collect()
}
