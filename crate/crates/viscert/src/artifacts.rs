//! CSV and report rendering.
//!
//! Every writer produces a deterministic byte stream: fixed column order,
//! header row, and shortest round-trip float formatting, so replaying a run
//! with the same seed reproduces the files byte for byte. Timing data never
//! enters these files.

use crate::error::Result;
use crate::geometry::{FailureSet, Polytope2D};
use crate::pipeline::{CertReport, ConvergenceTable, Exploration};
use crate::systems::Trajectory;
use std::fmt::Write as _;
use std::path::Path;

pub const GP_SAMPLES_FILE: &str = "gp_samples.csv";
pub const GP_GRID_FILE: &str = "gp_grid.csv";
pub const GP_POLYTOPE_FILE: &str = "gp_polytope.csv";
pub const FAILURE_SET_FILE: &str = "failure_set.json";
pub const REPORT_FILE: &str = "report.txt";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Labeled exploration samples: projected coordinates plus binary label.
pub fn gp_samples_csv(samples: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("h,v,label\n");
    for (h, v, label) in samples {
        let _ = writeln!(out, "{h},{v},{label}");
    }
    out
}

/// Predictive class score over the projected grid, row-major.
pub fn gp_grid_csv(grid: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("h,v,mean\n");
    for (h, v, mean) in grid {
        let _ = writeln!(out, "{h},{v},{mean}");
    }
    out
}

/// Polytope vertex ring, closed (first vertex repeated last).
pub fn polytope_csv(polytope: &Polytope2D) -> String {
    let mut out = String::from("h,v\n");
    for v in polytope.vertices() {
        let _ = writeln!(out, "{},{}", v[0], v[1]);
    }
    if let Some(first) = polytope.vertices().first() {
        let _ = writeln!(out, "{},{}", first[0], first[1]);
    }
    out
}

pub fn failure_set_json(failure: &FailureSet) -> Result<String> {
    Ok(serde_json::to_string_pretty(failure)?)
}

/// Flat key-value report, one block per estimator. Wall time is excluded so
/// replays stay byte-identical.
pub fn report_txt(reports: &[&CertReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "estimator = {}", r.bound.kind);
        let _ = writeln!(out, "epsilon = {}", r.epsilon());
        let _ = writeln!(out, "epsilon_capped = {}", r.epsilon_capped());
        let _ = writeln!(out, "beta = {}", r.bound.beta);
        let _ = writeln!(out, "n = {}", r.n);
        if let Some(alpha) = r.alpha {
            let _ = writeln!(out, "alpha = {alpha}");
        }
        let _ = writeln!(out, "w_max = {}", r.w_max);
        let _ = writeln!(out, "failure_count = {}", r.failure_count);
        let _ = writeln!(out, "mean_z = {}", r.mean_z);
        let _ = writeln!(out, "var_z = {}", r.var_z);
        let _ = writeln!(out, "max_weight_observed = {}", r.max_weight_observed);
        let _ = writeln!(out, "seed = {}", r.seed);
    }
    out
}

/// Stdout line for one estimator: stable single-line format.
pub fn report_line(tag: &str, r: &CertReport) -> String {
    format!(
        "{tag} epsilon={} beta={} n={} w_max={}",
        r.epsilon(),
        r.bound.beta,
        r.n,
        r.w_max
    )
}

/// `0.15 -> "0p15"`, the alpha tag used in convergence column names.
pub fn alpha_tag(alpha: f64) -> String {
    format!("{alpha}").replace('.', "p")
}

/// Convergence table with reference-slope columns anchored at the first
/// ladder point: `slope_05` decays as M^-1/2 from the first binomial excess,
/// `slope_10` as M^-1 from the first IS excess.
pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut header = String::from("M,true_prob,mc_cp");
    for &a in &table.alphas {
        let _ = write!(header, ",bound_is_{}", alpha_tag(a));
    }
    header.push_str(",excess_mc_cp");
    for &a in &table.alphas {
        let _ = write!(header, ",excess_is_{}", alpha_tag(a));
    }
    header.push_str(",slope_05,slope_10\n");

    let m0 = table.ladder[0] as f64;
    let anchor_05 = table.excess_mc[0];
    let anchor_10 = table.excess_is.first().map_or(0.0, |e| e[0]);
    let mut out = header;
    for (i, &m) in table.ladder.iter().enumerate() {
        let _ = write!(out, "{m},{},{}", table.true_prob, table.mc_eps[i]);
        for e in &table.is_eps {
            let _ = write!(out, ",{}", e[i]);
        }
        let _ = write!(out, ",{}", table.excess_mc[i]);
        for e in &table.excess_is {
            let _ = write!(out, ",{}", e[i]);
        }
        let ratio = m0 / m as f64;
        let _ = writeln!(
            out,
            ",{},{}",
            anchor_05 * ratio.sqrt(),
            anchor_10 * ratio
        );
    }
    out
}

pub fn trajectory_csv(traj: &Trajectory, state_names: &[&str]) -> String {
    let mut out = String::from("t");
    for name in state_names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (t, s) in traj.times().iter().zip(traj.states()) {
        let _ = write!(out, "{t}");
        for v in s {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_exploration(dir: &Path, exploration: &Exploration) -> Result<()> {
    write_file(dir, GP_SAMPLES_FILE, &gp_samples_csv(&exploration.samples))?;
    write_file(dir, GP_GRID_FILE, &gp_grid_csv(&exploration.grid))?;
    write_file(
        dir,
        GP_POLYTOPE_FILE,
        &polytope_csv(&exploration.failure_set.polytope),
    )?;
    write_file(
        dir,
        FAILURE_SET_FILE,
        &failure_set_json(&exploration.failure_set)?,
    )?;
    Ok(())
}

pub fn write_report(dir: &Path, reports: &[&CertReport]) -> Result<()> {
    write_file(dir, REPORT_FILE, &report_txt(reports))
}

pub fn write_convergence(dir: &Path, table: &ConvergenceTable) -> Result<()> {
    write_file(dir, CONVERGENCE_FILE, &convergence_csv(table))
}
