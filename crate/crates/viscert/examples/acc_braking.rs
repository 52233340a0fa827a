//! Adaptive-cruise-control benchmark: the analytic candidate set from the
//! braking model, a sample trajectory, and a small end-to-end certification
//! of the noise-induced failure probability near the set boundary.

use viscert::config::{RunConfig, SystemId};
use viscert::pipeline::{certify_mc, run_alg1, Problem};
use viscert::rng::{lane, run, stream};
use viscert::systems::{required_gap, simulate_acc, AccParams};

fn main() -> viscert::Result<()> {
    let params = AccParams::default();
    println!("required initial gap (noise-free) by leader velocity:");
    for v in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
        println!("  v_leader = {v:>4}: gap >= {:.2} m", required_gap(v, &params));
    }

    // One noisy braking trajectory just inside the candidate boundary.
    let v_leader = 4.0;
    let gap0 = required_gap(v_leader, &params) + 0.3;
    let mut rng = stream(1, run::SIMULATE, 0, lane::SIM);
    let traj = simulate_acc(&[gap0, v_leader], &mut rng, &params)?;
    let min_gap = traj
        .states()
        .iter()
        .map(|s| s[0])
        .fold(f64::INFINITY, f64::min);
    println!(
        "\ntrajectory from (gap {gap0:.2}, leader {v_leader}): min gap {min_gap:.3} m over {} s",
        traj.duration()
    );

    // Learn the failure band and certify.
    let mut cfg = RunConfig::for_system(SystemId::Acc);
    cfg.gp.budget = 200;
    cfg.certify.alpha = 0.15;
    cfg.certify.n = 5_000;
    cfg.certify.seed = 3;

    let out = run_alg1(&cfg, None)?;
    let c = out.exploration.failure_set.polytope.centroid();
    println!(
        "\nlearned failure polytope: area {:.3}, centroid (gap {:.2}, v {:.2})",
        out.exploration.failure_set.polytope.area(),
        c[0],
        c[1]
    );
    println!(
        "importance-sampled bound: epsilon = {:.5} ({} failures in {})",
        out.report.epsilon(),
        out.report.failure_count,
        out.report.n
    );

    let problem = Problem::from_config(&cfg)?;
    let mc = certify_mc(
        &problem.oracle,
        &problem.nominal,
        cfg.certify.beta,
        cfg.certify.n,
        cfg.certify.seed,
        cfg.workers,
    )?;
    println!(
        "binomial baseline:        epsilon = {:.5} ({} failures in {})",
        mc.epsilon(),
        mc.failure_count,
        mc.n
    );
    Ok(())
}
