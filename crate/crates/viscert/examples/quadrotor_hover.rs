//! Quadrotor hover benchmark: a nominal and a violating trajectory under
//! the PD controller, then a certification of the hover specification over
//! the 12-dimensional candidate box.

use viscert::config::{RunConfig, SystemId};
use viscert::pipeline::{certify_mc, run_alg1, Problem};
use viscert::rng::{lane, run, stream};
use viscert::systems::{simulate_quadrotor, stl_monitor_quadrotor, QuadrotorParams};

fn height_extremes(traj: &viscert::systems::Trajectory) -> (f64, f64) {
    traj.states()
        .iter()
        .map(|s| s[2])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| {
            (lo.min(h), hi.max(h))
        })
}

fn main() -> viscert::Result<()> {
    let params = QuadrotorParams::default();

    // Centered start: the spec holds.
    let mut rng = stream(1, run::SIMULATE, 0, lane::SIM);
    let nominal = simulate_quadrotor(&[0.0; 12], &mut rng, &params)?;
    let (lo, hi) = height_extremes(&nominal);
    println!(
        "hover start: h in [{lo:.3}, {hi:.3}], loss = {}",
        stl_monitor_quadrotor(&nominal, &params)?
    );

    // Low start with a sink rate: recovery misses the grace window.
    let mut theta = [0.0f64; 12];
    theta[2] = -0.4; // h offset
    theta[5] = -0.4; // vertical speed
    let mut rng = stream(1, run::SIMULATE, 1, lane::SIM);
    let sinking = simulate_quadrotor(&theta, &mut rng, &params)?;
    let (lo, hi) = height_extremes(&sinking);
    println!(
        "sinking start: h in [{lo:.3}, {hi:.3}], loss = {}",
        stl_monitor_quadrotor(&sinking, &params)?
    );

    // Certify over the truncated-Gaussian nominal on the candidate box.
    let mut cfg = RunConfig::for_system(SystemId::Quadrotor);
    cfg.gp.budget = 250;
    cfg.certify.alpha = 0.1;
    cfg.certify.beta = 1e-6;
    cfg.certify.n = 1_000;
    cfg.certify.seed = 7;

    let out = run_alg1(&cfg, None)?;
    let c = out.exploration.failure_set.polytope.centroid();
    println!(
        "\nfailure region in the (h, vh) plane: area {:.4}, centroid ({:.2}, {:.2})",
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
