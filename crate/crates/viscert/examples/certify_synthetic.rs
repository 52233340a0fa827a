//! Full pipeline on the synthetic strip system, where the true failure
//! probability is exactly 0.05: learn the failure set, build the surrogate,
//! certify with both estimators, and compare the bounds against the truth.

use viscert::config::{RunConfig, SystemId};
use viscert::pipeline::{certify_mc, run_alg1, Problem};

fn main() -> viscert::Result<()> {
    let mut cfg = RunConfig::for_system(SystemId::Synthetic);
    cfg.gp.budget = 150;
    cfg.gp.margin = 0.025;
    cfg.certify.alpha = 0.35;
    cfg.certify.beta = 0.05;
    cfg.certify.n = 20_000;
    cfg.certify.seed = 42;

    let out = run_alg1(&cfg, None)?;
    let fs = &out.exploration.failure_set;
    println!(
        "learned failure polytope: {} vertices, area {:.4} (true strip area 0.05)",
        fs.polytope.vertices().len(),
        fs.polytope.area()
    );

    let r = &out.report;
    println!("\nimportance-sampled certificate:");
    println!("  epsilon = {:.5}  (true P_fail = 0.05)", r.epsilon());
    println!("  mean_z = {:.5}, var_z = {:.6}", r.mean_z, r.var_z);
    println!(
        "  weight cap {:.4}, max observed {:.4}",
        r.w_max, r.max_weight_observed
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
    println!("\nbinomial baseline:");
    println!(
        "  epsilon = {:.5} from {} failures in {}",
        mc.epsilon(),
        mc.failure_count,
        mc.n
    );
    Ok(())
}
