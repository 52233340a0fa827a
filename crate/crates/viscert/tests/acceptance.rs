//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime. Run with
//!
//! ```text
//! cargo test --test acceptance -- --nocapture
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::time::Instant;
use viscert::bounds::{binomial_tail_inversion, empirical_bernstein, pair_variance, weighted_pac_bound};
use viscert::cli;
use viscert::config::{RunConfig, SystemId};
use viscert::distributions::Density;
use viscert::geometry::HyperRect;
use viscert::gp::{active_learn, grid_points, AcquisitionConfig, Kernel};
use viscert::pipeline::{
    build_surrogate, certify_is, certify_mc, convergence_study, learn_failure_set,
    reference_probability, run_alg1, Problem,
};
use viscert::rng::sub_seed;

fn pass(criterion: u32, name: &str, start: Instant, budget_s: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_s,
        "criterion {criterion} blew its {budget_s}s budget ({elapsed:.1}s)"
    );
    println!("acceptance criterion {criterion} ({name}): PASS [{elapsed:.2}s]");
}

/// Synthetic problem with a failure set learned once; shared by the
/// statistical criteria. Margin covers one level-set grid cell so the
/// fitted polytope contains the whole strip.
fn synthetic_setup() -> (Problem, Density) {
    let mut cfg = RunConfig::for_system(SystemId::Synthetic);
    cfg.gp.budget = 200;
    cfg.gp.margin = 0.021;
    cfg.certify.seed = 42;
    let problem = Problem::from_config(&cfg).unwrap();
    let exploration = learn_failure_set(&problem, &cfg, cfg.certify.seed).unwrap();
    let surrogate = build_surrogate(&exploration.failure_set).unwrap();
    (problem, surrogate)
}

#[test]
fn criterion_01_weighted_bound_scaling_identity() {
    let t0 = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for case in 0..1000 {
        let n = rng.random_range(2..400);
        let w = 1.0 + 99.0 * rng.random::<f64>();
        let beta = 0.001 + 0.998 * rng.random::<f64>();
        let zs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * w).collect();
        let direct = weighted_pac_bound(&zs, w, beta).unwrap().epsilon;
        let scaled: Vec<f64> = zs.iter().map(|z| z / w).collect();
        let indirect = w * empirical_bernstein(&scaled, beta).unwrap().epsilon;
        assert!(
            (direct - indirect).abs() < 1e-12,
            "case {case}: {direct} vs {indirect} (w={w}, n={n})"
        );
    }
    pass(1, "weighted-bound scaling identity", t0, 1.0);
}

#[test]
fn criterion_02_binomial_inversion_oracle_match() {
    let t0 = Instant::now();
    for exp in 0..=6u32 {
        let m = 10u64.pow(exp);
        for &beta in &[0.5, 0.05, 1e-6] {
            let got = binomial_tail_inversion(0, m, beta).unwrap();
            let exact = 1.0 - beta.powf(1.0 / m as f64);
            assert!(
                (got - exact).abs() < 1e-10,
                "m={m} beta={beta}: {got} vs {exact}"
            );
        }
    }
    pass(2, "binomial inversion closed form", t0, 1.0);
}

#[test]
fn criterion_03_pair_variance_identity() {
    let t0 = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    for case in 0..100 {
        let n = rng.random_range(2..=1000);
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let fast = pair_variance(&xs).unwrap();
        // Literal double loop over unordered pairs.
        let mut acc = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = xs[i] - xs[j];
                acc += d * d;
            }
        }
        let oracle = acc / (n as f64 * (n as f64 - 1.0));
        assert!(
            (fast - oracle).abs() < 1e-12,
            "case {case}: {fast} vs {oracle}"
        );
    }
    pass(3, "pair-variance identity", t0, 5.0);
}

#[test]
fn criterion_04_unbiasedness() {
    let t0 = Instant::now();
    let (problem, surrogate) = synthetic_setup();
    let runs = 200;
    let n = 1_000;
    let means: Vec<f64> = (0..runs)
        .map(|i| {
            certify_is(
                &problem.oracle,
                &problem.nominal,
                &surrogate,
                0.35,
                0.05,
                n,
                sub_seed(42, 4, i),
                1,
            )
            .unwrap()
            .mean_z
        })
        .collect();
    let grand = means.iter().sum::<f64>() / runs as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (runs as f64 - 1.0);
    let se = (var / runs as f64).sqrt();
    assert!(
        (grand - 0.05).abs() <= 4.0 * se,
        "grand mean {grand} vs 0.05 (se {se})"
    );
    pass(4, "importance-weighted estimator unbiasedness", t0, 30.0);
}

#[test]
fn criterion_05_pac_coverage() {
    let t0 = Instant::now();
    let (problem, surrogate) = synthetic_setup();
    let trials = 1_000;
    let mut violations = 0usize;
    let mut max_weight_ratio = 0.0f64;
    for i in 0..trials {
        let report = certify_is(
            &problem.oracle,
            &problem.nominal,
            &surrogate,
            0.35,
            0.05,
            500,
            sub_seed(42, 5, i),
            1,
        )
        .unwrap();
        violations += usize::from(report.epsilon() < 0.05);
        max_weight_ratio = max_weight_ratio.max(report.max_weight_observed / report.w_max);
    }
    let rate = violations as f64 / trials as f64;
    assert!(rate <= 0.07, "violation rate {rate}");
    assert!(max_weight_ratio <= 1.0 + 1e-12);
    pass(5, "PAC coverage at beta=0.05", t0, 60.0);
}

#[test]
fn criterion_06_convergence_slopes() {
    let t0 = Instant::now();
    let mut cfg = RunConfig::for_system(SystemId::Synthetic);
    cfg.gp.budget = 200;
    cfg.gp.margin = 0.021;
    cfg.certify.seed = 42;
    cfg.certify.beta = 1e-6;
    cfg.convergence.alphas = vec![0.5];
    cfg.convergence.repetitions = 5;
    let problem = Problem::from_config(&cfg).unwrap();
    let exploration = learn_failure_set(&problem, &cfg, cfg.certify.seed).unwrap();
    let surrogate = build_surrogate(&exploration.failure_set).unwrap();
    let ladder = [1_000usize, 10_000, 100_000, 1_000_000];
    let table = convergence_study(&problem, &surrogate, &ladder, &cfg).unwrap();
    let is_slope = table.slope_is[0];
    let mc_slope = table.slope_mc;
    assert!(
        (-1.3..=-0.7).contains(&is_slope),
        "IS excess slope {is_slope} outside [-1.3, -0.7]"
    );
    assert!(
        (-0.75..=-0.25).contains(&mc_slope),
        "binomial excess slope {mc_slope} outside [-0.75, -0.25]"
    );
    assert!(
        is_slope < mc_slope,
        "IS slope {is_slope} must be strictly more negative than binomial {mc_slope}"
    );
    pass(6, "convergence slopes", t0, 600.0);
}

#[test]
fn criterion_07_weight_cap() {
    let t0 = Instant::now();
    // The cap is asserted sample by sample inside every certification (the
    // run aborts on violation); here a sweep across mixture weights and
    // surrogates re-checks the recorded maxima explicitly.
    let problem = Problem::from_config(&RunConfig::for_system(SystemId::Synthetic)).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for case in 0..20u64 {
        let alpha = 0.05 + 0.9 * rng.random::<f64>();
        let w = 0.02 + 0.3 * rng.random::<f64>();
        let x0 = rng.random::<f64>() * (1.0 - w);
        let surrogate = Density::uniform_box(
            HyperRect::new(vec![x0, 0.0], vec![x0 + w, 1.0]).unwrap(),
        );
        let report = certify_is(
            &problem.oracle,
            &problem.nominal,
            &surrogate,
            alpha,
            0.05,
            500,
            sub_seed(7, 7, case),
            1,
        )
        .unwrap();
        assert!(
            report.max_weight_observed <= 1.0 / (1.0 - alpha) + 1e-12,
            "case {case}: max weight {} vs cap {}",
            report.max_weight_observed,
            1.0 / (1.0 - alpha)
        );
    }
    pass(7, "importance-weight cap", t0, 30.0);
}

#[test]
fn criterion_08_gp_level_set_recovery() {
    let t0 = Instant::now();
    let domain = HyperRect::unit(2);
    let cfg = AcquisitionConfig {
        budget: 200,
        ..Default::default()
    };
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let (model, _) = active_learn(
        |x| Ok(f64::from(x[0] < 0.5)),
        &domain,
        Kernel::default_for(&domain),
        0.05,
        0.0,
        &cfg,
        &mut rng,
    )
    .unwrap();

    // Boundary within 0.1 of the true split at 20 probe rows.
    for row in 0..20 {
        let v = (row as f64 + 0.5) / 20.0;
        let mut crossing = None;
        let mut prev = model.posterior(&[0.0, v]).unwrap().0;
        for i in 1..=400 {
            let h = i as f64 / 400.0;
            let cur = model.posterior(&[h, v]).unwrap().0;
            if (prev >= 0.5) != (cur >= 0.5) {
                crossing = Some(h);
                break;
            }
            prev = cur;
        }
        let h_star = crossing.expect("no 0.5 crossing found");
        assert!(
            (h_star - 0.5).abs() <= 0.1,
            "row {row}: boundary at {h_star}"
        );
    }

    // Grid classification accuracy at least 90%.
    let res = 50;
    let mut correct = 0usize;
    for p in grid_points(&domain, res).unwrap() {
        let predicted = model.posterior(&p).unwrap().0 >= 0.5;
        correct += usize::from(predicted == (p[0] < 0.5));
    }
    let acc = correct as f64 / (res * res) as f64;
    assert!(acc >= 0.9, "grid accuracy {acc}");
    pass(8, "GP level-set recovery", t0, 30.0);
}

#[test]
fn criterion_09_quadrotor_experiment() {
    let t0 = Instant::now();
    let mut cfg = RunConfig::for_system(SystemId::Quadrotor);
    cfg.gp.budget = 300;
    cfg.certify.alpha = 0.1;
    cfg.certify.beta = 1e-6;
    cfg.certify.n = 1_000;
    cfg.certify.seed = 7;

    let out = run_alg1(&cfg, None).unwrap();
    let problem = Problem::from_config(&cfg).unwrap();
    let mc = certify_mc(
        &problem.oracle,
        &problem.nominal,
        cfg.certify.beta,
        cfg.certify.n,
        cfg.certify.seed,
        1,
    )
    .unwrap();
    let reference = reference_probability(&problem, 1_000_000, sub_seed(7, 9, 0), 1).unwrap();

    // (a) Both certificates upper-bound the large-sample reference.
    let eps_is = out.report.epsilon();
    let eps_mc = mc.epsilon();
    assert!(
        eps_is >= reference && eps_mc >= reference,
        "is {eps_is} / mc {eps_mc} vs reference {reference}"
    );
    // (b) The estimators agree to within 50% relative.
    assert!(
        (eps_is - eps_mc).abs() / eps_mc < 0.5,
        "relative gap {} too large",
        (eps_is - eps_mc).abs() / eps_mc
    );
    // (c) The learned failure polytope sits in the low-height, sinking
    // corner of the (h, vh) plane.
    let centroid = out.exploration.failure_set.polytope.centroid();
    assert!(
        centroid[0] < 0.0 && centroid[1] < 0.0,
        "failure centroid {centroid:?} not in the low-h, negative-vh corner"
    );
    println!(
        "  quadrotor: eps_is={eps_is:.5} eps_mc={eps_mc:.5} reference={reference:.5} \
         centroid=({:.3},{:.3})",
        centroid[0], centroid[1]
    );
    pass(9, "quadrotor benchmark properties", t0, 900.0);
}

#[test]
fn criterion_10_worker_determinism() {
    let t0 = Instant::now();
    let base = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for workers in [1usize, 8] {
        let mut cfg = RunConfig::for_system(SystemId::Synthetic);
        cfg.gp.budget = 120;
        cfg.gp.margin = 0.021;
        cfg.certify.n = 10_000;
        cfg.certify.seed = 42;
        cfg.workers = workers;
        cfg.output_dir = base.path().join(format!("w{workers}"));
        cli::cmd_explore(&cfg).unwrap();
        cli::cmd_certify(&cfg, cli::Estimator::Both).unwrap();
        reports.push(std::fs::read(cfg.output_dir.join("report.txt")).unwrap());
    }
    assert_eq!(
        reports[0], reports[1],
        "reports differ between 1 and 8 workers"
    );
    pass(10, "worker-count determinism", t0, 60.0);
}
