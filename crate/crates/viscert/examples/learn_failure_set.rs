//! GP active learning of a failure boundary: gamma-greedy Straddle
//! acquisition on a known left-half-plane oracle, then the convex hull of
//! the learned 0.5 level set.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use viscert::geometry::{convex_hull, HyperRect};
use viscert::gp::{active_learn, grid_points, level_set_points, AcquisitionConfig, Kernel};

fn main() -> viscert::Result<()> {
    let domain = HyperRect::unit(2);
    let truth = |x: &[f64]| x[0] < 0.5; // failures fill the left half

    let cfg = AcquisitionConfig {
        budget: 200,
        ..Default::default()
    };
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let mut calls = 0usize;
    let (model, _labeled) = active_learn(
        |x| {
            calls += 1;
            Ok(f64::from(truth(x)))
        },
        &domain,
        Kernel::default_for(&domain),
        0.05,
        0.0,
        &cfg,
        &mut rng,
    )?;
    println!("oracle calls: {calls}");

    // Classification accuracy of the learned 0.5 level set on a fine grid.
    let res = 50;
    let mut correct = 0usize;
    for p in grid_points(&domain, res)? {
        let predicted = model.posterior(&p)?.0 >= 0.5;
        correct += usize::from(predicted == truth(&p));
    }
    println!(
        "grid accuracy: {:.1}%",
        100.0 * correct as f64 / (res * res) as f64
    );

    // Boundary estimate per row.
    println!("estimated boundary position per row (truth 0.5):");
    for row in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mut crossing = f64::NAN;
        let mut prev = model.posterior(&[0.0, row])?.0;
        for i in 1..=200 {
            let h = i as f64 / 200.0;
            let cur = model.posterior(&[h, row])?.0;
            if (prev >= 0.5) != (cur >= 0.5) {
                crossing = h;
                break;
            }
            prev = cur;
        }
        println!("  v = {row:.1}: boundary at h = {crossing:.3}");
    }

    let level = level_set_points(&model, &domain, res)?;
    let hull = convex_hull(&level)?;
    println!(
        "failure hull: {} vertices, area {:.4} (truth 0.5)",
        hull.vertices().len(),
        hull.area()
    );
    Ok(())
}
