//! Finite-sample upper bounds on a failure probability from Bernoulli data:
//! the variance-adaptive empirical Bernstein bound next to the binomial
//! tail inversion, at several sample sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use viscert::bounds::{binomial_tail_inversion, empirical_bernstein, weighted_pac_bound};

fn main() -> viscert::Result<()> {
    let p_true = 0.03;
    let beta = 0.05;
    let mut rng = ChaCha12Rng::seed_from_u64(7);

    println!("true failure probability {p_true}, confidence 1 - {beta}");
    println!("{:>8} {:>6} {:>22} {:>22}", "n", "fails", "bernstein epsilon", "binomial epsilon");
    for n in [100usize, 1_000, 10_000, 100_000] {
        let xs: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.random::<f64>() < p_true))
            .collect();
        let k = xs.iter().filter(|&&x| x == 1.0).count();
        let bernstein = empirical_bernstein(&xs, beta)?;
        let binomial = binomial_tail_inversion(k as u64, n as u64, beta)?;
        println!(
            "{n:>8} {k:>6} {:>22.6} {:>22.6}",
            bernstein.epsilon, binomial
        );
    }

    // The weighted form scales the unweighted bound exactly.
    let zs: Vec<f64> = (0..500).map(|_| rng.random::<f64>() * 4.0).collect();
    let direct = weighted_pac_bound(&zs, 4.0, beta)?.epsilon;
    let scaled: Vec<f64> = zs.iter().map(|z| z / 4.0).collect();
    let via_scaling = 4.0 * empirical_bernstein(&scaled, beta)?.epsilon;
    println!("\nweighted bound {direct:.12}");
    println!("4 x scaled bound {via_scaling:.12}");
    println!("difference {:.3e}", (direct - via_scaling).abs());

    // Zero failures still certify a nontrivial rate.
    let none = binomial_tail_inversion(0, 10_000, beta)?;
    println!("\nzero failures in 10000 trials: epsilon = {none:.6}");
    Ok(())
}
