//! Closed-form solution of the reference two-level society: derived
//! constants, the benchmark without rebuttals, and the stable equilibrium.
//!
//!     cargo run --example solve_reference

use whataboutism::analytic::{solve_benchmark, stable_pspe, whataboutism_stats};
use whataboutism::model::{derive, ModelParams};

fn main() {
    let params =
        ModelParams::with_cbar(2.0, vec![1.8, 1.2], vec![1.1, 1.9]).expect("valid parameters");
    let d = derive(&params);
    let bench = solve_benchmark(&params);
    let stable = stable_pspe(&params);
    let stats = whataboutism_stats(&params, &stable);

    println!(
        "lambda = {} (from cbar = 2), M = {}",
        params.lambda, d.big_m
    );
    println!(" m       c_m     theta_m  x_benchmark   x_stable     alpha  frequency");
    for m in 1..=params.n {
        let l = &stats.levels[m - 1];
        println!(
            "{m:>2} {:>9.6} {:>11.6} {:>12.6} {:>10.6} {:>9.6} {:>10.6}",
            d.c_at(m),
            d.theta_at(m),
            bench.abstain[m - 1],
            stable.abstain_at(m),
            l.alpha,
            l.frequency
        );
    }
    // the stable profile discounts benchmark abstention by theta
    for m in d.big_m..=params.n {
        println!(
            "m={m}: x_stable / x_benchmark = {:.6} = theta",
            stable.abstain_at(m) / bench.abstain[m - 1]
        );
    }
}
