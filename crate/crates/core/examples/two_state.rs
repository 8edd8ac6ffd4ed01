//! The one-level society with two mirror states: the interior cutoff exists
//! exactly when g < 1 + lambda b / 2.
//!
//!     cargo run --example two_state

use whataboutism::analytic::{solve_benchmark, two_state_cutoff};
use whataboutism::model::ModelParams;

fn main() {
    let (lambda, b) = (0.3, 1.6);
    println!(
        "lambda={lambda} b={b}: interior cutoff needs g < {}",
        1.0 + 0.5 * lambda * b
    );
    println!("    g   benchmark   with rebuttals");
    for i in 0..=8 {
        let g = 1.05 + 0.05 * i as f64;
        let p = ModelParams::new(lambda, vec![g], vec![b]).unwrap();
        println!(
            "{g:.2}   {:>9.6}   {:>14.6}",
            solve_benchmark(&p).cutoff[0],
            two_state_cutoff(g, b, lambda)
        );
    }
}
