//! Best-response iteration of the abstention fraction converging to the
//! stable point from several starts, and the benchmark stage recursion
//! running away from its stationary cutoff.
//!
//!     cargo run --example fixed_point_iteration

use whataboutism::analytic::solve_benchmark;
use whataboutism::dynamics::{
    attracting_point, benchmark_recursion, iterate_many, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use whataboutism::model::ModelParams;

fn main() {
    let params = ModelParams::with_cbar(2.0, vec![1.8, 1.2], vec![1.1, 1.9]).unwrap();
    let starts = [1e-4, 0.01, 0.1, 0.5, 0.99];

    for m in 1..=params.n {
        println!(
            "level {m}: attracting point {:.10}",
            attracting_point(&params, m)
        );
        for (x0, t) in starts.iter().zip(iterate_many(
            &params,
            m,
            &starts,
            DEFAULT_TOL,
            DEFAULT_MAX_ITER,
        )) {
            println!(
                "  x0={x0:<6} -> {:.10} after {} steps (residual {:.1e})",
                t.last(),
                t.iterates.len() - 1,
                t.residual
            );
        }
    }

    let m = 2;
    let v_star = solve_benchmark(&params).cutoff[m - 1];
    println!("\nbenchmark cutoff at m={m}: v* = {v_star:.10}");
    for v0 in [v_star, v_star + 1e-6, v_star - 1e-6] {
        let t = benchmark_recursion(&params, m, v0, 100);
        match t.exit {
            Some(exit) => println!(
                "  v0 = v* {:+.0e}: leaves [0, g] {exit:?} after {} steps",
                v0 - v_star,
                t.values.len() - 1
            ),
            None => println!(
                "  v0 = v*: stays at {:.10} for {} steps",
                t.values.last().unwrap(),
                t.values.len() - 1
            ),
        }
    }
}
