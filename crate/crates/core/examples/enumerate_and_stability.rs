//! Lists every equilibrium of a three-level society and checks which one
//! survives small perturbations of the abstention fractions.
//!
//!     cargo run --example enumerate_and_stability

use whataboutism::analytic::enumerate_pspe;
use whataboutism::dynamics::check_stability;
use whataboutism::model::{derive, ModelParams};

fn main() {
    let params = ModelParams::new(0.45, vec![1.2, 1.15, 1.1], vec![1.2, 1.5, 1.8]).unwrap();
    println!(
        "theta = {:?}, M = {}",
        derive(&params).theta,
        derive(&params).big_m
    );

    for profile in enumerate_pspe(&params).profiles {
        let report = check_stability(&params, &profile);
        let verdict = if report.stable { "stable" } else { "unstable" };
        println!(
            "mstar={} abstain={:.5?} -> {verdict}",
            profile.mstar, profile.abstain
        );
        for l in &report.levels {
            println!(
                "   m={} x={:.5} slope={:.4} max ratio={:.4}",
                l.m, l.profile_point, l.derivative, l.self_map.max_ratio
            );
        }
        if let Some((m, w)) = report.witness() {
            println!(
                "   witness: m={m}, perturbed to {:.3e}, distance ratio {:.4}",
                w.perturbed, w.ratio
            );
        }
    }
}
