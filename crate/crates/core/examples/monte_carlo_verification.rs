//! Simulates the sequential game and compares the empirical rebuttal
//! statistics with their closed forms. Pass a seed and an episode count to
//! change the run:
//!
//!     cargo run --release --example monte_carlo_verification -- 7 1000000

use whataboutism::analytic::enumerate_pspe;
use whataboutism::model::ModelParams;
use whataboutism::simulate::{
    estimate_alpha, estimate_marginal_payoff, estimate_rebuttal_failure,
    estimate_whataboutism_frequency, EstimateReport, SimConfig,
};

fn show(e: &EstimateReport) {
    let state = e.state.map_or(format!("m={}", e.m), |s| s.to_string());
    let z = e.z_score.map_or("-".to_string(), |z| format!("{z:+.2}"));
    println!(
        "  {:<24}{state:<8}{:>10.6} ± {:.6}  closed form {:>9.6}  z {z}",
        e.quantity, e.estimate, e.std_error, e.analytic
    );
}

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(42, |s| s.parse().expect("seed"));
    let episodes = args
        .next()
        .map_or(200_000, |s| s.parse().expect("episode count"));

    let params = ModelParams::with_cbar(2.0, vec![1.8, 1.2], vec![1.1, 1.9]).unwrap();
    let cfg = SimConfig::new(episodes, seed).expect("at least 10000 episodes");

    for profile in enumerate_pspe(&params).profiles {
        println!(
            "profile mstar={} ({} episodes, seed {seed})",
            profile.mstar, episodes
        );
        for s in params.states() {
            show(&estimate_alpha(&params, &profile, s, &cfg).unwrap());
            show(&estimate_rebuttal_failure(&params, &profile, s, &cfg).unwrap());
            if s.m >= profile.mstar {
                show(&estimate_marginal_payoff(&params, &profile, s, &cfg).unwrap());
            }
        }
        for m in 1..=params.n {
            show(&estimate_whataboutism_frequency(&params, &profile, m, &cfg).unwrap());
        }
    }
}
