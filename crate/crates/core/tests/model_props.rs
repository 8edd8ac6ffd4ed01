mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use whataboutism::model::{derive, lambda_from_cbar, ModelParams};

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    any::<u64>().prop_map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        common::random_params(&mut rng, 6)
    })
}

proptest! {
    #[test]
    fn theta_increases_and_c_is_a_probability(p in params_strategy()) {
        let d = derive(&p);
        prop_assert!(d.theta.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(d.theta.iter().all(|&t| t < 1.0));
        prop_assert!(d.c.iter().all(|&c| c > 0.0 && c < 1.0));
        prop_assert!(p.g.iter().all(|&g| 2.0 * g - 1.0 > 1.0));
        for m in d.big_m..=p.n {
            prop_assert!(d.theta_at(m) > 0.0);
        }
        for m in 1..d.big_m {
            prop_assert!(d.theta_at(m) <= 0.0);
        }
    }

    #[test]
    fn phi_brackets_theta(p in params_strategy(), frac in 0.0f64..1.0) {
        for m in 1..=p.n {
            let theta = p.theta(m);
            let z = 2.0 * frac + 1e-9;
            let diff = p.phi(m, p.c(m) * z) - z;
            if (z - theta).abs() > 1e-10 {
                prop_assert_eq!(diff.signum(), (theta - z).signum());
            }
        }
    }

    #[test]
    fn phi_is_increasing_and_bounded(p in params_strategy(), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for m in 1..=p.n {
            if hi > lo {
                prop_assert!(p.phi(m, hi) > p.phi(m, lo));
            }
            prop_assert!(p.phi(m, hi) < 1.0 + p.lambda_b(m));
        }
    }

    #[test]
    fn microfoundation_integral_matches_lambda_b(p in params_strategy(), extra in 0.001f64..3.0) {
        let b_max = p.b[p.n - 1];
        let cbar = b_max + extra;
        let lambda = lambda_from_cbar(cbar, b_max).unwrap();
        prop_assert!(lambda < 0.5);
        for &b in &p.b {
            let integral = common::condemnation_probability(cbar, b);
            prop_assert!((integral - lambda * b).abs() < 1e-9);
        }
    }

    #[test]
    fn validation_is_idempotent(p in params_strategy()) {
        prop_assert_eq!(p.clone().validate().unwrap(), p);
    }
}

#[test]
fn microfoundation_reference_value() {
    assert!((common::condemnation_probability(2.0, 1.9) - 0.25 * 1.9).abs() < 1e-12);
    assert_eq!(lambda_from_cbar(2.0, 1.9).unwrap(), 0.25);
}
