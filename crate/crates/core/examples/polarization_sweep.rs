//! Comparative statics: finite-difference response to polarization and a
//! lambda sweep written as tidy CSV to stdout.
//!
//!     cargo run --example polarization_sweep > sweep.csv

use whataboutism::analytic::{polarization_response, POLARIZATION_STEP};
use whataboutism::cli::{fmt_real, run_sweep, SweepAxis, SweepSpec};
use whataboutism::model::{derive, ModelParams};

fn main() {
    let base = ModelParams::new(0.25, vec![1.8, 1.2], vec![1.1, 1.9]).unwrap();

    for m in derive(&base).big_m..=base.n {
        let r = polarization_response(&base, m, 1.0, POLARIZATION_STEP).unwrap();
        eprintln!(
            "m={m}: d x/dk = {:.5} ({:?}), d frequency/dk = {:.5} ({:?})",
            r.d_abstain, r.abstain_sign, r.d_frequency, r.frequency_sign
        );
    }

    println!("axis,axis_value,m,quantity,stable");
    for axis in [SweepAxis::KPolarization, SweepAxis::Lambda] {
        let values = match axis {
            SweepAxis::KPolarization => (0..=10).map(|i| 1.0 + 0.005 * i as f64).collect(),
            _ => (1..=9).map(|i| 0.05 * i as f64).collect(),
        };
        let outcome = run_sweep(&SweepSpec {
            axis,
            values,
            base: base.clone(),
            outputs: vec!["abstain".into(), "whataboutism_frequency".into()],
        });
        eprintln!(
            "{axis:?}: {} rows, {} violations",
            outcome.rows.len(),
            outcome.violations.len()
        );
        for r in &outcome.rows {
            println!(
                "{axis:?},{},{},{},{}",
                fmt_real(r.axis_value),
                r.m,
                r.quantity,
                fmt_real(r.stable)
            );
        }
    }
}
