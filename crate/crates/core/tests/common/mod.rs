//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use rand::Rng;
use whataboutism::model::ModelParams;

pub fn reference() -> ModelParams {
    ModelParams::with_cbar(2.0, vec![1.8, 1.2], vec![1.1, 1.9]).unwrap()
}

/// Hand-computed values for the reference set.
pub mod frozen {
    pub const THETA: [f64; 2] = [-1.325, 0.075];
    /// 0.475 / 1.4
    pub const C2: f64 = 0.339_285_714_285_714_3;
    /// 0.475 / 1.4 * 0.075
    pub const X2_STABLE: f64 = 0.025_446_428_571_428_57;
    pub const FREQUENCY: [f64; 2] = [1.0, 0.855_625];
    pub const ALPHA2: f64 = 0.925;
}

fn strictly_sorted<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] > 1e-6) {
            return v;
        }
    }
}

/// Any valid parameter set with `1 <= n <= max_n`. Bounds keep a 1e-3 margin
/// inside (1, 2) so polarization steps stay admissible.
pub fn random_params<R: Rng>(rng: &mut R, max_n: usize) -> ModelParams {
    let n = rng.random_range(1..=max_n);
    let lambda = rng.random_range(0.02..0.49);
    let mut g = strictly_sorted(rng, n, 1.001, 1.999);
    g.reverse();
    let b = strictly_sorted(rng, n, 1.001, 1.999);
    ModelParams::new(lambda, g, b).expect("generator respects every restriction")
}

/// Random parameters whose `theta` stays at least `min_abs_theta` away from
/// zero, where the self-map stops being a strict contraction.
pub fn random_generic<R: Rng>(rng: &mut R, max_n: usize, min_abs_theta: f64) -> ModelParams {
    loop {
        let p = random_params(rng, max_n);
        if (1..=p.n).all(|m| p.theta(m).abs() >= min_abs_theta) {
            return p;
        }
    }
}

/// Random generic parameters with at least two PSPE (some `theta > 0`).
pub fn random_multi_pspe<R: Rng>(rng: &mut R, max_n: usize, min_abs_theta: f64) -> ModelParams {
    loop {
        // tilt g towards 1 so interior levels are common
        let mut p = random_generic(rng, max_n, min_abs_theta);
        if p.theta(p.n) > 0.0 {
            return p;
        }
        let shrink = rng.random_range(0.05..0.3);
        p.g.iter_mut().for_each(|g| *g = 1.0 + (*g - 1.0) * shrink);
        if let Ok(p) = p.validate() {
            if p.theta(p.n) > 0.0 && (1..=p.n).all(|m| p.theta(m).abs() >= min_abs_theta) {
                return p;
            }
        }
    }
}

/// Composite Simpson rule on `[a, b]` with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

/// Probability that a uniform cost on `[0, cbar]` falls below a uniform
/// disutility on `[0, b]`, as a nested numerical integral.
pub fn condemnation_probability(cbar: f64, b: f64) -> f64 {
    let inner = |u: f64| simpson(|_c| 1.0, 0.0, u, 64);
    simpson(inner, 0.0, b, 256) / (cbar * b)
}

/// All solutions `(x, y)` of `x = c min{phi(y), T}`, `y = c min{phi(x), T}`
/// at level `m`, found by scanning `x -> x - H(H(x))` on a log-spaced grid
/// over (0, 1), bisecting every sign change, and adding the exact root at 0.
pub fn paired_system_solutions(p: &ModelParams, m: usize, cap: f64) -> Vec<(f64, f64)> {
    let h = |u: f64| p.c(m) * p.phi(m, u).min(cap);
    let f = |x: f64| x - h(h(x));
    let mut roots = Vec::new();
    if f(0.0) == 0.0 {
        roots.push(0.0);
    }
    let grid: Vec<f64> = (0..=4000)
        .map(|i| 10f64.powf(-14.0 + 14.0 * i as f64 / 4000.0))
        .filter(|&x| x < 1.0)
        .collect();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.into_iter().map(|x| (x, h(x))).collect()
}
