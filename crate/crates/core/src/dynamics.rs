//! Fixed-point machinery around the equilibrium self-map
//! `x -> c[m] * phi_m(x)`, the local dynamic-stability test, and the
//! forward recursion of the benchmark cutoffs.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{solve_benchmark, EquilibriumProfile};
use crate::model::ModelParams;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// `c[m] * phi_m(x)`.
pub fn self_map(params: &ModelParams, m: usize, x: f64) -> f64 {
    params.c(m) * params.phi(m, x)
}

/// `phi_m(c[m] * z)`, the same map written in coordinates `z = x / c[m]`.
pub fn stability_map(params: &ModelParams, m: usize, z: f64) -> f64 {
    params.phi(m, params.c(m) * z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// `x0, x1, ...` including the start.
    pub iterates: Vec<f64>,
    pub converged: bool,
    pub limit: Option<f64>,
    /// `|x - F(x)|` at the last iterate.
    pub residual: f64,
}

impl IterationTrace {
    pub fn last(&self) -> f64 {
        *self.iterates.last().expect("trace holds at least x0")
    }

    /// Writes `step,value` rows.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "value"])?;
        for (i, x) in self.iterates.iter().enumerate() {
            out.write_record([i.to_string(), crate::cli::fmt_real(*x)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Iterates the self-map until successive iterates differ by at most `tol`.
/// Hitting `max_iter` yields a non-converged trace rather than an error.
pub fn iterate(
    params: &ModelParams,
    m: usize,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> IterationTrace {
    let mut iterates = vec![x0];
    let mut x = x0;
    for _ in 0..max_iter {
        let next = self_map(params, m, x);
        iterates.push(next);
        let step = (next - x).abs();
        x = next;
        if step <= tol {
            return IterationTrace {
                iterates,
                converged: true,
                limit: Some(x),
                residual: (x - self_map(params, m, x)).abs(),
            };
        }
    }
    IterationTrace {
        residual: (x - self_map(params, m, x)).abs(),
        iterates,
        converged: false,
        limit: None,
    }
}

/// Runs [`iterate`] from each start in parallel; results keep input order.
pub fn iterate_many(
    params: &ModelParams,
    m: usize,
    starts: &[f64],
    tol: f64,
    max_iter: usize,
) -> Vec<IterationTrace> {
    starts
        .par_iter()
        .map(|&x0| iterate(params, m, x0, tol, max_iter))
        .collect()
}

/// Non-negative fixed points of the self-map at level `m`.
pub fn fixed_points(params: &ModelParams, m: usize) -> Vec<f64> {
    let theta = params.theta(m);
    if theta > 0.0 {
        vec![0.0, params.c(m) * theta]
    } else {
        vec![0.0]
    }
}

/// The fixed point that attracts every interior start.
pub fn attracting_point(params: &ModelParams, m: usize) -> f64 {
    let theta = params.theta(m);
    if theta > 0.0 {
        params.c(m) * theta
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    /// Half-width of the perturbation window.
    pub delta: f64,
    /// Number of perturbations, split evenly on both sides.
    pub grid_points: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            delta: 1e-3,
            grid_points: 64,
        }
    }
}

/// A perturbation at which the map fails to contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub perturbed: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormCheck {
    /// Point the perturbations are centred on, in this form's coordinates.
    pub center: f64,
    /// Largest `|F(x') - F(x)| / |x' - x|` over the grid.
    pub max_ratio: f64,
    pub contracts: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStability {
    pub m: usize,
    pub fixed_points: Vec<f64>,
    pub stable_point: f64,
    pub profile_point: f64,
    /// `x -> c phi(x)` around the profile's abstention fraction.
    pub self_map: FormCheck,
    /// `z -> phi(c z)` around `x / c`.
    pub stability_map: FormCheck,
    /// `|d/dx c phi(x)|` at the profile point.
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub mstar: usize,
    pub stable: bool,
    /// Whether both forms of the map give the same verdict at every level.
    pub forms_agree: bool,
    pub levels: Vec<LevelStability>,
}

impl StabilityReport {
    /// First level that fails, with its expanding perturbation.
    pub fn witness(&self) -> Option<(usize, Witness)> {
        self.levels
            .iter()
            .find_map(|l| l.self_map.witness.map(|w| (l.m, w)))
    }
}

fn check_form(
    center: f64,
    upper: f64,
    cfg: &StabilityConfig,
    map: impl Fn(f64) -> f64,
) -> FormCheck {
    // The window shrinks to stay inside (0, upper) when centred on an
    // interior point; a perturbation landing on another fixed point would
    // otherwise tie at ratio 1.
    let delta = if center > 0.0 {
        cfg.delta.min(center)
    } else {
        cfg.delta
    };
    let half = (cfg.grid_points / 2).max(1);
    let base = map(center);
    let mut max_ratio = 0.0_f64;
    let mut witness = None;
    for j in 0..half {
        let t = (j as f64 + 0.5) / half as f64;
        for offset in [-t * delta, t * delta] {
            let x = center + offset;
            if !(x > 0.0 && x < upper) {
                continue;
            }
            let ratio = (map(x) - base).abs() / (x - center).abs();
            if ratio >= 1.0 && witness.is_none() {
                witness = Some(Witness {
                    perturbed: x,
                    ratio,
                });
            }
            max_ratio = max_ratio.max(ratio);
        }
    }
    FormCheck {
        center,
        max_ratio,
        contracts: witness.is_none(),
        witness,
    }
}

pub fn check_stability(params: &ModelParams, profile: &EquilibriumProfile) -> StabilityReport {
    check_stability_with(params, profile, &StabilityConfig::default())
}

pub fn check_stability_with(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    cfg: &StabilityConfig,
) -> StabilityReport {
    let levels: Vec<LevelStability> = (1..=params.n)
        .map(|m| {
            let x = profile.abstain_at(m);
            let c = params.c(m);
            let lb = params.lambda_b(m);
            let self_map_check = check_form(x, 1.0, cfg, |x| self_map(params, m, x));
            let stability_map_check =
                check_form(x / c, 1.0 / c, cfg, |z| stability_map(params, m, z));
            LevelStability {
                m,
                fixed_points: fixed_points(params, m),
                stable_point: attracting_point(params, m),
                profile_point: x,
                self_map: self_map_check,
                stability_map: stability_map_check,
                derivative: c * (1.0 + lb) * lb / ((lb + x) * (lb + x)),
            }
        })
        .collect();
    let stable = levels.iter().all(|l| l.self_map.contracts);
    let forms_agree = levels
        .iter()
        .all(|l| l.self_map.contracts == l.stability_map.contracts);
    StabilityReport {
        mstar: profile.mstar,
        stable,
        forms_agree,
        levels,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exit {
    Above,
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTrajectory {
    pub values: Vec<f64>,
    /// Set when the trajectory left `[0, g]`; `values` ends at the first
    /// outside point.
    pub exit: Option<Exit>,
}

/// Forward iteration of the benchmark stage cutoffs,
/// `v' - v = (2g - 1) v - lambda b g`, for up to `steps` steps.
pub fn benchmark_recursion(
    params: &ModelParams,
    m: usize,
    v0: f64,
    steps: usize,
) -> BenchmarkTrajectory {
    let g = params.g_at(m);
    let stationary = solve_benchmark(params).cutoff[m - 1];
    // Written around the stationary point, (2g - 1) v - lambda b g equals
    // (2g - 1)(v - v*), so the stationary start reproduces itself exactly.
    let mut values = Vec::with_capacity(steps + 1);
    let mut v = v0;
    values.push(v);
    for _ in 0..steps {
        v += (2.0 * g - 1.0) * (v - stationary);
        values.push(v);
        if v > g {
            return BenchmarkTrajectory {
                values,
                exit: Some(Exit::Above),
            };
        }
        if v < 0.0 {
            return BenchmarkTrajectory {
                values,
                exit: Some(Exit::Below),
            };
        }
    }
    BenchmarkTrajectory { values, exit: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{enumerate_pspe, pspe_profile};

    fn reference() -> ModelParams {
        ModelParams::with_cbar(2.0, vec![1.8, 1.2], vec![1.1, 1.9]).unwrap()
    }

    #[test]
    fn self_map_examples() {
        let p = reference();
        assert_eq!(self_map(&p, 1, 0.0), 0.0);
        let x2 = p.c(2) * p.theta(2);
        assert!((self_map(&p, 2, x2) - x2).abs() < 1e-15);
        for x in [1e-6, 0.01, 0.3, 0.99] {
            assert!(self_map(&p, 1, x) < x);
        }
    }

    #[test]
    fn iterate_examples() {
        let p = reference();
        let t = iterate(&p, 2, 0.5, 1e-12, DEFAULT_MAX_ITER);
        assert!(t.converged);
        assert!((t.limit.unwrap() - 0.475 / 1.4 * 0.075).abs() < 1e-10);
        assert!(t.residual <= 1e-12);

        let t = iterate(&p, 1, 0.5, 1e-12, DEFAULT_MAX_ITER);
        assert!(t.converged);
        assert!(t.limit.unwrap().abs() < 1e-10);

        let t = iterate(&p, 2, 0.0, 1e-12, DEFAULT_MAX_ITER);
        assert_eq!(t.iterates, vec![0.0, 0.0]);
        assert_eq!(t.limit, Some(0.0));
    }

    #[test]
    fn iterate_reports_non_convergence() {
        let p = reference();
        let t = iterate(&p, 2, 0.5, 1e-12, 3);
        assert!(!t.converged);
        assert_eq!(t.limit, None);
        assert_eq!(t.iterates.len(), 4);
    }

    #[test]
    fn iterate_many_keeps_order() {
        let p = reference();
        let starts = [0.9, 0.1, 0.0, 0.5];
        let traces = iterate_many(&p, 2, &starts, 1e-12, DEFAULT_MAX_ITER);
        for (t, x0) in traces.iter().zip(starts) {
            assert_eq!(t.iterates[0], x0);
        }
    }

    #[test]
    fn stability_of_reference_family() {
        let p = reference();
        let fam = enumerate_pspe(&p);
        let stable = check_stability(&p, &fam.profiles[0]);
        assert!(stable.stable);
        assert!(stable.forms_agree);
        assert!(stable.levels.iter().all(|l| l.derivative < 1.0));

        let breakdown = check_stability(&p, &fam.profiles[1]);
        assert!(!breakdown.stable);
        assert!(breakdown.forms_agree);
        let (m, w) = breakdown.witness().unwrap();
        assert_eq!(m, 2);
        assert!(w.perturbed > 0.0 && w.perturbed < p.c(2) * p.theta(2));
        assert!(w.ratio > 1.0);
        assert!(breakdown.levels[1].derivative > 1.0);
    }

    #[test]
    fn all_breakdown_single_profile_is_stable() {
        let p = ModelParams::new(0.1, vec![1.9, 1.8], vec![1.1, 1.2]).unwrap();
        let fam = enumerate_pspe(&p);
        assert_eq!(fam.profiles.len(), 1);
        assert!(check_stability(&p, &fam.profiles[0]).stable);
    }

    #[test]
    fn stability_report_has_fixed_points() {
        let p = reference();
        let r = check_stability(&p, &pspe_profile(&p, 2).unwrap());
        assert_eq!(r.levels[0].fixed_points, vec![0.0]);
        assert_eq!(r.levels[0].stable_point, 0.0);
        assert_eq!(r.levels[1].fixed_points.len(), 2);
        assert!(r.levels[1].self_map.max_ratio < 1.0);
    }

    #[test]
    fn benchmark_recursion_examples() {
        let p = ModelParams::new(0.25, vec![1.5], vec![1.5]).unwrap();
        let t = benchmark_recursion(&p, 1, 0.28125, 1000);
        assert_eq!(t.exit, None);
        assert!(t.values.iter().all(|&v| v == 0.28125));

        let up = benchmark_recursion(&p, 1, 0.3, 1000);
        assert_eq!(up.exit, Some(Exit::Above));
        assert!(up.values.windows(2).all(|w| w[1] > w[0]));
        assert!(*up.values.last().unwrap() > 1.5);

        let down = benchmark_recursion(&p, 1, 0.25, 1000);
        assert_eq!(down.exit, Some(Exit::Below));
        assert!(down.values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn benchmark_recursion_matches_rearranged_form() {
        let p = ModelParams::new(0.25, vec![1.5], vec![1.5]).unwrap();
        let t = benchmark_recursion(&p, 1, 0.3, 3);
        let (g, lbg) = (1.5, 0.25 * 1.5 * 1.5);
        for w in t.values.windows(2) {
            assert!((w[1] - w[0] - ((2.0 * g - 1.0) * w[0] - lbg)).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_csv_layout() {
        let p = reference();
        let t = iterate(&p, 2, 0.0, 1e-12, 10);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("step,value\n0,"));
        assert_eq!(s.lines().count(), 3);
    }
}
