//! Closed-form equilibrium computation.
//!
//! Two regimes are covered. Without whataboutism every state is solved in
//! isolation and has a unique stationary cutoff. With it, the equilibria
//! form a family indexed by a breakdown threshold `mstar in {M, ..., n+1}`:
//! levels below `mstar` abstain with probability zero, levels at or above it
//! abstain with probability `c[m] * theta[m]`, and every rebuttal targets the
//! rival camp's state of equal sensitivity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{derive, DerivedQuantities, ModelError, ModelParams, StateId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("mstar = {mstar} is not an equilibrium threshold; valid range is {min}..={max}")]
    InvalidThreshold {
        mstar: usize,
        min: usize,
        max: usize,
    },
    #[error("polarization scale k = {k} leaves the admissible parameter region: {source}")]
    ScaleOutOfRange {
        k: f64,
        #[source]
        source: ModelError,
    },
    #[error("profile does not fit the parameters: {0}")]
    ProfileMismatch(String),
}

/// Cutoffs and abstention fractions of the no-whataboutism game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSolution {
    pub cutoff: Vec<f64>,
    pub abstain: Vec<f64>,
}

pub fn solve_benchmark(params: &ModelParams) -> BenchmarkSolution {
    let cutoff: Vec<f64> = (1..=params.n)
        .map(|m| {
            let g = params.g_at(m);
            params.lambda * g * params.b_at(m) / (2.0 * g - 1.0)
        })
        .collect();
    let abstain = cutoff.iter().zip(&params.g).map(|(v, g)| v / g).collect();
    BenchmarkSolution { cutoff, abstain }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RebuttalTarget {
    pub state: StateId,
    pub target: StateId,
}

/// A symmetric stationary cutoff profile. Both camps share `cutoff` and
/// `abstain`, indexed by sensitivity level (index 0 is m = 1).
///
/// Profiles built by [`pspe_profile`] are tagged `is_pspe`; profiles built
/// with [`EquilibriumProfile::from_cutoffs`] may be arbitrary and are used
/// to probe the simulator and the stability test off equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    /// Lowest level from which every abstention fraction is positive.
    pub mstar: usize,
    pub cutoff: Vec<f64>,
    pub abstain: Vec<f64>,
    pub rebuttal_target: Vec<RebuttalTarget>,
    #[serde(default)]
    pub is_pspe: bool,
}

impl EquilibriumProfile {
    /// Wraps arbitrary cutoffs `0 <= v*[m] <= g[m]`.
    pub fn from_cutoffs(params: &ModelParams, cutoff: Vec<f64>) -> Result<Self, AnalyticError> {
        if cutoff.len() != params.n {
            return Err(AnalyticError::ProfileMismatch(format!(
                "expected {} cutoffs, got {}",
                params.n,
                cutoff.len()
            )));
        }
        for (i, (&v, &g)) in cutoff.iter().zip(&params.g).enumerate() {
            if !(0.0..=g).contains(&v) {
                return Err(AnalyticError::ProfileMismatch(format!(
                    "cutoff[{}] = {v} outside [0, g = {g}]",
                    i + 1
                )));
            }
        }
        Ok(Self::assemble(params, cutoff, false))
    }

    /// Profile in which every level abstains with probability zero.
    pub fn breakdown(params: &ModelParams) -> Self {
        Self::assemble(params, vec![0.0; params.n], false)
    }

    fn assemble(params: &ModelParams, cutoff: Vec<f64>, is_pspe: bool) -> Self {
        let abstain: Vec<f64> = cutoff.iter().zip(&params.g).map(|(v, g)| v / g).collect();
        let mstar = abstain.iter().rposition(|&x| x <= 0.0).map_or(1, |i| i + 2);
        let mut profile = EquilibriumProfile {
            mstar,
            cutoff,
            abstain,
            rebuttal_target: Vec::new(),
            is_pspe,
        };
        profile.rebuttal_target = params
            .states()
            .map(|state| RebuttalTarget {
                state,
                target: mu_and_target(params, &profile, state).1,
            })
            .collect();
        profile
    }

    pub fn abstain_at(&self, m: usize) -> f64 {
        self.abstain[m - 1]
    }

    pub fn cutoff_at(&self, m: usize) -> f64 {
        self.cutoff[m - 1]
    }

    pub fn target_of(&self, state: StateId) -> Option<StateId> {
        self.rebuttal_target
            .iter()
            .find(|t| t.state == state)
            .map(|t| t.target)
    }

    /// Checks that a deserialized profile is consistent with `params`.
    pub fn check_against(&self, params: &ModelParams) -> Result<(), AnalyticError> {
        let rebuilt = EquilibriumProfile::from_cutoffs(params, self.cutoff.clone())?;
        if rebuilt.abstain != self.abstain {
            return Err(AnalyticError::ProfileMismatch(
                "abstain differs from cutoff / g".into(),
            ));
        }
        if rebuilt.mstar != self.mstar {
            return Err(AnalyticError::ProfileMismatch(format!(
                "mstar = {} but cutoffs imply {}",
                self.mstar, rebuilt.mstar
            )));
        }
        Ok(())
    }
}

/// The PSPE with breakdown threshold `mstar`.
pub fn pspe_profile(
    params: &ModelParams,
    mstar: usize,
) -> Result<EquilibriumProfile, AnalyticError> {
    let derived = derive(params);
    pspe_profile_with(params, &derived, mstar)
}

fn pspe_profile_with(
    params: &ModelParams,
    derived: &DerivedQuantities,
    mstar: usize,
) -> Result<EquilibriumProfile, AnalyticError> {
    let (min, max) = (derived.big_m, params.n + 1);
    if mstar < min || mstar > max {
        return Err(AnalyticError::InvalidThreshold { mstar, min, max });
    }
    let cutoff = (1..=params.n)
        .map(|m| {
            if m < mstar {
                0.0
            } else {
                derived.c_at(m) * derived.theta_at(m) * params.g_at(m)
            }
        })
        .collect();
    let mut profile = EquilibriumProfile::assemble(params, cutoff, true);
    // assemble() infers mstar from the zeros; a theta == 0 level at the
    // threshold would make it one higher than requested.
    profile.mstar = mstar;
    Ok(profile)
}

/// All PSPE ordered by threshold; `stable_index` points at `mstar == M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PspeFamily {
    pub profiles: Vec<EquilibriumProfile>,
    pub stable_index: usize,
}

impl PspeFamily {
    pub fn stable(&self) -> &EquilibriumProfile {
        &self.profiles[self.stable_index]
    }
}

pub fn enumerate_pspe(params: &ModelParams) -> PspeFamily {
    let derived = derive(params);
    let profiles = (derived.big_m..=params.n + 1)
        .map(|mstar| pspe_profile_with(params, &derived, mstar).expect("threshold in range"))
        .collect();
    PspeFamily {
        profiles,
        stable_index: 0,
    }
}

/// The unique dynamically stable PSPE (`mstar == M`).
pub fn stable_pspe(params: &ModelParams) -> EquilibriumProfile {
    let derived = derive(params);
    pspe_profile_with(params, &derived, derived.big_m).expect("M is always a valid threshold")
}

/// Ex-ante probability that the terminator in `state` is from the rival camp.
pub fn alpha_closed_form(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
) -> f64 {
    let x = profile.abstain_at(state.m);
    let half_lb = 0.5 * params.lambda_b(state.m);
    (1.0 - x) * half_lb / (half_lb + 0.5 * x)
}

/// Probability that rival condemnation in `state` cannot be rebutted, and
/// the rebuttal state that attains it.
///
/// Candidates are the rival camp's states at least as sensitive as `state`;
/// ties go to the least sensitive one.
pub fn mu_and_target(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
) -> (f64, StateId) {
    let rival = state.camp.rival();
    let mut best = (f64::INFINITY, state.mirror());
    for m in state.m..=params.n {
        // 1 - alpha simplifies to phi of the target's abstention fraction.
        let fail = params.phi(m, profile.abstain_at(m));
        if fail < best.0 {
            best = (fail, StateId::new(rival, m));
        }
    }
    best
}

/// Closed form `min{1, (1 - theta[m])^2}` at the stable PSPE.
pub fn whataboutism_frequency(params: &ModelParams, m: usize) -> f64 {
    let t = params.theta(m);
    ((1.0 - t) * (1.0 - t)).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelWhataboutism {
    pub m: usize,
    pub alpha: f64,
    pub mu: f64,
    /// Probability that both mirror states produce a rebuttable path.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhataboutismStats {
    pub levels: Vec<LevelWhataboutism>,
}

/// Per-level alpha, mu and whataboutism frequency of any symmetric profile.
pub fn whataboutism_stats(params: &ModelParams, profile: &EquilibriumProfile) -> WhataboutismStats {
    let levels = (1..=params.n)
        .map(|m| {
            let s1 = StateId::new(crate::model::Camp::One, m);
            let alpha = alpha_closed_form(params, profile, s1);
            let alpha_mirror = alpha_closed_form(params, profile, s1.mirror());
            LevelWhataboutism {
                m,
                alpha,
                mu: mu_and_target(params, profile, s1).0,
                frequency: alpha * alpha_mirror,
            }
        })
        .collect();
    WhataboutismStats { levels }
}

/// Interior cutoff of the two-state example, or 0 when only the breakdown
/// equilibrium exists. The existence condition `g < 1 + b lambda / 2` is the
/// same inequality as `theta > 0`.
pub fn two_state_cutoff(g: f64, b: f64, lambda: f64) -> f64 {
    let lb = lambda * b;
    let theta = lb - 2.0 * g + 2.0;
    if theta > 0.0 {
        lb * g / (2.0 * g - 1.0) * theta
    } else {
        0.0
    }
}

/// One row of the per-level solution report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub m: usize,
    pub c: f64,
    pub theta: f64,
    pub x_benchmark: f64,
    pub x_stable: f64,
    pub cutoff_stable: f64,
    pub alpha: f64,
    pub mu: f64,
    pub whataboutism_frequency: f64,
}

pub fn level_records(params: &ModelParams) -> Vec<LevelRecord> {
    let derived = derive(params);
    let bench = solve_benchmark(params);
    let stable = stable_pspe(params);
    let stats = whataboutism_stats(params, &stable);
    stats
        .levels
        .iter()
        .map(|w| {
            let m = w.m;
            LevelRecord {
                m,
                c: derived.c_at(m),
                theta: derived.theta_at(m),
                x_benchmark: bench.abstain[m - 1],
                x_stable: stable.abstain_at(m),
                cutoff_stable: stable.cutoff_at(m),
                alpha: w.alpha,
                mu: w.mu,
                whataboutism_frequency: w.frequency,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Central-difference derivatives with respect to the polarization scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationResponse {
    pub d_abstain: f64,
    pub d_frequency: f64,
    pub abstain_sign: Sign,
    pub frequency_sign: Sign,
}

/// Default relative step for [`polarization_response`].
pub const POLARIZATION_STEP: f64 = 1e-5;

/// Stable abstention fraction `max{0, c theta}` at level `m`.
pub fn stable_abstain(params: &ModelParams, m: usize) -> f64 {
    let theta = params.theta(m);
    if theta > 0.0 {
        params.c(m) * theta
    } else {
        0.0
    }
}

/// Signs of d(stable abstain[m])/dk and d(frequency[m])/dk at `k_polarization`,
/// where `k` scales every `g` and `b`. `h` is relative to `k`.
pub fn polarization_response(
    params: &ModelParams,
    m: usize,
    k_polarization: f64,
    h: f64,
) -> Result<PolarizationResponse, AnalyticError> {
    let step = h * k_polarization;
    let at = |k: f64| {
        params
            .polarized(k)
            .map_err(|source| AnalyticError::ScaleOutOfRange { k, source })
    };
    let hi = at(k_polarization + step)?;
    let lo = at(k_polarization - step)?;
    let d_abstain = (stable_abstain(&hi, m) - stable_abstain(&lo, m)) / (2.0 * step);
    let d_frequency =
        (whataboutism_frequency(&hi, m) - whataboutism_frequency(&lo, m)) / (2.0 * step);
    Ok(PolarizationResponse {
        d_abstain,
        d_frequency,
        abstain_sign: Sign::of(d_abstain),
        frequency_sign: Sign::of(d_frequency),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Camp;

    fn reference() -> ModelParams {
        ModelParams::with_cbar(2.0, vec![1.8, 1.2], vec![1.1, 1.9]).unwrap()
    }

    fn close(a: f64, b: f64, rtol: f64) -> bool {
        (a - b).abs() <= rtol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn benchmark_single_level() {
        let p = ModelParams::new(0.25, vec![1.5], vec![1.5]).unwrap();
        let sol = solve_benchmark(&p);
        assert!(close(sol.cutoff[0], 0.28125, 1e-15));
        assert!(close(sol.abstain[0], 0.1875, 1e-15));
        // fixed point of v = lambda b / 2 + v / (2 g)
        let v = sol.cutoff[0];
        assert!((v - (0.5 * 0.25 * 1.5 + 0.5 * v / 1.5)).abs() < 1e-15);
    }

    #[test]
    fn benchmark_vanishes_with_lambda() {
        let p = ModelParams::new(1e-12, vec![1.5], vec![1.5]).unwrap();
        let sol = solve_benchmark(&p);
        assert!(sol.cutoff[0] < 1e-11 && sol.abstain[0] < 1e-11);
    }

    #[test]
    fn benchmark_abstain_is_c() {
        let p = reference();
        let sol = solve_benchmark(&p);
        assert!(close(sol.abstain[1], 0.475 / 1.4, 1e-15));
        assert!(sol.abstain.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn stable_profile_of_reference() {
        let p = reference();
        let prof = pspe_profile(&p, 2).unwrap();
        assert_eq!(prof.abstain[0], 0.0);
        assert!(close(prof.abstain[1], 0.475 / 1.4 * 0.075, 1e-12));
        assert_eq!(prof.abstain[1], prof.cutoff[1] / 1.2);
        assert!(prof.is_pspe);
        // oracle: iterate x -> c2 phi2(x) from 0.5
        let mut x = 0.5;
        for _ in 0..10_000 {
            x = p.c(2) * p.phi(2, x);
        }
        assert!(close(prof.abstain[1], x, 1e-12));
    }

    #[test]
    fn breakdown_profile_and_invalid_threshold() {
        let p = reference();
        let prof = pspe_profile(&p, 3).unwrap();
        assert_eq!(prof.abstain, vec![0.0, 0.0]);
        assert_eq!(prof.mstar, 3);
        assert_eq!(
            pspe_profile(&p, 1),
            Err(AnalyticError::InvalidThreshold {
                mstar: 1,
                min: 2,
                max: 3
            })
        );
        assert!(pspe_profile(&p, 4).is_err());
    }

    #[test]
    fn enumerate_counts() {
        let fam = enumerate_pspe(&reference());
        assert_eq!(fam.profiles.len(), 2);
        assert_eq!(fam.stable().mstar, 2);
        assert_eq!(fam.profiles[1].mstar, 3);

        let all_neg = ModelParams::new(0.1, vec![1.9, 1.8], vec![1.1, 1.2]).unwrap();
        let fam = enumerate_pspe(&all_neg);
        assert_eq!(fam.profiles.len(), 1);
        assert_eq!(fam.stable().mstar, 3);

        let one = ModelParams::new(0.4, vec![1.05], vec![1.5]).unwrap();
        assert!(one.theta(1) > 0.0);
        assert_eq!(enumerate_pspe(&one).profiles.len(), 2);
    }

    #[test]
    fn alpha_limits_and_reference() {
        let p = reference();
        let s = StateId::new(Camp::One, 2);
        let zero = EquilibriumProfile::breakdown(&p);
        assert_eq!(alpha_closed_form(&p, &zero, s), 1.0);
        let full = EquilibriumProfile::from_cutoffs(&p, p.g.clone()).unwrap();
        assert_eq!(alpha_closed_form(&p, &full, s), 0.0);
        let stable = stable_pspe(&p);
        assert!(close(alpha_closed_form(&p, &stable, s), 0.925, 1e-12));
    }

    #[test]
    fn mu_and_target_reference() {
        let p = reference();
        let stable = stable_pspe(&p);
        let (mu, t) = mu_and_target(&p, &stable, StateId::new(Camp::One, 2));
        assert!(close(mu, 0.075, 1e-12));
        assert_eq!(t, StateId::new(Camp::Two, 2));
        let (mu, t) = mu_and_target(&p, &stable, StateId::new(Camp::One, 1));
        assert_eq!(mu, 0.0);
        assert_eq!(t, StateId::new(Camp::Two, 1));
        let zero = EquilibriumProfile::breakdown(&p);
        for s in p.states() {
            let (mu, t) = mu_and_target(&p, &zero, s);
            assert_eq!(mu, 0.0);
            assert_eq!(t, s.mirror());
        }
    }

    #[test]
    fn mu_picks_more_sensitive_target_off_equilibrium() {
        let p = reference();
        // level 2 abstains never, level 1 abstains often: the minimizer for
        // a level-1 state is the level-2 mirror.
        let prof = EquilibriumProfile::from_cutoffs(&p, vec![0.9, 0.0]).unwrap();
        let (mu, t) = mu_and_target(&p, &prof, StateId::new(Camp::Two, 1));
        assert_eq!(mu, 0.0);
        assert_eq!(t, StateId::new(Camp::One, 2));
        assert_eq!(prof.mstar, 3);
    }

    #[test]
    fn frequency_cases() {
        let p = reference();
        assert!(close(whataboutism_frequency(&p, 2), 0.855625, 1e-12));
        assert_eq!(whataboutism_frequency(&p, 1), 1.0);
        let stats = whataboutism_stats(&p, &stable_pspe(&p));
        let a = alpha_closed_form(&p, &stable_pspe(&p), StateId::new(Camp::One, 2));
        assert!(close(stats.levels[1].frequency, a * a, 1e-15));
        assert!(close(stats.levels[1].frequency, 0.855625, 1e-12));
        assert_eq!(stats.levels[0].frequency, 1.0);
        let near_one = ModelParams::new(0.49, vec![1.000_001], vec![1.999]).unwrap();
        assert!(whataboutism_frequency(&near_one, 1) < 0.26);
    }

    #[test]
    fn two_state_example() {
        let v = two_state_cutoff(1.2, 1.9, 0.25);
        assert!(close(v, 0.57 / 1.4 * 0.075, 1e-12));
        let p = reference();
        assert!(close(v, stable_pspe(&p).cutoff_at(2), 1e-12));
        // root of v - v/(2g) - lambda b / 2 * (v + b lambda v) / (v + b lambda g)
        let (g, b, l) = (1.2, 1.9, 0.25);
        let f = |v: f64| v - v / (2.0 * g) - 0.5 * l * b * (v + b * l * v) / (v + b * l * g);
        assert!(f(v).abs() < 1e-15);
        assert_eq!(two_state_cutoff(1.1875, 1.5, 0.25), 0.0);
        assert_eq!(two_state_cutoff(1.9, 1.1, 0.25), 0.0);
    }

    #[test]
    fn polarization_reference() {
        let p = reference();
        let r = polarization_response(&p, 2, 1.0, POLARIZATION_STEP).unwrap();
        assert_eq!(r.abstain_sign, Sign::Negative);
        assert_eq!(r.frequency_sign, Sign::Positive);
        let r1 = polarization_response(&p, 1, 1.0, POLARIZATION_STEP).unwrap();
        assert_eq!(
            (r1.abstain_sign, r1.frequency_sign),
            (Sign::Zero, Sign::Zero)
        );
        let scaled = p.polarized(1.01).unwrap();
        assert!(close(stable_abstain(&scaled, 2), 0.018782, 1e-4));
        assert!(close(stable_pspe(&scaled).abstain_at(2), 0.018782, 1e-4));
    }

    #[test]
    fn polarization_out_of_range() {
        let p = reference();
        // 1.8 * 1.2 > 2
        assert!(matches!(
            polarization_response(&p, 2, 1.2, POLARIZATION_STEP),
            Err(AnalyticError::ScaleOutOfRange { .. })
        ));
    }

    #[test]
    fn level_records_reference() {
        let rows = level_records(&reference());
        assert_eq!(rows.len(), 2);
        let r = &rows[1];
        assert!(close(r.x_benchmark, 0.339_285_714_285_714_3, 1e-12));
        assert!(close(r.x_stable, 0.025_446_428_571_428_57, 1e-12));
        assert!(close(r.whataboutism_frequency, 0.855625, 1e-12));
        assert!(close(r.mu, 0.075, 1e-12));
    }

    #[test]
    fn from_cutoffs_rejects_bad_input() {
        let p = reference();
        assert!(EquilibriumProfile::from_cutoffs(&p, vec![0.1]).is_err());
        assert!(EquilibriumProfile::from_cutoffs(&p, vec![-0.1, 0.0]).is_err());
        assert!(EquilibriumProfile::from_cutoffs(&p, vec![0.0, 1.3]).is_err());
    }

    #[test]
    fn check_against_detects_tampering() {
        let p = reference();
        let mut prof = stable_pspe(&p);
        assert!(prof.check_against(&p).is_ok());
        prof.abstain[1] += 1e-9;
        assert!(prof.check_against(&p).is_err());
    }
}
