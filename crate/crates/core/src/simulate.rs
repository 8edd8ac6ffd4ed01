//! Monte Carlo play of the sequential game under a fixed cutoff profile.
//!
//! Every estimator draws one independent ChaCha8 substream per sampling
//! unit (an episode, a pair of episodes, or a successor draw plus its
//! rebuttal), keyed by the unit's index. Aggregation is a sum of integer
//! counts, so reports are bit-identical for any number of workers.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{alpha_closed_form, mu_and_target, EquilibriumProfile};
use crate::model::{Camp, ModelParams, StateId};

/// Hard limit on moves per episode.
pub const SAFETY_CAP: u64 = 1_000_000_000;

/// Smallest sample size accepted by the estimators.
pub const MIN_EPISODES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("episode in {state} exceeded {cap} moves")]
    SafetyCapExceeded { state: StateId, cap: u64 },
    #[error("level m={m} is below the breakdown threshold mstar={mstar}; there is no interior marginal agent")]
    NotInterior { m: usize, mstar: usize },
    #[error("{n} episodes requested, at least {min} required")]
    TooFewEpisodes { n: u64, min: u64 },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminator {
    Same,
    Rival,
}

/// One simulated play path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub state: StateId,
    pub stage1_offended: bool,
    pub length: u64,
    pub terminator_camp: Terminator,
    pub own_camp_all_supported: bool,
}

impl EpisodeRecord {
    /// The path can back a rebuttal against the first mover's camp.
    pub fn supports_rebuttal(&self) -> bool {
        self.stage1_offended && self.own_camp_all_supported
    }
}

/// Plays one episode in `state`.
///
/// The first mover offends iff `v >= v*[m]` with `v ~ U[0, g[m]]`. Each
/// later mover is a rival with probability 1/2 (condemning with probability
/// `lambda b[m]`) and otherwise a fresh same-camp agent who condemns iff
/// `v < v*[m]`. The first condemnation ends the episode.
pub fn run_episode<R: Rng + ?Sized>(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    rng: &mut R,
) -> Result<EpisodeRecord, SimError> {
    let m = state.m;
    let g = params.g_at(m);
    let lb = params.lambda_b(m);
    let cutoff = profile.cutoff_at(m);

    if g * rng.random::<f64>() < cutoff {
        return Ok(EpisodeRecord {
            state,
            stage1_offended: false,
            length: 1,
            terminator_camp: Terminator::Same,
            own_camp_all_supported: false,
        });
    }
    let mut length = 1u64;
    loop {
        length += 1;
        if length > SAFETY_CAP {
            return Err(SimError::SafetyCapExceeded {
                state,
                cap: SAFETY_CAP,
            });
        }
        let rival_moves = rng.random_bool(0.5);
        let u = rng.random::<f64>();
        let condemned = if rival_moves { u < lb } else { g * u < cutoff };
        if condemned {
            let terminator_camp = if rival_moves {
                Terminator::Rival
            } else {
                Terminator::Same
            };
            return Ok(EpisodeRecord {
                state,
                stage1_offended: true,
                length,
                terminator_camp,
                own_camp_all_supported: rival_moves,
            });
        }
    }
}

/// Draws a rebuttal for external condemnation in `state`: pick the target
/// state and replay one path there. Succeeds iff the target's first mover
/// offended and no one from that camp condemned.
pub fn sample_rebuttal<R: Rng + ?Sized>(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    rng: &mut R,
) -> Result<bool, SimError> {
    let (_, target) = mu_and_target(params, profile, state);
    Ok(run_episode(params, profile, target, rng)?.supports_rebuttal())
}

/// Sampling configuration shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_episodes: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(n_episodes: u64, seed: u64) -> Result<Self, SimError> {
        if n_episodes < MIN_EPISODES {
            return Err(SimError::TooFewEpisodes {
                n: n_episodes,
                min: MIN_EPISODES,
            });
        }
        Ok(SimConfig {
            n_episodes,
            seed,
            workers: None,
        })
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateId>,
    pub m: usize,
    pub n_episodes: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: f64,
    /// `None` when the standard error is zero and the estimate misses.
    pub z_score: Option<f64>,
}

impl EstimateReport {
    fn from_fraction(
        quantity: &str,
        state: Option<StateId>,
        m: usize,
        hits: u64,
        n: u64,
        analytic: f64,
    ) -> Self {
        let p = hits as f64 / n as f64;
        Self::build(quantity, state, m, n, p, binomial_se(p, n), analytic)
    }

    fn build(
        quantity: &str,
        state: Option<StateId>,
        m: usize,
        n: u64,
        estimate: f64,
        std_error: f64,
        analytic: f64,
    ) -> Self {
        let z_score = if std_error > 0.0 {
            Some((estimate - analytic) / std_error)
        } else if (estimate - analytic).abs() <= 1e-12 {
            Some(0.0)
        } else {
            None
        };
        EstimateReport {
            quantity: quantity.to_string(),
            state,
            m,
            n_episodes: n,
            estimate,
            std_error,
            analytic,
            z_score,
        }
    }

    /// `|z| <= threshold`.
    pub fn passes(&self, threshold: f64) -> bool {
        self.z_score.is_some_and(|z| z.abs() <= threshold)
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one estimator, so different estimators and states sharing a
/// master seed do not reuse substreams.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ p))
}

/// Substream `index` of the generator keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const TAG_ALPHA: u64 = 1;
const TAG_REBUTTAL: u64 = 2;
const TAG_PAIRS: u64 = 3;
const TAG_PAYOFF: u64 = 4;
const TAG_EPISODES: u64 = 5;

fn state_key(state: StateId) -> u64 {
    ((state.camp.number() as u64) << 32) | state.m as u64
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, SimError> {
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| SimError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Sums two counters over `n` independent units.
fn tally<F>(n: u64, seed: u64, workers: Option<usize>, unit: F) -> Result<[u64; 2], SimError>
where
    F: Fn(&mut ChaCha8Rng) -> Result<[u64; 2], SimError> + Sync,
{
    in_pool(workers, || {
        (0..n)
            .into_par_iter()
            .map(|i| unit(&mut substream(seed, i)))
            .try_reduce(|| [0, 0], |a, b| Ok([a[0] + b[0], a[1] + b[1]]))
    })?
}

/// Plays `cfg.n_episodes` episodes in `state`, returned in index order.
pub fn run_episodes(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    cfg: &SimConfig,
) -> Result<Vec<EpisodeRecord>, SimError> {
    let seed = derive_seed(cfg.seed, &[TAG_EPISODES, state_key(state)]);
    in_pool(cfg.workers, || {
        (0..cfg.n_episodes)
            .into_par_iter()
            .map(|i| run_episode(params, profile, state, &mut substream(seed, i)))
            .collect()
    })?
}

/// Writes episodes as CSV with a leading index column.
pub fn write_episodes_csv<W: io::Write>(episodes: &[EpisodeRecord], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "episode_index",
        "camp",
        "m",
        "stage1_offended",
        "length",
        "terminator",
        "all_supported",
    ])?;
    for (i, e) in episodes.iter().enumerate() {
        out.write_record([
            i.to_string(),
            e.state.camp.to_string(),
            e.state.m.to_string(),
            e.stage1_offended.to_string(),
            e.length.to_string(),
            match e.terminator_camp {
                Terminator::Same => "same".to_string(),
                Terminator::Rival => "rival".to_string(),
            },
            e.own_camp_all_supported.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Fraction of episodes in `state` ended by the rival camp, against the
/// closed-form alpha.
pub fn estimate_alpha(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    cfg: &SimConfig,
) -> Result<EstimateReport, SimError> {
    let seed = derive_seed(cfg.seed, &[TAG_ALPHA, state_key(state)]);
    let [rival, _] = tally(cfg.n_episodes, seed, cfg.workers, |rng| {
        let e = run_episode(params, profile, state, rng)?;
        Ok([(e.terminator_camp == Terminator::Rival) as u64, 0])
    })?;
    Ok(EstimateReport::from_fraction(
        "alpha",
        Some(state),
        state.m,
        rival,
        cfg.n_episodes,
        alpha_closed_form(params, profile, state),
    ))
}

/// Failure rate of sampled rebuttals in `state`, against `mu`.
pub fn estimate_rebuttal_failure(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    cfg: &SimConfig,
) -> Result<EstimateReport, SimError> {
    let seed = derive_seed(cfg.seed, &[TAG_REBUTTAL, state_key(state)]);
    let [failures, _] = tally(cfg.n_episodes, seed, cfg.workers, |rng| {
        Ok([(!sample_rebuttal(params, profile, state, rng)?) as u64, 0])
    })?;
    Ok(EstimateReport::from_fraction(
        "rebuttal_failure",
        Some(state),
        state.m,
        failures,
        cfg.n_episodes,
        mu_and_target(params, profile, state).0,
    ))
}

/// Fraction of mirror-state episode pairs in which both first movers
/// offended and were condemned only by the rival camp. The analytic value
/// is the product of the two alphas, which at the stable PSPE equals
/// `min{1, (1 - theta[m])^2}`.
pub fn estimate_whataboutism_frequency(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    m: usize,
    cfg: &SimConfig,
) -> Result<EstimateReport, SimError> {
    let first = StateId::new(Camp::One, m);
    let second = first.mirror();
    let seed = derive_seed(cfg.seed, &[TAG_PAIRS, m as u64]);
    let [both, _] = tally(cfg.n_episodes, seed, cfg.workers, |rng| {
        let a = run_episode(params, profile, first, rng)?;
        let b = run_episode(params, profile, second, rng)?;
        let hit = |e: &EpisodeRecord| e.stage1_offended && e.terminator_camp == Terminator::Rival;
        Ok([(hit(&a) && hit(&b)) as u64, 0])
    })?;
    let analytic =
        alpha_closed_form(params, profile, first) * alpha_closed_form(params, profile, second);
    Ok(EstimateReport::from_fraction(
        "whataboutism_frequency",
        None,
        m,
        both,
        cfg.n_episodes,
        analytic,
    ))
}

/// Closed-form expected payoff of playing `a = 1` with value `v` in `state`:
/// `v - x/2 - lambda b mu / 2`.
pub fn payoff_closed_form(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    v: f64,
) -> f64 {
    let m = state.m;
    let mu = mu_and_target(params, profile, state).0;
    v - 0.5 * profile.abstain_at(m) - 0.5 * params.lambda_b(m) * mu
}

/// Monte Carlo payoff of playing `a = 1` with value `v`.
///
/// Each unit draws the immediate successor (camp and action) and, when a
/// rival condemns, one rebuttal attempt. The unit loses 1 if the successor
/// is same-camp and condemns, or is a rival who condemns and the rebuttal
/// fails; the estimate is `v` minus the loss frequency.
pub fn estimate_payoff(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    v: f64,
    cfg: &SimConfig,
) -> Result<EstimateReport, SimError> {
    let m = state.m;
    let g = params.g_at(m);
    let lb = params.lambda_b(m);
    let cutoff = profile.cutoff_at(m);
    let seed = derive_seed(cfg.seed, &[TAG_PAYOFF, state_key(state), v.to_bits()]);
    let [internal, external] = tally(cfg.n_episodes, seed, cfg.workers, |rng| {
        let rival_moves = rng.random_bool(0.5);
        let u = rng.random::<f64>();
        if rival_moves {
            if u < lb && !sample_rebuttal(params, profile, state, rng)? {
                return Ok([0, 1]);
            }
        } else if g * u < cutoff {
            return Ok([1, 0]);
        }
        Ok([0, 0])
    })?;
    let n = cfg.n_episodes;
    let loss = (internal + external) as f64 / n as f64;
    Ok(EstimateReport::build(
        "payoff",
        Some(state),
        m,
        n,
        v - loss,
        binomial_se(loss, n),
        payoff_closed_form(params, profile, state, v),
    ))
}

/// Payoff of the agent exactly at the cutoff; indifference puts it at 0.
pub fn estimate_marginal_payoff(
    params: &ModelParams,
    profile: &EquilibriumProfile,
    state: StateId,
    cfg: &SimConfig,
) -> Result<EstimateReport, SimError> {
    if state.m < profile.mstar {
        return Err(SimError::NotInterior {
            m: state.m,
            mstar: profile.mstar,
        });
    }
    let mut report = estimate_payoff(params, profile, state, profile.cutoff_at(state.m), cfg)?;
    report.quantity = "marginal_payoff".into();
    Ok(report)
}
