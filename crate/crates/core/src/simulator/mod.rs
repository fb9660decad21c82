//! Monte-Carlo contextual bandit environment and baseline algorithms.
//!
//! Rewards are Gaussian with mean `f(x, a)` and unit variance; contexts are
//! drawn i.i.d. from the instance's context distribution. The recorded curve
//! is the pseudo-regret (gap-weighted play counts), which is what all the
//! complexity bounds reference; realized reward sums are kept for debugging.
//!
//! Runs are deterministic given (instance, config, seed): randomness comes
//! from a counter-based generator with per-run substreams, so sweeps over
//! seeds parallelize without sharing state and reproduce bit-identically.

mod algorithms;

pub use algorithms::{AlgorithmConfig, CTrackingConfig, EttConfig, TrackScope};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{compute_gaps, validate_instance, BanditInstance, RepresentationSet};
use crate::par;

/// A bandit environment: an instance plus the seed of its noise stream.
#[derive(Debug, Clone)]
pub struct Environment {
    pub instance: BanditInstance,
    pub seed: u64,
}

/// Sub-stream identifiers for the per-run generators.
const STREAM_ENV: u64 = 0;
const STREAM_ALGO: u64 = 1;

/// Pseudo-regret trajectory of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub algorithm_id: String,
    pub seed: u64,
    pub checkpoints: Vec<u64>,
    pub cumulative_regret: Vec<f64>,
    pub regret_over_log_t: Vec<f64>,
    /// Play counts per pair (lexicographic) at each checkpoint.
    pub plays: Vec<Vec<u64>>,
    /// Realized (noisy) reward total at the horizon.
    pub realized_reward: f64,
    /// Representation eliminations as (name, time), for elimination-style
    /// algorithms.
    pub eliminations: Vec<(String, u64)>,
    /// Time at which a single active representation remained.
    pub elimination_time: Option<u64>,
    /// Set when the algorithm had to fall back to the tabular baseline.
    pub fallback: bool,
}

/// Gaussian log-likelihood-ratio divergence between two reward tables at one
/// pair: `(f(x,a) - f'(x,a))^2 / 2`.
pub fn kl_gaussian(f: &DMatrix<f64>, f_prime: &DMatrix<f64>, x: usize, a: usize) -> f64 {
    let d = f[(x, a)] - f_prime[(x, a)];
    0.5 * d * d
}

fn sample_context(rho: &nalgebra::DVector<f64>, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (x, &p) in rho.iter().enumerate() {
        acc += p;
        if u < acc {
            return x;
        }
    }
    rho.len() - 1
}

/// Runs one algorithm for `horizon` steps, recording the pseudo-regret at the
/// given checkpoints (deduplicated, sorted, capped at the horizon; the
/// horizon itself is always included).
pub fn run(
    env: &Environment,
    reps: &RepresentationSet,
    config: &AlgorithmConfig,
    horizon: u64,
    checkpoints: &[u64],
) -> Result<RegretCurve> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be >= 1".to_string()));
    }
    let report = validate_instance(&env.instance);
    if !report.ok() {
        return Err(Error::InvalidInstance(report.violations.join("; ")));
    }
    let gaps = compute_gaps(&env.instance)?;
    let mut marks: Vec<u64> = checkpoints
        .iter()
        .cloned()
        .filter(|&t| t >= 1 && t <= horizon)
        .chain(std::iter::once(horizon))
        .collect();
    marks.sort_unstable();
    marks.dedup();
    let mut env_rng = ChaCha8Rng::seed_from_u64(env.seed);
    env_rng.set_stream(STREAM_ENV);
    let mut algo_rng = ChaCha8Rng::seed_from_u64(env.seed);
    algo_rng.set_stream(STREAM_ALGO);
    let mut state = algorithms::AlgorithmState::new(config, &env.instance, reps, &gaps)?;
    let num_arms = env.instance.num_arms;
    let mut plays = vec![0u64; env.instance.num_pairs()];
    let mut regret = 0.0;
    let mut realized = 0.0;
    let mut curve = RegretCurve {
        algorithm_id: config.id(),
        seed: env.seed,
        checkpoints: Vec::with_capacity(marks.len()),
        cumulative_regret: Vec::with_capacity(marks.len()),
        regret_over_log_t: Vec::with_capacity(marks.len()),
        plays: Vec::with_capacity(marks.len()),
        realized_reward: 0.0,
        eliminations: Vec::new(),
        elimination_time: None,
        fallback: false,
    };
    let mut next_mark = 0usize;
    for t in 1..=horizon {
        let x = sample_context(&env.instance.rho, &mut env_rng);
        let a = state.select(x, t, &mut algo_rng);
        debug_assert!(a < num_arms);
        let noise: f64 = env_rng.sample(StandardNormal);
        let reward = env.instance.rewards[(x, a)] + noise;
        state.update(x, a, reward, t);
        plays[x * num_arms + a] += 1;
        regret += gaps.gap(x, a);
        realized += reward;
        if next_mark < marks.len() && t == marks[next_mark] {
            curve.checkpoints.push(t);
            curve.cumulative_regret.push(regret);
            let log_t = (t as f64).ln();
            curve
                .regret_over_log_t
                .push(if log_t > 0.0 { regret / log_t } else { 0.0 });
            curve.plays.push(plays.clone());
            next_mark += 1;
        }
    }
    curve.realized_reward = realized;
    curve.eliminations = state.eliminations();
    curve.elimination_time = state.single_active_time();
    curve.fallback = state.fell_back();
    Ok(curve)
}

/// Runs one configuration over many seeds. Seeds fan out in parallel with no
/// shared state; the output preserves seed order, so sweeps are bit-identical
/// under sequential and parallel builds.
pub fn sweep(
    instance: &BanditInstance,
    reps: &RepresentationSet,
    config: &AlgorithmConfig,
    horizon: u64,
    checkpoints: &[u64],
    seeds: &[u64],
) -> Result<Vec<RegretCurve>> {
    let curves = par::map_slice(seeds, |&seed| {
        let env = Environment {
            instance: instance.clone(),
            seed,
        };
        run(&env, reps, config, horizon, checkpoints)
    });
    curves.into_iter().collect()
}

/// Logarithmically spaced checkpoints up to the horizon.
pub fn default_checkpoints(horizon: u64, count: usize) -> Vec<u64> {
    let count = count.max(2);
    let mut marks: Vec<u64> = (0..count)
        .map(|i| {
            let frac = i as f64 / (count as f64 - 1.0);
            ((horizon as f64).powf(frac)).round().max(1.0) as u64
        })
        .collect();
    marks.sort_unstable();
    marks.dedup();
    marks
}
