//! Seeded Monte Carlo run of the fork-join service.
//!
//! Each trial draws an access outcome, counts the `k` nonempty nodes it
//! reached, and (if `k ≥ α`) records the `α`-th smallest of `k` exponential
//! waits. Trials are grouped by `k` and the service rate is estimated per
//! stratum as `1 / mean time`, weighted by the empirical stratum frequency.
//! Inverting a grand mean instead would estimate `1/E[T]` over the mixture,
//! which is not `Σ_k P(k)/E[T | k]`.
//!
//! Trial `i` always uses the ChaCha8 stream `i` under the run seed, and
//! trials are reduced in fixed chunks merged in chunk order, so the result
//! is a pure function of `(config, trials, seed)`.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytic::{access_pmf, service_rate};
use crate::error::{Error, Result};
use crate::model::{AccessModel, Allocation, SystemConfig};
use crate::rational::{to_f64, Rational};

/// Default minimum observations before a stratum's mean is trusted.
pub const DEFAULT_MIN_STRATUM_COUNT: u64 = 100;

/// Trials per reduction chunk. Fixed so the floating-point merge order does
/// not depend on the worker count.
const CHUNK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationOptions {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub min_stratum_count: u64,
}

impl SimulationOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            workers: None,
            min_stratum_count: DEFAULT_MIN_STRATUM_COUNT,
        }
    }
}

/// Sample statistics of the recorded service times in one `k` stratum, in
/// units of time (so `1/μ` is the mean of a single wait).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratumStats {
    pub mean: f64,
    /// Sample standard deviation; `None` with fewer than two samples.
    pub sd: Option<f64>,
    pub count: u64,
}

impl StratumStats {
    pub fn standard_error(&self) -> Option<f64> {
        self.sd.map(|sd| sd / (self.count as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationEstimate {
    pub trials: u64,
    pub alpha: u32,
    /// Observed count for every `k` in `0..=k_max`, failures included.
    pub k_histogram: BTreeMap<u32, u64>,
    /// Only strata with `k ≥ α` and at least one observation.
    pub per_k_mean_time: BTreeMap<u32, StratumStats>,
    pub combined_rate: f64,
    /// Exact `μ_s(α)` for comparison.
    pub analytic_reference: Option<Rational>,
    /// Strata with `k ≥ α` and positive probability that were observed fewer
    /// than `min_stratum_count` times.
    pub flagged_strata: Vec<u32>,
    pub min_stratum_count: u64,
}

impl SimulationEstimate {
    /// `|combined − exact| / exact`, when the exact rate is nonzero.
    pub fn relative_error(&self) -> Option<f64> {
        let exact = to_f64(self.analytic_reference.as_ref()?);
        (exact != 0.0).then(|| (self.combined_rate - exact).abs() / exact)
    }
}

/// The random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform draw on the open interval `(0, 1)`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential variate with the given rate by inverse CDF.
pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    -open_unit(rng).ln() / rate
}

/// `α`-th smallest of `k` i.i.d. exponential(`mu`) waits: all `k` are drawn
/// and the later completions are discarded.
pub fn sample_kth_order_statistic<R: Rng + ?Sized>(
    k: u32,
    alpha: u32,
    mu: f64,
    rng: &mut R,
) -> f64 {
    assert!(alpha >= 1 && alpha <= k, "need 1 <= alpha <= k");
    let mut waits: Vec<f64> = (0..k).map(|_| sample_exponential(mu, rng)).collect();
    let (_, nth, _) = waits.select_nth_unstable_by(alpha as usize - 1, f64::total_cmp);
    *nth
}

/// Same distribution as [`sample_kth_order_statistic`] via memorylessness:
/// the gap before the `i`-th completion is exponential with rate
/// `(k − i + 1)·μ`. Never draws the waits after the `α`-th.
pub fn sample_kth_order_statistic_incremental<R: Rng + ?Sized>(
    k: u32,
    alpha: u32,
    mu: f64,
    rng: &mut R,
) -> f64 {
    assert!(alpha >= 1 && alpha <= k, "need 1 <= alpha <= k");
    (1..=alpha)
        .map(|i| sample_exponential((k - i + 1) as f64 * mu, rng))
        .sum()
}

/// Bernoulli draw with an exact rational probability when it fits in `u64`.
#[derive(Debug, Clone, Copy)]
enum Coin {
    Exact { hits: u64, out_of: u64 },
    Float(f64),
}

impl Coin {
    fn new(prob: &Rational) -> Self {
        match (prob.numer().to_u64(), prob.denom().to_u64()) {
            (Some(hits), Some(out_of)) => Coin::Exact { hits, out_of },
            _ => Coin::Float(to_f64(prob)),
        }
    }

    fn flip<R: Rng + ?Sized>(self, rng: &mut R) -> bool {
        match self {
            Coin::Exact { hits, out_of } => rng.random_range(0..out_of) < hits,
            Coin::Float(p) => rng.random_bool(p),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Sampler {
    Fixed { n: usize, r: usize },
    Probabilistic { coin: Coin },
}

struct TrialPlan {
    sampler: Sampler,
    alpha: u32,
    beta: u32,
    mu: f64,
    k_max: u32,
}

impl TrialPlan {
    /// Number of nonempty nodes reached, and the service time if served.
    fn run(&self, rng: &mut ChaCha8Rng) -> (u32, Option<f64>) {
        let k = match self.sampler {
            Sampler::Fixed { n, r } => rand::seq::index::sample(rng, n, r)
                .iter()
                .filter(|&i| i < self.beta as usize)
                .count() as u32,
            Sampler::Probabilistic { coin } => {
                (0..self.beta).filter(|_| coin.flip(rng)).count() as u32
            }
        };
        let time =
            (k >= self.alpha).then(|| sample_kth_order_statistic(k, self.alpha, self.mu, rng));
        (k, time)
    }
}

/// Running mean and sum of squared deviations (Welford / Chan).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }
}

#[derive(Debug, Clone)]
struct Tally {
    hist: Vec<u64>,
    times: Vec<Moments>,
}

impl Tally {
    fn new(k_max: u32) -> Self {
        Self {
            hist: vec![0; k_max as usize + 1],
            times: vec![Moments::default(); k_max as usize + 1],
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        for (a, b) in self.times.iter_mut().zip(&other.times) {
            a.merge(b);
        }
    }
}

fn run_chunk(plan: &TrialPlan, seed: u64, start: u64, end: u64) -> Tally {
    let mut tally = Tally::new(plan.k_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in start..end {
        rng.set_stream(trial);
        rng.set_word_pos(0);
        let (k, time) = plan.run(&mut rng);
        tally.hist[k as usize] += 1;
        if let Some(t) = time {
            tally.times[k as usize].push(t);
        }
    }
    tally
}

/// Simulates `trials` requests with default options.
pub fn simulate(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
    trials: u64,
    seed: u64,
) -> Result<SimulationEstimate> {
    simulate_with(cfg, access, alloc, &SimulationOptions::new(trials, seed))
}

pub fn simulate_with(
    cfg: &SystemConfig,
    access: &AccessModel,
    alloc: &Allocation,
    opts: &SimulationOptions,
) -> Result<SimulationEstimate> {
    if opts.trials == 0 {
        return Err(Error::NoTrials);
    }
    Allocation::new(cfg, access, alloc.alpha())?;

    let (sampler, k_max) = match access {
        AccessModel::FixedSize { r } => (
            Sampler::Fixed {
                n: cfg.n_nodes() as usize,
                r: *r as usize,
            },
            alloc.beta().min(*r),
        ),
        AccessModel::Probabilistic { p } => (
            Sampler::Probabilistic {
                coin: Coin::new(&(Rational::from_integer(1.into()) - p)),
            },
            alloc.beta(),
        ),
    };
    let plan = TrialPlan {
        sampler,
        alpha: alloc.alpha(),
        beta: alloc.beta(),
        mu: to_f64(cfg.node_rate()),
        k_max,
    };

    let chunks: Vec<(u64, u64)> = (0..opts.trials.div_ceil(CHUNK_TRIALS))
        .map(|c| (c * CHUNK_TRIALS, ((c + 1) * CHUNK_TRIALS).min(opts.trials)))
        .collect();
    let work = || -> Vec<Tally> {
        chunks
            .par_iter()
            .map(|&(start, end)| run_chunk(&plan, opts.seed, start, end))
            .collect()
    };
    let partials = match opts.workers {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };
    let mut tally = Tally::new(k_max);
    for part in &partials {
        tally.merge(part);
    }

    let alpha = alloc.alpha();
    let k_histogram: BTreeMap<u32, u64> = tally
        .hist
        .iter()
        .enumerate()
        .map(|(k, &c)| (k as u32, c))
        .collect();
    let per_k_mean_time: BTreeMap<u32, StratumStats> = tally
        .times
        .iter()
        .enumerate()
        .filter(|(k, m)| *k as u32 >= alpha && m.count > 0)
        .map(|(k, m)| {
            let sd = (m.count >= 2).then(|| (m.m2 / (m.count - 1) as f64).sqrt());
            (
                k as u32,
                StratumStats {
                    mean: m.mean,
                    sd,
                    count: m.count,
                },
            )
        })
        .collect();
    let combined_rate = per_k_mean_time
        .values()
        .map(|s| (s.count as f64 / opts.trials as f64) / s.mean)
        .sum();

    let mut flagged_strata = Vec::new();
    for k in alpha..=k_max {
        let count = k_histogram[&k];
        if count < opts.min_stratum_count && !access_pmf(cfg, access, alloc, k as i64)?.is_zero() {
            flagged_strata.push(k);
        }
    }

    Ok(SimulationEstimate {
        trials: opts.trials,
        alpha,
        k_histogram,
        per_k_mean_time,
        combined_rate,
        analytic_reference: Some(service_rate(cfg, access, alloc)?.value),
        flagged_strata,
        min_stratum_count: opts.min_stratum_count,
    })
}

/// Pearson goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-squared test of observed counts against exact cell
/// probabilities. Adjacent cells are pooled until each pooled cell expects at
/// least five observations. Any observation in a zero-probability cell gives
/// `p = 0`.
pub fn chi_squared_gof(observed: &[u64], probs: &[Rational]) -> ChiSquaredTest {
    assert_eq!(observed.len(), probs.len(), "one probability per cell");
    let total: u64 = observed.iter().sum();
    if observed
        .iter()
        .zip(probs)
        .any(|(&o, p)| o > 0 && p.is_zero())
    {
        return ChiSquaredTest {
            statistic: f64::INFINITY,
            dof: 0,
            p_value: 0.0,
        };
    }

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut current = (0.0, 0.0);
    for (&o, p) in observed.iter().zip(probs) {
        if p.is_zero() {
            continue;
        }
        current.0 += o as f64;
        current.1 += to_f64(p) * total as f64;
        if current.1 >= 5.0 {
            pooled.push(current);
            current = (0.0, 0.0);
        }
    }
    if current.1 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += current.0;
                last.1 += current.1;
            }
            None => pooled.push(current),
        }
    }

    let statistic = pooled.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive dof")
            .sf(statistic)
    };
    ChiSquaredTest {
        statistic,
        dof,
        p_value,
    }
}
