//! Monte Carlo timing of repeat-until-success heralded entanglement.
//!
//! Photons are sent one per attempt period until one is detected, so the
//! number of attempts per spin pair is geometric in the per-attempt success
//! probability `η × detector_efficiency`. A linear cluster is built in two
//! stages: disjoint neighbouring pairs in parallel, then parallel links
//! between one spin of each adjacent pair.
//!
//! Randomness is ChaCha8 seeded from `(seed, trial index)`: the seed fixes
//! the key and the trial index selects the stream, so trials are independent,
//! reproducible and can be evaluated in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the generator behind [`trial_rng`].
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), key from seed, stream = trial index";

pub const DEFAULT_ATTEMPT_PERIOD_NS: f64 = 1.0;
pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000;
pub const DEFAULT_COHERENCE_TIME_US: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeraldError {
    #[error("invalid herald parameter `{name}` = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("a cluster needs at least two spins, got {0}")]
    TooFewSpins(usize),
    #[error("trial count must be positive")]
    NoTrials,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeraldConfig {
    pub attempt_period_ns: f64,
    /// Probability that one attempt heralds entanglement, before detection
    /// losses (the protocol efficiency η).
    pub success_probability: f64,
    pub detector_efficiency: f64,
    pub coherence_time_us: f64,
    pub n_spins: usize,
    pub max_attempts: u64,
    pub seed: u64,
}

impl HeraldConfig {
    pub fn new(success_probability: f64, seed: u64) -> Self {
        Self {
            attempt_period_ns: DEFAULT_ATTEMPT_PERIOD_NS,
            success_probability,
            detector_efficiency: 1.0,
            coherence_time_us: DEFAULT_COHERENCE_TIME_US,
            n_spins: 2,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), HeraldError> {
        let check = |name, value: f64, ok: bool, requirement| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(HeraldError::InvalidParameter {
                    name,
                    value,
                    requirement,
                })
            }
        };
        let p = self.success_probability;
        check(
            "success_probability",
            p,
            p > 0.0 && p <= 1.0,
            "must lie in (0, 1]",
        )?;
        let d = self.detector_efficiency;
        check(
            "detector_efficiency",
            d,
            (0.0..=1.0).contains(&d),
            "must lie in [0, 1]",
        )?;
        check(
            "attempt_period_ns",
            self.attempt_period_ns,
            self.attempt_period_ns > 0.0,
            "must be > 0",
        )?;
        check(
            "coherence_time_us",
            self.coherence_time_us,
            self.coherence_time_us > 0.0,
            "must be > 0",
        )?;
        check(
            "max_attempts",
            self.max_attempts as f64,
            self.max_attempts >= 1,
            "must be >= 1",
        )?;
        Ok(())
    }

    /// Per-attempt probability that a photon is detected and heralds.
    pub fn effective_probability(&self) -> f64 {
        self.success_probability * self.detector_efficiency
    }

    pub fn coherence_time_ns(&self) -> f64 {
        self.coherence_time_us * 1e3
    }
}

/// Mean number of attempts to the first success, `1/p`.
pub fn expected_attempts(p: f64) -> Result<f64, HeraldError> {
    if p.is_finite() && p > 0.0 && p <= 1.0 {
        Ok(p.recip())
    } else {
        Err(HeraldError::InvalidParameter {
            name: "p",
            value: p,
            requirement: "must lie in (0, 1]",
        })
    }
}

/// Independent generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PairOutcome {
    Heralded {
        attempts: u64,
        time_ns: f64,
    },
    /// No detection within `max_attempts`.
    Failed {
        attempts: u64,
        time_ns: f64,
    },
}

impl PairOutcome {
    pub fn attempts(&self) -> u64 {
        match *self {
            PairOutcome::Heralded { attempts, .. } | PairOutcome::Failed { attempts, .. } => {
                attempts
            }
        }
    }

    pub fn time_ns(&self) -> f64 {
        match *self {
            PairOutcome::Heralded { time_ns, .. } | PairOutcome::Failed { time_ns, .. } => time_ns,
        }
    }

    pub fn is_heralded(&self) -> bool {
        matches!(self, PairOutcome::Heralded { .. })
    }
}

/// Attempts until one spin pair is heralded. Assumes a validated config.
pub fn simulate_pair<R: Rng + ?Sized>(cfg: &HeraldConfig, rng: &mut R) -> PairOutcome {
    let p = cfg.effective_probability();
    let failed = PairOutcome::Failed {
        attempts: cfg.max_attempts,
        time_ns: cfg.max_attempts as f64 * cfg.attempt_period_ns,
    };
    if p <= 0.0 {
        return failed;
    }
    let failures = match Geometric::new(p) {
        Ok(dist) => dist.sample(rng),
        Err(_) => return failed,
    };
    let attempts = failures.saturating_add(1);
    if attempts > cfg.max_attempts {
        return failed;
    }
    PairOutcome::Heralded {
        attempts,
        time_ns: attempts as f64 * cfg.attempt_period_ns,
    }
}

/// Pairs entangled in each stage of a linear cluster of `n` spins:
/// `(0,1), (2,3), …` first, then `(1,2), (3,4), …`.
pub fn linear_cluster_schedule(n_spins: usize) -> Vec<Vec<(usize, usize)>> {
    let first: Vec<_> = (0..n_spins / 2).map(|k| (2 * k, 2 * k + 1)).collect();
    let second: Vec<_> = (0..n_spins.saturating_sub(1) / 2)
        .map(|k| (2 * k + 1, 2 * k + 2))
        .collect();
    [first, second]
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeraldOutcome {
    /// Heralding time of every pair, in schedule order.
    pub pair_times: Vec<f64>,
    /// Slowest pair of each stage.
    pub stage_times: Vec<f64>,
    pub total_time: f64,
    pub attempts_total: u64,
    pub within_coherence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClusterTrial {
    Complete(HeraldOutcome),
    /// A pair ran out of attempts; the trial was abandoned.
    Aborted {
        attempts_total: u64,
        elapsed_ns: f64,
    },
}

pub fn simulate_cluster<R: Rng + ?Sized>(
    cfg: &HeraldConfig,
    rng: &mut R,
) -> Result<ClusterTrial, HeraldError> {
    if cfg.n_spins < 2 {
        return Err(HeraldError::TooFewSpins(cfg.n_spins));
    }
    let mut pair_times = Vec::with_capacity(cfg.n_spins);
    let mut stage_times = Vec::with_capacity(2);
    let mut attempts_total = 0u64;
    let mut elapsed = 0.0;
    for stage in linear_cluster_schedule(cfg.n_spins) {
        let mut slowest = 0.0f64;
        let mut aborted = false;
        for _ in &stage {
            let outcome = simulate_pair(cfg, rng);
            attempts_total += outcome.attempts();
            slowest = slowest.max(outcome.time_ns());
            pair_times.push(outcome.time_ns());
            aborted |= !outcome.is_heralded();
        }
        elapsed += slowest;
        if aborted {
            return Ok(ClusterTrial::Aborted {
                attempts_total,
                elapsed_ns: elapsed,
            });
        }
        stage_times.push(slowest);
    }
    Ok(ClusterTrial::Complete(HeraldOutcome {
        pair_times,
        stage_times,
        total_time: elapsed,
        attempts_total,
        within_coherence: elapsed <= cfg.coherence_time_ns(),
    }))
}

/// Order statistics and moments of the successful samples of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub successes: u64,
    pub success_fraction: f64,
    pub mean: f64,
    pub std_error: f64,
    pub median: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn from_samples(trials: u64, mut samples: Vec<f64>) -> Self {
        let n = samples.len();
        let successes = n as u64;
        let success_fraction = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        if n == 0 {
            return Self {
                trials,
                successes,
                success_fraction,
                mean: f64::NAN,
                std_error: f64::NAN,
                median: f64::NAN,
                p95: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        samples.sort_by(f64::total_cmp);
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let median = if n % 2 == 1 {
            samples[n / 2]
        } else {
            0.5 * (samples[n / 2 - 1] + samples[n / 2])
        };
        // nearest rank
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Self {
            trials,
            successes,
            success_fraction,
            mean,
            std_error: (var / n as f64).sqrt(),
            median,
            p95: samples[rank - 1],
            min: samples[0],
            max: samples[n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    pub attempts: Summary,
    pub time_ns: Summary,
    /// `1/p` for the effective per-attempt probability, when defined.
    pub expected_attempts: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStatistics {
    pub n_spins: usize,
    pub time_ns: Summary,
    pub attempts: Summary,
    /// Fraction of all trials that completed within the coherence time.
    pub within_coherence_fraction: f64,
    pub aborted: u64,
}

fn check_trials(cfg: &HeraldConfig, trials: u64) -> Result<(), HeraldError> {
    cfg.validate()?;
    if trials == 0 {
        return Err(HeraldError::NoTrials);
    }
    Ok(())
}

pub fn run_pair_trials(cfg: &HeraldConfig, trials: u64) -> Result<PairStatistics, HeraldError> {
    check_trials(cfg, trials)?;
    let outcomes: Vec<PairOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| simulate_pair(cfg, &mut trial_rng(cfg.seed, t)))
        .collect();
    let heralded = outcomes.iter().filter(|o| o.is_heralded());
    let attempts: Vec<f64> = heralded.clone().map(|o| o.attempts() as f64).collect();
    let times: Vec<f64> = heralded.map(|o| o.time_ns()).collect();
    Ok(PairStatistics {
        attempts: Summary::from_samples(trials, attempts),
        time_ns: Summary::from_samples(trials, times),
        expected_attempts: expected_attempts(cfg.effective_probability()).ok(),
    })
}

pub fn run_cluster_trials(
    cfg: &HeraldConfig,
    trials: u64,
) -> Result<ClusterStatistics, HeraldError> {
    check_trials(cfg, trials)?;
    if cfg.n_spins < 2 {
        return Err(HeraldError::TooFewSpins(cfg.n_spins));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| simulate_cluster(cfg, &mut trial_rng(cfg.seed, t)))
        .collect::<Result<Vec<_>, _>>()?;
    let complete: Vec<&HeraldOutcome> = outcomes
        .iter()
        .filter_map(|o| match o {
            ClusterTrial::Complete(h) => Some(h),
            ClusterTrial::Aborted { .. } => None,
        })
        .collect();
    let within = complete.iter().filter(|h| h.within_coherence).count();
    Ok(ClusterStatistics {
        n_spins: cfg.n_spins,
        time_ns: Summary::from_samples(trials, complete.iter().map(|h| h.total_time).collect()),
        attempts: Summary::from_samples(
            trials,
            complete.iter().map(|h| h.attempts_total as f64).collect(),
        ),
        within_coherence_fraction: within as f64 / trials as f64,
        aborted: trials - complete.len() as u64,
    })
}
