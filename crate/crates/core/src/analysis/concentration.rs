//! Binomial tail bounds and Monte Carlo checks against them.
//!
//! For `y ~ Binomial(n, p)`, `μ = np` and `0 < δ < 1`:
//!
//! ```text
//!   P(y ≥ (1+δ)μ) ≤ exp(-δ²μ/3)
//!   P(y ≤ (1-δ)μ) ≤ exp(-δ²μ/2)
//!   P(|y - np| ≥ n^(1/2+ε)) ≤ 2 exp(-n^(2ε) / (3p))
//! ```
//!
//! The last inequality is also examined in the log domain, as the event
//! `|log y - log n - log p| ≥ n^(-1/2+ε) / p`. That form relies on a
//! first-order expansion of the logarithm and can exceed the bound for
//! small `n·p`; [`ConcentrationReport::log_bound_exceeded`] flags it.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::stream_rng;

const STREAM_CHERNOFF: u64 = 11;
const STREAM_CONCENTRATION: u64 = 12;

/// Smallest Monte Carlo sample accepted by the checks.
pub const MIN_TRIALS: usize = 100;

/// Largest `ε` for which the concentration bound is exercised.
pub const MAX_EPS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub delta: f64,
    pub mu: f64,
    /// `exp(-δ²μ/3)`.
    pub upper: f64,
    /// `exp(-δ²μ/2)`.
    pub lower: f64,
}

fn binomial(n: u64, p: f64) -> Result<Binomial> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidProbability { index: 0, value: p });
    }
    Binomial::new(n, p).map_err(|_| Error::InvalidProbability { index: 0, value: p })
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid("trials", format!("need at least {MIN_TRIALS}, got {trials}")));
    }
    Ok(())
}

/// Standard error of a frequency estimate with true rate `rate`.
fn frequency_se(rate: f64, trials: usize) -> f64 {
    let r = rate.clamp(0.0, 1.0);
    (r * (1.0 - r) / trials as f64).sqrt()
}

pub fn chernoff_tail_bounds(n: u64, p: f64, delta: f64) -> Result<TailBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    binomial(n, p)?;
    let mu = n as f64 * p;
    Ok(TailBound {
        delta,
        mu,
        upper: (-delta * delta * mu / 3.0).exp(),
        lower: (-delta * delta * mu / 2.0).exp(),
    })
}

/// Empirical upper/lower tail frequencies next to their Chernoff bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffCheck {
    pub n: u64,
    pub p: f64,
    pub trials: usize,
    pub bound: TailBound,
    pub upper_freq: f64,
    pub lower_freq: f64,
}

impl ChernoffCheck {
    /// Both frequencies are within `sigmas` standard errors of their bounds.
    pub fn holds_within(&self, sigmas: f64) -> bool {
        let ok = |freq: f64, bound: f64| freq <= bound + sigmas * frequency_se(bound, self.trials);
        ok(self.upper_freq, self.bound.upper) && ok(self.lower_freq, self.bound.lower)
    }
}

pub fn chernoff_check(n: u64, p: f64, delta: f64, trials: usize, seed: u64) -> Result<ChernoffCheck> {
    let bound = chernoff_tail_bounds(n, p, delta)?;
    check_trials(trials)?;
    let dist = binomial(n, p)?;
    let mut rng = stream_rng(seed, STREAM_CHERNOFF);
    let (hi, lo) = ((1.0 + delta) * bound.mu, (1.0 - delta) * bound.mu);
    let (mut above, mut below) = (0usize, 0usize);
    for _ in 0..trials {
        let y = dist.sample(&mut rng) as f64;
        above += usize::from(y >= hi);
        below += usize::from(y <= lo);
    }
    Ok(ChernoffCheck {
        n,
        p,
        trials,
        bound,
        upper_freq: above as f64 / trials as f64,
        lower_freq: below as f64 / trials as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: u64,
    pub p: f64,
    pub eps: f64,
    pub trials: usize,
    /// `n^(1/2+ε)`.
    pub threshold: f64,
    /// Fraction of draws with `|y - np| ≥ threshold`.
    pub empirical_freq: f64,
    /// `2 exp(-n^(2ε) / (3p))`.
    pub bound: f64,
    /// `n^(-1/2+ε) / p`.
    pub log_threshold: f64,
    /// Fraction of draws with `y ≥ 1` whose log deviation reaches `log_threshold`.
    pub log_empirical_freq: f64,
    pub log_samples: usize,
    pub log_bound_exceeded: bool,
}

impl ConcentrationReport {
    pub fn standard_error(&self) -> f64 {
        frequency_se(self.bound, self.trials)
    }

    pub fn holds_within(&self, sigmas: f64) -> bool {
        self.empirical_freq <= self.bound + sigmas * self.standard_error()
    }
}

pub fn concentration_check(n: u64, p: f64, eps: f64, trials: usize, seed: u64) -> Result<ConcentrationReport> {
    if !(eps > 0.0 && eps <= MAX_EPS) {
        return Err(Error::InvalidEps(eps));
    }
    check_trials(trials)?;
    let dist = binomial(n, p)?;
    let nf = n as f64;
    let mean = nf * p;
    let threshold = nf.powf(0.5 + eps);
    let bound = 2.0 * (-nf.powf(2.0 * eps) / (3.0 * p)).exp();
    let log_threshold = nf.powf(-0.5 + eps) / p;
    let log_centre = nf.ln() + p.ln();

    let mut rng = stream_rng(seed, STREAM_CONCENTRATION);
    let (mut hits, mut log_hits, mut log_samples) = (0usize, 0usize, 0usize);
    for _ in 0..trials {
        let y = dist.sample(&mut rng);
        let yf = y as f64;
        hits += usize::from((yf - mean).abs() >= threshold);
        if y >= 1 {
            log_samples += 1;
            log_hits += usize::from((yf.ln() - log_centre).abs() >= log_threshold);
        }
    }
    let empirical_freq = hits as f64 / trials as f64;
    let log_empirical_freq = if log_samples > 0 {
        log_hits as f64 / log_samples as f64
    } else {
        0.0
    };
    let log_bound_exceeded = log_empirical_freq > bound + 3.0 * frequency_se(bound, log_samples.max(1));
    Ok(ConcentrationReport {
        n,
        p,
        eps,
        trials,
        threshold,
        empirical_freq,
        bound,
        log_threshold,
        log_empirical_freq,
        log_samples,
        log_bound_exceeded,
    })
}
