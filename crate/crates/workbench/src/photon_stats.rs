//! Photon-number statistics: g²(0) from moments, closed forms for common
//! states, and a seeded Poisson-process simulator with Bernoulli thinning.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("g2 needs a positive mean photon number")]
    ZeroMean,
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series lengths differ or are below 2 ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("unrecognised state {0:?}; expected fock:N, thermal:X, coherent[:N] or tmsv:R")]
    ParseState(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberMoments {
    pub mean: f64,
    pub variance: f64,
}

impl NumberMoments {
    pub fn new(mean: f64, variance: f64) -> Result<Self, StatsError> {
        if !(mean >= 0.0) {
            return Err(StatsError::InvalidParameter { name: "mean", value: mean });
        }
        if !(variance >= 0.0) {
            return Err(StatsError::InvalidParameter { name: "variance", value: variance });
        }
        Ok(Self { mean, variance })
    }

    /// Unbiased sample moments of integer counts.
    pub fn from_counts(counts: &[u64]) -> Self {
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let variance = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, variance }
    }

    /// Variance-to-mean (Fano) ratio.
    pub fn dispersion(&self) -> f64 {
        self.variance / self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LightClass {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
}

/// g²(0) = 1 + ((Δn)² − ⟨n⟩)/⟨n⟩².
pub fn g2_from_moments(m: &NumberMoments) -> Result<f64, StatsError> {
    if !(m.mean > 0.0) {
        return Err(StatsError::ZeroMean);
    }
    Ok(1.0 + (m.variance - m.mean) / (m.mean * m.mean))
}

pub fn classify(g2: f64) -> LightClass {
    if g2 < 1.0 {
        LightClass::SubPoissonian
    } else if g2 > 1.0 {
        LightClass::SuperPoissonian
    } else {
        LightClass::Poissonian
    }
}

/// Monte Carlo classification with a ±3σ band around g² = 1.
pub fn classify_estimate(g2: f64, standard_error: f64) -> LightClass {
    if g2 < 1.0 - 3.0 * standard_error {
        LightClass::SubPoissonian
    } else if g2 > 1.0 + 3.0 * standard_error {
        LightClass::SuperPoissonian
    } else {
        LightClass::Poissonian
    }
}

pub fn fock_moments(n: u32) -> NumberMoments {
    NumberMoments { mean: n as f64, variance: 0.0 }
}

pub fn coherent_moments(mean: f64) -> NumberMoments {
    NumberMoments { mean, variance: mean }
}

/// Thermal mode with βħω = `x`: ⟨n⟩ = 1/(eˣ − 1), (Δn)² = ⟨n⟩² + ⟨n⟩.
pub fn thermal_moments(x: f64) -> Result<NumberMoments, StatsError> {
    if !(x > 0.0) {
        return Err(StatsError::InvalidParameter { name: "beta_hbar_omega", value: x });
    }
    let n = 1.0 / x.exp_m1();
    Ok(NumberMoments { mean: n, variance: n * n + n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmsvMoments {
    /// Identical for both modes.
    pub mode: NumberMoments,
    /// Variance of n₁ − n₂.
    pub difference_variance: f64,
    /// Pearson correlation of n₁ and n₂; 0 for the vacuum.
    pub correlation: f64,
}

/// Two-mode squeezed vacuum with squeezing parameter R.
pub fn tmsv_moments(r: f64) -> Result<TmsvMoments, StatsError> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(StatsError::InvalidParameter { name: "squeezing", value: r });
    }
    let s = r.sinh();
    let mode = NumberMoments { mean: s * s, variance: 0.25 * (2.0 * r).sinh().powi(2) };
    Ok(TmsvMoments { mode, difference_variance: 0.0, correlation: if r > 0.0 { 1.0 } else { 0.0 } })
}

/// Light state accepted by the command line, e.g. `fock:2` or `tmsv:0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "lowercase")]
pub enum LightState {
    Fock(u32),
    /// βħω.
    Thermal(f64),
    /// Mean photon number.
    Coherent(f64),
    /// Squeezing parameter R; statistics of one mode.
    Tmsv(f64),
}

impl LightState {
    pub fn moments(&self) -> Result<NumberMoments, StatsError> {
        match *self {
            LightState::Fock(n) => Ok(fock_moments(n)),
            LightState::Thermal(x) => thermal_moments(x),
            LightState::Coherent(n) => {
                if n > 0.0 {
                    Ok(coherent_moments(n))
                } else {
                    Err(StatsError::InvalidParameter { name: "mean", value: n })
                }
            }
            LightState::Tmsv(r) => Ok(tmsv_moments(r)?.mode),
        }
    }
}

impl FromStr for LightState {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StatsError::ParseState(s.to_string());
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| a.ok_or_else(bad)?.parse::<f64>().map_err(|_| bad());
        match kind.to_ascii_lowercase().as_str() {
            "fock" => arg.ok_or_else(bad)?.parse::<u32>().map(LightState::Fock).map_err(|_| bad()),
            "thermal" => num(arg).map(LightState::Thermal),
            "coherent" => Ok(LightState::Coherent(if arg.is_some() { num(arg)? } else { 1.0 })),
            "tmsv" => num(arg).map(LightState::Tmsv),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for LightState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LightState::Fock(n) => write!(f, "fock:{n}"),
            LightState::Thermal(x) => write!(f, "thermal:{x}"),
            LightState::Coherent(n) => write!(f, "coherent:{n}"),
            LightState::Tmsv(r) => write!(f, "tmsv:{r}"),
        }
    }
}

/// Arrival times in seconds, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub arrival_times: Vec<f64>,
}

impl CountRecord {
    pub fn len(&self) -> usize {
        self.arrival_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrival_times.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.arrival_times.first().map_or(true, |t| *t >= 0.0) && self.arrival_times.windows(2).all(|w| w[1] > w[0])
    }

    /// Counts in `bins` equal windows covering [0, horizon).
    pub fn window_counts(&self, horizon: f64, bins: usize) -> Vec<u64> {
        let mut out = vec![0; bins];
        for t in &self.arrival_times {
            let k = (t / horizon * bins as f64) as usize;
            if k < bins {
                out[k] += 1;
            }
        }
        out
    }

    pub fn to_lines(&self) -> String {
        self.arrival_times.iter().map(|t| format!("{t:e}\n")).collect()
    }
}

/// Generator for repetition `stream` of a seeded experiment. ChaCha is
/// counter based, so streams are independent and reproducible.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_rate(rate: f64, horizon: f64) -> Result<(), StatsError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(StatsError::InvalidParameter { name: "rate", value: rate });
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(StatsError::InvalidParameter { name: "horizon", value: horizon });
    }
    Ok(())
}

/// Poisson process on [0, horizon) from exponential inter-arrival times.
pub fn simulate_poisson_with<R: Rng>(rate: f64, horizon: f64, rng: &mut R) -> Result<CountRecord, StatsError> {
    check_rate(rate, horizon)?;
    let exp = Exp::new(rate).map_err(|_| StatsError::InvalidParameter { name: "rate", value: rate })?;
    let mut times = Vec::with_capacity((rate * horizon * 1.1) as usize + 4);
    let mut t = exp.sample(rng);
    while t < horizon {
        times.push(t);
        t += exp.sample(rng);
    }
    Ok(CountRecord { arrival_times: times })
}

pub fn simulate_poisson(rate: f64, horizon: f64, seed: u64) -> Result<CountRecord, StatsError> {
    simulate_poisson_with(rate, horizon, &mut stream_rng(seed, 0))
}

/// Total counts of `repetitions` independent runs, one stream per run.
pub fn repeated_counts(rate: f64, horizon: f64, repetitions: usize, seed: u64) -> Result<Vec<u64>, StatsError> {
    check_rate(rate, horizon)?;
    (0..repetitions as u64)
        .into_par_iter()
        .map(|i| simulate_poisson_with(rate, horizon, &mut stream_rng(seed, i)).map(|r| r.len() as u64))
        .collect()
}

/// Independent Bernoulli thinning: each arrival is kept with probability `p`.
pub fn branch(record: &CountRecord, p: f64, seed: u64) -> Result<(CountRecord, CountRecord), StatsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::InvalidParameter { name: "keep_probability", value: p });
    }
    let mut rng = stream_rng(seed, u64::MAX);
    let (mut kept, mut dropped) = (Vec::new(), Vec::new());
    for &t in &record.arrival_times {
        if rng.gen::<f64>() < p {
            kept.push(t);
        } else {
            dropped.push(t);
        }
    }
    Ok((CountRecord { arrival_times: kept }, CountRecord { arrival_times: dropped }))
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
