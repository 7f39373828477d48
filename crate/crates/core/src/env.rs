//! The unstable p-guessing environment and the two payoff models.
//!
//! Each round a regime is drawn: with probability `q` the game multiplier
//! `p` is uniform on the low interval (contraction toward zero), otherwise
//! uniform on the high interval (drift toward the ceiling). Candidate
//! strategies are scored against the other pool members, which stand in for
//! beliefs about the average play of the opponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Closed interval of legal announcements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRange {
    pub lo: f64,
    pub hi: f64,
}

impl ActionRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let range = Self { lo, hi };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(
                "actions",
                format!("need finite lo < hi, got [{}, {}]", self.lo, self.hi),
            ));
        }
        Ok(())
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl Default for ActionRange {
    fn default() -> Self {
        Self { lo: 0.0, hi: 10.0 }
    }
}

/// Open interval `(lo, hi)` from which `p` is drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(
                name,
                format!("need finite lo < hi, got ({}, {})", self.lo, self.hi),
            ));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvParams {
    /// Probability of the low regime.
    pub q: f64,
    pub low_regime: OpenInterval,
    pub high_regime: OpenInterval,
    pub actions: ActionRange,
}

impl EnvParams {
    /// Default ranges with the given regime probability.
    pub fn with_q(q: f64) -> Result<Self> {
        let env = Self {
            q,
            ..Self::default()
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::invalid(
                "q",
                format!("must lie in [0, 1], got {}", self.q),
            ));
        }
        self.low_regime.validate("low_regime")?;
        self.high_regime.validate("high_regime")?;
        self.actions.validate()
    }
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            q: 0.5,
            low_regime: OpenInterval::new(0.0, 1.0),
            high_regime: OpenInterval::new(1.0, 2.0),
            actions: ActionRange::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffModel {
    /// Continuous loss `-(x - p * xbar)^2` summed over beliefs.
    #[default]
    QuadraticLoss,
    /// One indivisible prize per belief, awarded to the closest guess.
    WinnerTakeAll,
}

/// Result of one regime draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub p: f64,
    pub regime: Regime,
}

const MAX_OPEN_DRAW_ATTEMPTS: usize = 100;

/// Draws the game multiplier for one round.
///
/// Consumes one word for the regime and one for the uniform; an endpoint hit
/// (probability ~2^-53) is rejected and redrawn.
pub fn draw_p(env: &EnvParams, stream: &mut Stream) -> Result<Draw> {
    let regime = if stream.bernoulli(env.q) {
        Regime::Low
    } else {
        Regime::High
    };
    let interval = match regime {
        Regime::Low => env.low_regime,
        Regime::High => env.high_regime,
    };
    for _ in 0..MAX_OPEN_DRAW_ATTEMPTS {
        let p = interval.lo + stream.uniform() * (interval.hi - interval.lo);
        if interval.contains(p) {
            return Ok(Draw { p, regime });
        }
    }
    Err(Error::OpenIntervalDraw {
        lo: interval.lo,
        hi: interval.hi,
        attempts: MAX_OPEN_DRAW_ATTEMPTS,
    })
}

/// Utility of announcing `x` when the average of the others is `xbar`.
pub fn quadratic_payoff(x: f64, p: f64, xbar: f64) -> f64 {
    let miss = x - p * xbar;
    -(miss * miss)
}

/// Sum of quadratic payoffs of `pool[idx]` against every other pool member.
///
/// The strategy is never scored against itself.
pub fn quadratic_fitness(pool: &[f64], idx: usize, p: f64) -> Result<f64> {
    if pool.len() < 2 {
        return Err(Error::InsufficientBeliefs(pool.len()));
    }
    if idx >= pool.len() {
        return Err(Error::invalid(
            "idx",
            format!("index {idx} out of range for pool of {}", pool.len()),
        ));
    }
    let x = pool[idx];
    Ok(pool
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != idx)
        .map(|(_, &belief)| quadratic_payoff(x, p, belief))
        .sum())
}

/// Prize-based fitness for the whole pool.
///
/// For each belief `pool[j]` the target is `p * pool[j]`; among the other
/// members, the one closest to the target wins one point. Exact ties split
/// the point. Entries therefore sum to the pool size.
pub fn winner_take_all_fitness(pool: &[f64], p: f64) -> Result<Vec<f64>> {
    let n = pool.len();
    if n < 2 {
        return Err(Error::InsufficientBeliefs(n));
    }
    let mut points = vec![0.0; n];
    let mut winners = Vec::with_capacity(n);
    for (j, &belief) in pool.iter().enumerate() {
        let target = p * belief;
        let mut best = f64::INFINITY;
        winners.clear();
        for (k, &guess) in pool.iter().enumerate() {
            if k == j {
                continue;
            }
            let dist = (guess - target).abs();
            if dist < best {
                best = dist;
                winners.clear();
                winners.push(k);
            } else if dist == best {
                winners.push(k);
            }
        }
        let share = 1.0 / winners.len() as f64;
        for &k in &winners {
            points[k] += share;
        }
    }
    Ok(points)
}
