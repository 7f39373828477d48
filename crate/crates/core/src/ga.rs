//! The genetic-algorithm engine.
//!
//! One generation: draw `p`, score every pool member against the others,
//! breed `pool_size - 1` children by tournament selection, averaging
//! crossover and mutation, carry the elite over unmutated, and replace the
//! whole previous generation.
//!
//! Stream consumption per generation is fixed by the parameters: two words
//! for the draw, then per child `tournament_size` words for selection plus
//! one word for the mutation gate and one more when the mutation fires.

use serde::{Deserialize, Serialize};

use crate::env::{self, ActionRange, Draw, EnvParams, PayoffModel, Regime};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GAParams {
    pub pool_size: usize,
    pub tournament_size: usize,
    /// Probability that a child mutates.
    pub mutation_prob: f64,
    /// Magnitude of a mutation step.
    pub mutation_step: f64,
    pub elitism: bool,
    pub payoff_model: PayoffModel,
}

impl Default for GAParams {
    fn default() -> Self {
        Self {
            pool_size: 10,
            tournament_size: 3,
            mutation_prob: 0.1,
            mutation_step: 0.5,
            elitism: true,
            payoff_model: PayoffModel::QuadraticLoss,
        }
    }
}

impl GAParams {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 2 {
            return Err(Error::invalid("pool_size", "must be at least 2"));
        }
        if self.tournament_size < 2 {
            return Err(Error::invalid(
                "tournament_size",
                "must be at least 2 to yield two parents",
            ));
        }
        if self.tournament_size > self.pool_size {
            return Err(Error::invalid(
                "tournament_size",
                format!(
                    "{} exceeds pool_size {}",
                    self.tournament_size, self.pool_size
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::invalid(
                "mutation_prob",
                format!("must lie in [0, 1], got {}", self.mutation_prob),
            ));
        }
        // zero is allowed so calibration sweeps can include the no-mutation point
        if !(self.mutation_step >= 0.0 && self.mutation_step.is_finite()) {
            return Err(Error::invalid(
                "mutation_step",
                format!(
                    "must be finite and non-negative, got {}",
                    self.mutation_step
                ),
            ));
        }
        Ok(())
    }
}

/// The current generation of candidate announcements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyPool(Vec<f64>);

impl StrategyPool {
    pub fn new(values: Vec<f64>, actions: &ActionRange) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientBeliefs(values.len()));
        }
        if let Some(v) = values.iter().find(|v| !actions.contains(**v)) {
            return Err(Error::invalid(
                "pool",
                format!("value {v} outside [{}, {}]", actions.lo, actions.hi),
            ));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

/// Observables of one generation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// 1-based index of the generation produced by this step.
    pub iteration: usize,
    pub p_drawn: f64,
    pub regime: Regime,
    /// Mean of the new pool.
    pub pool_mean: f64,
    /// Best strategy of the evaluated pool, carried into the new one.
    pub elite_value: f64,
    pub elite_fitness: f64,
}

/// Evenly spaced pool over the action range, both endpoints included.
pub fn init_pool(actions: &ActionRange, pool_size: usize) -> Result<StrategyPool> {
    if pool_size < 2 {
        return Err(Error::invalid("pool_size", "must be at least 2"));
    }
    let last = (pool_size - 1) as f64;
    let values = (0..pool_size)
        .map(|i| {
            if i == pool_size - 1 {
                actions.hi
            } else {
                actions.lo + actions.width() * (i as f64 / last)
            }
        })
        .collect();
    Ok(StrategyPool(values))
}

pub fn evaluate(pool: &StrategyPool, p: f64, model: PayoffModel) -> Result<Vec<f64>> {
    let values = pool.values();
    match model {
        PayoffModel::QuadraticLoss => (0..values.len())
            .map(|i| env::quadratic_fitness(values, i, p))
            .collect(),
        PayoffModel::WinnerTakeAll => env::winner_take_all_fitness(values, p),
    }
}

/// Samples `tournament_size` distinct indices and returns the two best
/// contestants' values, best first.
pub fn tournament_select(
    pool: &StrategyPool,
    payoffs: &[f64],
    tournament_size: usize,
    stream: &mut Stream,
) -> (f64, f64) {
    let n = pool.len();
    debug_assert_eq!(payoffs.len(), n);
    debug_assert!((2..=n).contains(&tournament_size));
    // partial Fisher-Yates: one word per sampled slot
    let mut idx: Vec<usize> = (0..n).collect();
    for slot in 0..tournament_size {
        let pick = slot + stream.index(n - slot);
        idx.swap(slot, pick);
    }
    let (a, b) = best_two(payoffs, &idx[..tournament_size]);
    (pool.values()[a], pool.values()[b])
}

/// Indices of the two highest payoffs among `sampled`, ties to the lower index.
pub fn best_two(payoffs: &[f64], sampled: &[usize]) -> (usize, usize) {
    let beats = |a: usize, b: usize| match payoffs[a].total_cmp(&payoffs[b]) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a < b,
    };
    let (mut first, mut second) = if beats(sampled[0], sampled[1]) {
        (sampled[0], sampled[1])
    } else {
        (sampled[1], sampled[0])
    };
    for &c in &sampled[2..] {
        if beats(c, first) {
            second = first;
            first = c;
        } else if beats(c, second) {
            second = c;
        }
    }
    (first, second)
}

pub fn crossover(parent_a: f64, parent_b: f64) -> f64 {
    (parent_a + parent_b) / 2.0
}

pub fn mutate(child: f64, params: &GAParams, actions: &ActionRange, stream: &mut Stream) -> f64 {
    if !stream.bernoulli(params.mutation_prob) {
        return child;
    }
    let step = if stream.bernoulli(0.5) {
        params.mutation_step
    } else {
        -params.mutation_step
    };
    actions.clamp(child + step)
}

/// Index of the best payoff, lowest index on ties.
pub fn elite_index(payoffs: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in payoffs.iter().enumerate().skip(1) {
        if *f > payoffs[best] {
            best = i;
        }
    }
    best
}

pub fn elite(pool: &StrategyPool, payoffs: &[f64]) -> f64 {
    pool.values()[elite_index(payoffs)]
}

/// One generation with a regime draw.
pub fn step_generation(
    pool: &StrategyPool,
    env: &EnvParams,
    params: &GAParams,
    iteration: usize,
    stream: &mut Stream,
) -> Result<(StrategyPool, GenerationRecord)> {
    let draw = env::draw_p(env, stream)?;
    step_with_draw(pool, draw, &env.actions, params, iteration, stream)
}

/// One generation under an already drawn `p`.
pub fn step_with_draw(
    pool: &StrategyPool,
    draw: Draw,
    actions: &ActionRange,
    params: &GAParams,
    iteration: usize,
    stream: &mut Stream,
) -> Result<(StrategyPool, GenerationRecord)> {
    let payoffs = evaluate(pool, draw.p, params.payoff_model)?;
    let best = elite_index(&payoffs);
    let n = pool.len();
    let n_children = if params.elitism { n - 1 } else { n };

    let mut next = Vec::with_capacity(n);
    for _ in 0..n_children {
        let (a, b) = tournament_select(pool, &payoffs, params.tournament_size, stream);
        next.push(mutate(crossover(a, b), params, actions, stream));
    }
    if params.elitism {
        next.push(pool.values()[best]);
    }
    let next = StrategyPool(next);
    let record = GenerationRecord {
        iteration,
        p_drawn: draw.p,
        regime: draw.regime,
        pool_mean: next.mean(),
        elite_value: pool.values()[best],
        elite_fitness: payoffs[best],
    };
    Ok((next, record))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(values: &[f64]) -> StrategyPool {
        StrategyPool::new(values.to_vec(), &ActionRange::default()).unwrap()
    }

    #[test]
    fn init_pool_examples() {
        let a = ActionRange::default();
        let p11 = init_pool(&a, 11).unwrap();
        let want: Vec<f64> = (0..=10).map(f64::from).collect();
        assert_eq!(p11.values(), &want[..]);
        assert_eq!(init_pool(&a, 2).unwrap().values(), &[0.0, 10.0]);
        let p10 = init_pool(&a, 10).unwrap();
        for (i, v) in p10.values().iter().enumerate() {
            approx::assert_relative_eq!(*v, 10.0 * i as f64 / 9.0, max_relative = 1e-15);
        }
        assert_eq!(p10.values()[9], 10.0);
        assert!(init_pool(&a, 1).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let p11 = init_pool(&ActionRange::default(), 11).unwrap();
        let f = evaluate(&p11, 1.0, PayoffModel::QuadraticLoss).unwrap();
        assert_eq!(f[5], -110.0);
        assert_eq!(elite_index(&f), 5);
        let flat = evaluate(&pool(&[2.0; 5]), 1.0, PayoffModel::QuadraticLoss).unwrap();
        assert!(flat.iter().all(|&x| x == 0.0));
        let wta = evaluate(&pool(&[0.0, 5.0, 10.0]), 1.0, PayoffModel::WinnerTakeAll).unwrap();
        assert_eq!(wta, vec![0.5, 2.0, 0.5]);
    }

    #[test]
    fn best_two_order_statistics() {
        let payoffs = [-5.0, -1.0, -9.0];
        assert_eq!(best_two(&payoffs, &[0, 1, 2]), (1, 0));
        let flat = [0.0; 6];
        assert_eq!(best_two(&flat, &[4, 2, 5]), (2, 4));
    }

    #[test]
    fn dominant_strategy_inclusion_rate() {
        // P(fixed index in a 3-subset of 10) = 3/10
        let pool = init_pool(&ActionRange::default(), 10).unwrap();
        let mut payoffs = vec![-10.0; 10];
        payoffs[6] = 0.0;
        let dominant = pool.values()[6];
        let mut s = Stream::from_seed(99);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| {
                let (a, b) = tournament_select(&pool, &payoffs, 3, &mut s);
                a == dominant || b == dominant
            })
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.3).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(crossover(2.0, 4.0), 3.0);
        assert_eq!(crossover(7.25, 7.25), 7.25);
        assert_eq!(crossover(0.0, 10.0), 5.0);
    }

    #[test]
    fn mutate_examples() {
        let a = ActionRange::default();
        let always = GAParams {
            mutation_prob: 1.0,
            ..GAParams::default()
        };
        // find a seed whose direction word points up
        let mut seed = 0;
        loop {
            let mut probe = Stream::from_seed(seed);
            probe.uniform();
            if probe.uniform() < 0.5 {
                break;
            }
            seed += 1;
        }
        assert_eq!(mutate(3.0, &always, &a, &mut Stream::from_seed(seed)), 3.5);
        assert_eq!(
            mutate(10.0, &always, &a, &mut Stream::from_seed(seed)),
            10.0
        );

        let never = GAParams {
            mutation_prob: 0.0,
            ..GAParams::default()
        };
        let mut s = Stream::from_seed(1);
        for i in 0..100 {
            let x = i as f64 / 10.0;
            assert_eq!(mutate(x, &never, &a, &mut s), x);
        }
    }

    #[test]
    fn mutate_word_counts() {
        let a = ActionRange::default();
        let never = GAParams {
            mutation_prob: 0.0,
            ..GAParams::default()
        };
        let always = GAParams {
            mutation_prob: 1.0,
            ..GAParams::default()
        };
        let mut s = Stream::from_seed(8);
        let mut r = Stream::from_seed(8);
        mutate(5.0, &never, &a, &mut s);
        r.uniform();
        assert_eq!(s.uniform().to_bits(), r.uniform().to_bits());
        mutate(5.0, &always, &a, &mut s);
        r.uniform();
        r.uniform();
        assert_eq!(s.uniform().to_bits(), r.uniform().to_bits());
    }

    #[test]
    fn elite_examples() {
        let p11 = init_pool(&ActionRange::default(), 11).unwrap();
        let f = evaluate(&p11, 1.0, PayoffModel::QuadraticLoss).unwrap();
        assert_eq!(elite(&p11, &f), 5.0);

        let flat = pool(&[1.0, 1.0, 1.0]);
        assert_eq!(elite_index(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(elite(&flat, &[0.0, 0.0, 0.0]), 1.0);

        let two = pool(&[0.0, 10.0]);
        let f = evaluate(&two, 1.5, PayoffModel::QuadraticLoss).unwrap();
        // -(0 - 1.5 * 10)^2 and -(10 - 1.5 * 0)^2
        assert_eq!(f, vec![-225.0, -100.0]);
        assert_eq!(elite(&two, &f), 10.0);
    }

    #[test]
    fn constant_pool_is_fixed_point_without_mutation() {
        let params = GAParams {
            mutation_prob: 0.0,
            ..GAParams::default()
        };
        let env = EnvParams::with_q(0.5).unwrap();
        let mut s = Stream::from_seed(4);
        let mut pool = pool(&[6.5; 10]);
        for t in 1..=20 {
            pool = step_generation(&pool, &env, &params, t, &mut s).unwrap().0;
            assert!(pool.values().iter().all(|&v| v == 6.5));
        }
    }

    #[test]
    fn elite_carried_unmutated() {
        let env = EnvParams::with_q(0.0).unwrap();
        let params = GAParams {
            mutation_prob: 1.0,
            ..GAParams::default()
        };
        let start = init_pool(&env.actions, 11).unwrap();
        let mut s = Stream::from_seed(12);
        let (next, rec) = step_generation(&start, &env, &params, 1, &mut s).unwrap();
        assert_eq!(next.len(), 11);
        assert_eq!(*next.values().last().unwrap(), rec.elite_value);
        assert!(rec.p_drawn > 1.0);
    }

    #[test]
    fn tournament_larger_than_pool_rejected() {
        let params = GAParams {
            pool_size: 3,
            tournament_size: 4,
            ..GAParams::default()
        };
        assert!(params.validate().is_err());
        let one = GAParams {
            tournament_size: 1,
            ..GAParams::default()
        };
        assert!(one.validate().is_err());
        assert!(GAParams::default().validate().is_ok());
    }
}
