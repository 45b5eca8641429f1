//! Seeded random instances for the verification harness.
//!
//! Instance `i` of seed `s` is drawn from ChaCha8 (the `rand_chacha`
//! implementation) keyed by `ChaCha8Rng::seed_from_u64(s)` with the stream
//! number set to `i`. A uniform choice among `n` items takes one `next_u64`
//! word `w` and returns `(w * n) >> 64`. Draws happen in this order: the
//! stage count, then each capacity, then each factor; the harness continues
//! the same stream for its auxiliary draws. Every instance is therefore a
//! pure function of `(seed, index)` and instances can be generated in any
//! order or in parallel.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use toc_core::{Multiplier, Pipeline, Rational, RationalMultiplier, RationalPipeline, Scalar};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub instance_count: usize,
    pub max_stages: usize,
    pub capacity_grid: Vec<Rational>,
    pub factor_grid: Vec<Rational>,
}

impl GeneratorConfig {
    /// Default grids: capacities 1..=10, factors {1, 1, 3/2, 2, 5}. The
    /// repeated 1 makes unimproved bottlenecks, and so exact ties in
    /// throughput, common.
    pub fn new(seed: u64, instance_count: usize) -> Self {
        GeneratorConfig {
            seed,
            instance_count,
            max_stages: 8,
            capacity_grid: (1..=10).map(Rational::from_int).collect(),
            factor_grid: vec![
                Rational::from_int(1),
                Rational::from_int(1),
                Rational::from_ratio(3, 2),
                Rational::from_int(2),
                Rational::from_int(5),
            ],
        }
    }

    pub fn with_max_stages(mut self, max_stages: usize) -> Self {
        self.max_stages = max_stages;
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.max_stages == 0 {
            return bad("max_stages must be positive");
        }
        if self.capacity_grid.is_empty() || self.factor_grid.is_empty() {
            return bad("capacity and factor grids must be nonempty");
        }
        if !self.capacity_grid.iter().all(Scalar::is_positive) {
            return bad("capacity grid values must be strictly positive");
        }
        let one = Rational::from_int(1);
        if !self.factor_grid.iter().all(|f| *f >= one) {
            return bad("factor grid values must be at least 1");
        }
        if !self.factor_grid.contains(&one) {
            return bad("factor grid must contain 1");
        }
        Ok(())
    }
}

/// Deterministic draw source for one instance.
pub struct InstanceRng(ChaCha8Rng);

impl InstanceRng {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        InstanceRng(rng)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.0.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn coin(&mut self) -> bool {
        self.below(2) == 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub pipeline: RationalPipeline,
    pub multiplier: RationalMultiplier,
}

/// Pipeline and multiplier drawn from `rng` under `cfg`'s grids.
pub fn draw_instance(cfg: &GeneratorConfig, rng: &mut InstanceRng) -> Instance {
    let stages = rng.below(cfg.max_stages) + 1;
    let capacities: Vec<Rational> = (0..stages).map(|_| rng.pick(&cfg.capacity_grid).clone()).collect();
    let pipeline = Pipeline::new(capacities.into_iter().enumerate().map(|(i, c)| (format!("s{}", i + 1), c)))
        .expect("grid capacities are positive");
    let multiplier = Multiplier::new(
        pipeline
            .stages()
            .iter()
            .map(|s| (s.clone(), rng.pick(&cfg.factor_grid).clone()))
            .collect::<Vec<_>>(),
    )
    .expect("grid factors are at least 1");
    Instance { pipeline, multiplier }
}

/// Instance `index` together with the stream positioned after it.
pub fn instance_stream(cfg: &GeneratorConfig, index: usize) -> (Instance, InstanceRng) {
    let mut rng = InstanceRng::new(cfg.seed, index as u64);
    let instance = draw_instance(cfg, &mut rng);
    (instance, rng)
}

pub fn generate_instance(cfg: &GeneratorConfig, index: usize) -> Instance {
    instance_stream(cfg, index).0
}
