//! Population metaheuristics over a box-constrained real vector.
//!
//! All three algorithms minimize, draw every random number from one seeded
//! ChaCha stream, and evaluate each generation's candidates in parallel
//! before collecting the fitness values in index order. A given
//! `(space, config, objective)` therefore yields a bit-identical result
//! regardless of thread count.
//!
//! Objective values that are NaN or infinite are recorded as `+inf`.
//!
//! Evaluation budgets, with `n` the population and `g` the generations:
//!
//! | algorithm | objective calls          |
//! |-----------|--------------------------|
//! | BBO       | `n + g * (n - n_elite)`  |
//! | PSO       | `n + g * n`              |
//! | GA        | `n + g * (n - n_elite)`  |

mod bbo;
mod ga;
mod pso;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bbo::BboParams;
pub use ga::GaParams;
pub use pso::PsoParams;

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid(
                "bounds",
                "lower and upper must be non-empty and of equal length",
            ));
        }
        for (d, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::invalid(
                    "bounds",
                    format!("dimension {d}: need finite lower < upper, got [{l}, {u}]"),
                ));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval on every axis.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[d], self.upper[d]);
        }
    }

    pub(crate) fn sample_coord<R: Rng>(&self, d: usize, rng: &mut R) -> f64 {
        rng.gen_range(self.lower[d]..=self.upper[d])
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim()).map(|d| self.sample_coord(d, rng)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bbo,
    Pso,
    Ga,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bbo => "bbo",
            Algorithm::Pso => "pso",
            Algorithm::Ga => "ga",
        }
    }

    pub fn default_population(self) -> usize {
        match self {
            Algorithm::Bbo | Algorithm::Ga => 50,
            Algorithm::Pso => 30,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bbo" => Ok(Algorithm::Bbo),
            "pso" => Ok(Algorithm::Pso),
            "ga" => Ok(Algorithm::Ga),
            other => Err(Error::invalid(
                "optimizer.algorithm",
                format!("unknown algorithm `{other}` (expected bbo, pso or ga)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub generations: usize,
    pub seed: u64,
    pub bbo: BboParams,
    pub pso: PsoParams,
    pub ga: GaParams,
}

impl OptimizerConfig {
    /// Literature defaults for `algorithm`: 100 generations, seed 0.
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            population: algorithm.default_population(),
            generations: 100,
            seed: 0,
            bbo: BboParams::default(),
            pso: PsoParams::default(),
            ga: GaParams::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_size(mut self, population: usize, generations: usize) -> Self {
        self.population = population;
        self.generations = generations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::invalid("optimizer.population", "must be >= 4"));
        }
        if self.generations < 1 {
            return Err(Error::invalid("optimizer.generations", "must be >= 1"));
        }
        match self.algorithm {
            Algorithm::Bbo => self.bbo.validate(self.population),
            Algorithm::Pso => self.pso.validate(),
            Algorithm::Ga => self.ga.validate(self.population),
        }
    }

    /// Objective calls this configuration will make.
    pub fn evaluation_budget(&self) -> usize {
        let n = self.population;
        let g = self.generations;
        match self.algorithm {
            Algorithm::Bbo => n + g * (n - self.bbo.n_elite),
            Algorithm::Pso => n + g * n,
            Algorithm::Ga => n + g * (n - self.ga.n_elite),
        }
    }
}

/// Per-generation progress report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// 1-based generation index.
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub best_vector: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after each generation; non-increasing.
    pub fitness_history: Vec<f64>,
    /// Population mean fitness after each generation.
    pub mean_history: Vec<f64>,
    pub evaluations: usize,
}

/// Shared state for one optimizer run.
pub(crate) struct Run<'a, F> {
    pub space: &'a SearchSpace,
    pub objective: &'a F,
    pub rng: ChaCha8Rng,
    pub evaluations: usize,
    pub best_history: Vec<f64>,
    pub mean_history: Vec<f64>,
    observer: &'a mut dyn FnMut(&GenerationStats),
}

impl<'a, F> Run<'a, F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn evaluate(&mut self, candidates: &[Vec<f64>]) -> Vec<f64> {
        debug_assert!(candidates.iter().all(|x| self.space.contains(x)));
        self.evaluations += candidates.len();
        let objective = self.objective;
        candidates
            .par_iter()
            .map(|x| {
                let f = objective(x);
                if f.is_nan() || f.is_infinite() {
                    f64::INFINITY
                } else {
                    f
                }
            })
            .collect()
    }

    pub fn record(&mut self, best: f64, fitness: &[f64]) {
        let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
        self.best_history.push(best);
        self.mean_history.push(mean);
        (self.observer)(&GenerationStats {
            generation: self.best_history.len(),
            best,
            mean,
        });
    }

    pub fn finish(
        self,
        algorithm: Algorithm,
        seed: u64,
        best: Vec<f64>,
        best_fitness: f64,
    ) -> OptResult {
        OptResult {
            algorithm,
            seed,
            best_vector: best,
            best_fitness,
            fitness_history: self.best_history,
            mean_history: self.mean_history,
            evaluations: self.evaluations,
        }
    }
}

/// Indices sorted by ascending fitness; ties keep index order.
pub(crate) fn ranking(fitness: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
    idx
}

/// Minimize `objective` over `space`, reporting each generation to `observer`.
pub fn optimize<F>(
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    objective: &F,
    observer: &mut dyn FnMut(&GenerationStats),
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize_from(space, cfg, objective, None, observer)
}

/// Like [`optimize`], starting from a caller-supplied population instead of
/// a uniform draw. The initial population must have `cfg.population`
/// members inside the box.
pub fn optimize_from<F>(
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    objective: &F,
    initial: Option<Vec<Vec<f64>>>,
    observer: &mut dyn FnMut(&GenerationStats),
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let population = match initial {
        Some(pop) => {
            if pop.len() != cfg.population || !pop.iter().all(|x| space.contains(x)) {
                return Err(Error::invalid(
                    "initial population",
                    "must have `population` members inside the search box",
                ));
            }
            pop
        }
        None => (0..cfg.population)
            .map(|_| space.sample(&mut rng))
            .collect(),
    };
    let mut run = Run {
        space,
        objective,
        rng,
        evaluations: 0,
        best_history: Vec::with_capacity(cfg.generations),
        mean_history: Vec::with_capacity(cfg.generations),
        observer,
    };
    Ok(match cfg.algorithm {
        Algorithm::Bbo => bbo::run(&mut run, cfg, population).finish(run, cfg),
        Algorithm::Pso => pso::run(&mut run, cfg, population).finish(run, cfg),
        Algorithm::Ga => ga::run(&mut run, cfg, population).finish(run, cfg),
    })
}

pub(crate) struct Best(pub Vec<f64>, pub f64);

impl Best {
    fn finish<F: Fn(&[f64]) -> f64 + Sync>(
        self,
        run: Run<'_, F>,
        cfg: &OptimizerConfig,
    ) -> OptResult {
        run.finish(cfg.algorithm, cfg.seed, self.0, self.1)
    }
}

fn checked<F>(
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    objective: &F,
    algorithm: Algorithm,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if cfg.algorithm != algorithm {
        return Err(Error::invalid(
            "optimizer.algorithm",
            format!(
                "expected {}, got {}",
                algorithm.name(),
                cfg.algorithm.name()
            ),
        ));
    }
    optimize(space, cfg, objective, &mut |_| {})
}

/// Biogeography-based optimization.
pub fn bbo_optimize<F>(
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    objective: &F,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    checked(space, cfg, objective, Algorithm::Bbo)
}

/// Global-best particle swarm.
pub fn pso_optimize<F>(
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    objective: &F,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    checked(space, cfg, objective, Algorithm::Pso)
}

/// Real-coded genetic algorithm.
pub fn ga_optimize<F>(
    space: &SearchSpace,
    cfg: &OptimizerConfig,
    objective: &F,
) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    checked(space, cfg, objective, Algorithm::Ga)
}
