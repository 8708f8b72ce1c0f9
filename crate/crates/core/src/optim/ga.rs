//! Real-coded genetic algorithm: binary tournaments, per-gene blend
//! crossover with `beta ~ U(-0.25, 1.25)`, Gaussian mutation and elitism.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ranking, Best, OptimizerConfig, Run};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaParams {
    pub p_mutation: f64,
    pub n_elite: usize,
    /// Mutation standard deviation as a fraction of each dimension's width.
    pub sigma: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            p_mutation: 0.05,
            n_elite: 2,
            sigma: 0.1,
        }
    }
}

impl GaParams {
    pub(crate) fn validate(&self, population: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_mutation) {
            return Err(Error::invalid(
                "optimizer.ga.p_mutation",
                "must lie in [0, 1]",
            ));
        }
        if self.n_elite >= population {
            return Err(Error::invalid(
                "optimizer.ga.n_elite",
                "must be smaller than the population",
            ));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::invalid(
                "optimizer.ga.sigma",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

const BLEND_LOW: f64 = -0.25;
const BLEND_HIGH: f64 = 1.25;

fn tournament<R: Rng>(fitness: &[f64], rng: &mut R) -> usize {
    let a = rng.gen_range(0..fitness.len());
    let b = rng.gen_range(0..fitness.len());
    if fitness[b] < fitness[a] {
        b
    } else {
        a
    }
}

pub(super) fn run<F>(run: &mut Run<'_, F>, cfg: &OptimizerConfig, initial: Vec<Vec<f64>>) -> Best
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let p = cfg.ga;
    let n = initial.len();
    let dim = run.space.dim();

    let fitness = run.evaluate(&initial);
    let order = ranking(&fitness);
    let mut pop: Vec<Vec<f64>> = order.iter().map(|&i| initial[i].clone()).collect();
    let mut fitness: Vec<f64> = order.iter().map(|&i| fitness[i]).collect();

    for _ in 0..cfg.generations {
        let mut children = Vec::with_capacity(n - p.n_elite);
        while children.len() < n - p.n_elite {
            let a = &pop[tournament(&fitness, &mut run.rng)];
            let b = &pop[tournament(&fitness, &mut run.rng)];
            let mut child: Vec<f64> = (0..dim)
                .map(|d| {
                    let beta = run.rng.gen_range(BLEND_LOW..BLEND_HIGH);
                    // b + beta (a - b) == beta a + (1 - beta) b, exact when a == b.
                    b[d] + beta * (a[d] - b[d])
                })
                .collect();
            for (d, gene) in child.iter_mut().enumerate() {
                if run.rng.gen::<f64>() < p.p_mutation {
                    let z: f64 = StandardNormal.sample(&mut run.rng);
                    *gene += p.sigma * run.space.width(d) * z;
                }
            }
            run.space.clamp(&mut child);
            children.push(child);
        }
        let child_fitness = run.evaluate(&children);

        pop.truncate(p.n_elite);
        fitness.truncate(p.n_elite);
        pop.extend(children);
        fitness.extend(child_fitness);
        let order = ranking(&fitness);
        pop = order.iter().map(|&i| pop[i].clone()).collect();
        fitness = order.iter().map(|&i| fitness[i]).collect();

        run.record(fitness[0], &fitness);
    }
    Best(pop.swap_remove(0), fitness[0])
}
