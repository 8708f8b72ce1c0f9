//! Biogeography-based optimization with the linear migration model.
//!
//! Habitats are ranked by fitness. With `n` habitats and rank `k = n` for
//! the best down to `k = 1` for the worst, immigration is
//! `lambda_k = I (1 - k/n)` and emigration `mu_k = E k/n`. Each non-elite
//! habitat replaces each feature with probability `lambda` by the same
//! feature of an emigrating habitat drawn by `mu`-weighted roulette, then
//! mutates each feature with probability `p_mutation` to a uniform draw in
//! bounds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ranking, Best, OptimizerConfig, Run};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BboParams {
    pub p_mutation: f64,
    pub n_elite: usize,
    /// Maximum immigration rate `I`.
    pub immigration: f64,
    /// Maximum emigration rate `E`.
    pub emigration: f64,
}

impl Default for BboParams {
    fn default() -> Self {
        Self {
            p_mutation: 0.01,
            n_elite: 2,
            immigration: 1.0,
            emigration: 1.0,
        }
    }
}

impl BboParams {
    pub(crate) fn validate(&self, population: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_mutation) {
            return Err(Error::invalid(
                "optimizer.bbo.p_mutation",
                "must lie in [0, 1]",
            ));
        }
        if self.n_elite >= population {
            return Err(Error::invalid(
                "optimizer.bbo.n_elite",
                "must be smaller than the population",
            ));
        }
        if !(0.0..=1.0).contains(&self.immigration)
            || !(self.emigration > 0.0 && self.emigration <= 1.0)
        {
            return Err(Error::invalid(
                "optimizer.bbo",
                "immigration must lie in [0, 1] and emigration in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// Roulette over `weights`, skipping index `skip`.
fn roulette<R: Rng>(weights: &[f64], skip: usize, rng: &mut R) -> usize {
    let total: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(_, w)| w)
        .sum();
    let mut r = rng.gen::<f64>() * total;
    let mut last = skip;
    for (j, &w) in weights.iter().enumerate() {
        if j == skip {
            continue;
        }
        last = j;
        if r < w {
            return j;
        }
        r -= w;
    }
    last
}

pub(super) fn run<F>(run: &mut Run<'_, F>, cfg: &OptimizerConfig, initial: Vec<Vec<f64>>) -> Best
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let p = cfg.bbo;
    let n = initial.len();
    let dim = run.space.dim();

    let fitness = run.evaluate(&initial);
    let order = ranking(&fitness);
    let mut habitats: Vec<Vec<f64>> = order.iter().map(|&i| initial[i].clone()).collect();
    let mut fitness: Vec<f64> = order.iter().map(|&i| fitness[i]).collect();

    // Position i in the sorted population has rank k = n - i.
    let emigration: Vec<f64> = (0..n)
        .map(|i| p.emigration * (n - i) as f64 / n as f64)
        .collect();
    let immigration: Vec<f64> = (0..n)
        .map(|i| p.immigration * (1.0 - (n - i) as f64 / n as f64))
        .collect();

    for _ in 0..cfg.generations {
        let mut next: Vec<Vec<f64>> = habitats[p.n_elite..].to_vec();
        for (slot, h) in next.iter_mut().enumerate() {
            let i = slot + p.n_elite;
            for d in 0..dim {
                if run.rng.gen::<f64>() < immigration[i] {
                    let j = roulette(&emigration, i, &mut run.rng);
                    h[d] = habitats[j][d];
                }
                if run.rng.gen::<f64>() < p.p_mutation {
                    h[d] = run.space.sample_coord(d, &mut run.rng);
                }
            }
        }
        let next_fitness = run.evaluate(&next);

        habitats.truncate(p.n_elite);
        fitness.truncate(p.n_elite);
        habitats.extend(next);
        fitness.extend(next_fitness);
        let order = ranking(&fitness);
        habitats = order.iter().map(|&i| habitats[i].clone()).collect();
        fitness = order.iter().map(|&i| fitness[i]).collect();

        run.record(fitness[0], &fitness);
    }
    Best(habitats.swap_remove(0), fitness[0])
}
