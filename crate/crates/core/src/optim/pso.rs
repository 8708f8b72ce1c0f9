//! Global-best particle swarm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Best, OptimizerConfig, Run};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoParams {
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.729,
            c1: 1.494,
            c2: 1.494,
        }
    }
}

impl PsoParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if [self.inertia, self.c1, self.c2]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::invalid(
                "optimizer.pso",
                "inertia, c1 and c2 must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

pub(super) fn run<F>(run: &mut Run<'_, F>, cfg: &OptimizerConfig, initial: Vec<Vec<f64>>) -> Best
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let p = cfg.pso;
    let dim = run.space.dim();
    let vmax: Vec<f64> = (0..dim).map(|d| 0.5 * run.space.width(d)).collect();

    let mut x = initial;
    let mut v: Vec<Vec<f64>> = x
        .iter()
        .map(|_| {
            (0..dim)
                .map(|d| 0.2 * vmax[d] * run.rng.gen_range(-1.0..=1.0))
                .collect()
        })
        .collect();

    let fx = run.evaluate(&x);
    let mut pbest = x.clone();
    let mut pbest_f = fx;
    let mut g = 0;
    for i in 1..pbest_f.len() {
        if pbest_f[i] < pbest_f[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_f = pbest_f[g];

    for _ in 0..cfg.generations {
        for (xi, (vi, pi)) in x.iter_mut().zip(v.iter_mut().zip(&pbest)) {
            for d in 0..dim {
                let r1: f64 = run.rng.gen();
                let r2: f64 = run.rng.gen();
                let vel = p.inertia * vi[d]
                    + p.c1 * r1 * (pi[d] - xi[d])
                    + p.c2 * r2 * (gbest[d] - xi[d]);
                vi[d] = vel.clamp(-vmax[d], vmax[d]);
                xi[d] += vi[d];
            }
            run.space.clamp(xi);
        }
        let fx = run.evaluate(&x);
        for (i, &f) in fx.iter().enumerate() {
            if f < pbest_f[i] {
                pbest_f[i] = f;
                pbest[i].clone_from(&x[i]);
                if f < gbest_f {
                    gbest_f = f;
                    gbest.clone_from(&x[i]);
                }
            }
        }
        run.record(gbest_f, &fx);
    }
    Best(gbest, gbest_f)
}
