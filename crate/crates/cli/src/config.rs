//! The single JSON run document shared by every subcommand.

use std::path::{Path, PathBuf};

use qcar_core::controller::{ControllerGenome, ControllerOptions, Engine, GenomeBounds};
use qcar_core::fuzzy::TypeReduction;
use qcar_core::harness::{
    CompareOptions, CompareRow, ControllerSpec, RowKind, Scenario, SimConfig, Training,
};
use qcar_core::optim::{Algorithm, BboParams, GaParams, OptimizerConfig, PsoParams};
use qcar_core::plant::{RoadProfile, SuspensionParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub plant: SuspensionParams,
    /// Disturbance for `simulate` and the training scenario of `optimize`.
    pub road: Road,
    pub scenarios: Scenarios,
    pub controller: ControllerSection,
    pub optimizer: OptimizerSection,
    pub compare: CompareSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Road(pub RoadProfile);

impl Default for Road {
    fn default() -> Self {
        Road(RoadProfile::DEFAULT_STEP)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenarios {
    pub step: RoadProfile,
    pub sine: RoadProfile,
    /// Scenario optimized rows of `compare` are tuned on.
    pub training: Training,
}

impl Default for Scenarios {
    fn default() -> Self {
        Self {
            step: RoadProfile::DEFAULT_STEP,
            sine: RoadProfile::DEFAULT_SINE,
            training: Training::Step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    #[default]
    Passive,
    T1,
    It2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    pub kind: ControllerKind,
    pub genome: ControllerGenome,
    pub fou: f64,
    pub integ_max: f64,
    pub reduction: TypeReduction,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let o = ControllerOptions::default();
        Self {
            kind: ControllerKind::Passive,
            genome: ControllerGenome::default(),
            fou: o.fou,
            integ_max: o.integ_max,
            reduction: o.reduction,
        }
    }
}

impl ControllerSection {
    pub fn options(&self) -> ControllerOptions {
        ControllerOptions {
            fou: self.fou,
            integ_max: self.integ_max,
            reduction: self.reduction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    /// `bbo`, `pso` or `ga`.
    pub algorithm: String,
    pub engine: Engine,
    /// Defaults to 50 for BBO/GA and 30 for PSO.
    pub population: Option<usize>,
    pub generations: usize,
    pub seed: u64,
    /// Weight of `mse_a1` in the fitness.
    pub gamma: f64,
    pub bounds: GenomeBounds,
    pub bbo: BboParams,
    pub pso: PsoParams,
    pub ga: GaParams,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            algorithm: "bbo".into(),
            engine: Engine::T1,
            population: None,
            generations: 100,
            seed: 0,
            gamma: 0.0,
            bounds: GenomeBounds::default(),
            bbo: BboParams::default(),
            pso: PsoParams::default(),
            ga: GaParams::default(),
        }
    }
}

impl OptimizerSection {
    fn build(
        &self,
        algorithm: &str,
        population: Option<usize>,
        generations: Option<usize>,
    ) -> Result<OptimizerConfig, CliError> {
        let algorithm: Algorithm = algorithm.parse().map_err(CliError::from_core)?;
        let mut cfg = OptimizerConfig::new(algorithm);
        cfg.population = population
            .or(self.population)
            .unwrap_or(algorithm.default_population());
        cfg.generations = generations.unwrap_or(self.generations);
        cfg.seed = self.seed;
        cfg.bbo = self.bbo;
        cfg.pso = self.pso;
        cfg.ga = self.ga;
        cfg.validate().map_err(CliError::from_core)?;
        Ok(cfg)
    }

    pub fn config(&self) -> Result<OptimizerConfig, CliError> {
        self.build(&self.algorithm, None, None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RowSection {
    Passive {
        label: String,
    },
    Fixed {
        label: String,
        engine: Engine,
        genome: ControllerGenome,
    },
    /// Seeds come from `optimizer.seed`, incremented per replicate.
    Optimized {
        label: String,
        engine: Engine,
        algorithm: String,
        #[serde(default)]
        population: Option<usize>,
        #[serde(default)]
        generations: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub rows: Vec<RowSection>,
    /// Independent optimizer seeds per optimized row; cells report the median.
    pub replicates: usize,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            rows: Vec::new(),
            replicates: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub dt: f64,
    pub horizon: f64,
    pub out_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 10.0,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.optimizer.seed = seed;
        }
        if let Some(out) = &o.out {
            self.run.out_dir = out.clone();
        }
        if let Some(dt) = o.dt {
            self.run.dt = dt;
        }
        if let Some(h) = o.horizon {
            self.run.horizon = h;
        }
    }

    /// Checks every section that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        let core = |r: qcar_core::Result<()>| r.map_err(CliError::from_core);
        core(self.plant.validate())?;
        core(self.road.0.validate())?;
        core(self.scenarios.step.validate())?;
        core(self.scenarios.sine.validate())?;
        core(self.controller.options().validate())?;
        if self.controller.kind != ControllerKind::Passive {
            core(self.controller.genome.validate())?;
        }
        if !(self.optimizer.gamma.is_finite() && self.optimizer.gamma >= 0.0) {
            return Err(CliError::Config(
                "invalid `optimizer.gamma`: must be finite and >= 0".into(),
            ));
        }
        core(self.sim_config(self.road.0).steps().map(|_| ()))?;
        Ok(())
    }

    pub fn controller_spec(&self) -> ControllerSpec {
        let engine = match self.controller.kind {
            ControllerKind::Passive => return ControllerSpec::Passive,
            ControllerKind::T1 => Engine::T1,
            ControllerKind::It2 => Engine::It2,
        };
        ControllerSpec::Fuzzy {
            engine,
            genome: self.controller.genome,
            options: self.controller.options(),
        }
    }

    pub fn sim_config(&self, profile: RoadProfile) -> SimConfig {
        SimConfig {
            params: self.plant,
            profile,
            controller: self.controller_spec(),
            dt: self.run.dt,
            horizon: self.run.horizon,
        }
    }

    pub fn scenario(&self, profile: RoadProfile) -> Scenario {
        Scenario {
            params: self.plant,
            profile,
            options: self.controller.options(),
            dt: self.run.dt,
            horizon: self.run.horizon,
            gamma: self.optimizer.gamma,
        }
    }

    pub fn compare_options(&self) -> CompareOptions {
        CompareOptions {
            step: self.scenario(self.scenarios.step),
            sine: self.scenario(self.scenarios.sine),
            bounds: self.optimizer.bounds,
            training: self.scenarios.training,
        }
    }

    pub fn compare_rows(&self) -> Result<Vec<CompareRow>, CliError> {
        if self.compare.rows.is_empty() {
            return Err(CliError::Config(
                "invalid `compare.rows`: at least one row is required".into(),
            ));
        }
        if self.compare.replicates == 0 {
            return Err(CliError::Config(
                "invalid `compare.replicates`: must be >= 1".into(),
            ));
        }
        let mut rows = Vec::with_capacity(self.compare.rows.len());
        for r in &self.compare.rows {
            rows.push(match r {
                RowSection::Passive { label } => CompareRow {
                    label: label.clone(),
                    kind: RowKind::Passive,
                },
                RowSection::Fixed {
                    label,
                    engine,
                    genome,
                } => {
                    genome.validate().map_err(CliError::from_core)?;
                    CompareRow {
                        label: label.clone(),
                        kind: RowKind::Fixed {
                            engine: *engine,
                            genome: *genome,
                        },
                    }
                }
                RowSection::Optimized {
                    label,
                    engine,
                    algorithm,
                    population,
                    generations,
                } => CompareRow {
                    label: label.clone(),
                    kind: RowKind::Optimized {
                        engine: *engine,
                        optimizer: self.optimizer.build(algorithm, *population, *generations)?,
                        replicates: self.compare.replicates,
                    },
                },
            });
        }
        Ok(rows)
    }
}
