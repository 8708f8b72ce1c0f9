//! Quarter-car active suspension toolkit.
//!
//! The crate closes the loop between a two-mass suspension plant and a fuzzy
//! PID controller (type-1 or interval type-2), and tunes the controller with
//! population metaheuristics (BBO, PSO, GA) against a mean-squared-error
//! objective under step and sine road disturbances.
//!
//! Modules, bottom-up:
//!
//! * [`plant`]: vehicle dynamics, road profiles and the RK4 integrator.
//! * [`fuzzy`]: membership partitions, the 25-rule base, Mamdani and
//!   Karnik-Mendel inference.
//! * [`controller`]: the fuzzy PID wrapper that produces actuator force.
//! * [`optim`]: seeded BBO, PSO and GA over a box-constrained vector.
//! * [`harness`]: closed-loop runs, metrics, the tuning objective and
//!   comparison tables.

pub mod controller;
pub mod error;
pub mod fuzzy;
pub mod harness;
pub mod optim;
pub mod plant;

pub use error::{Error, Result};
pub use fuzzy::{It2Partition, Label, RuleBase, T1Partition, TypeReduction};
pub use harness::{
    compare, mse, objective, run_closed_loop, tune, CompareOptions, CompareRow, ComparisonTable,
    ControllerSpec, Metrics, RowKind, Scenario, ScenarioKind, SimConfig, SimResult, Training,
};

pub use controller::{
    ControllerGenome, ControllerOptions, ControllerState, Engine, FuzzyPid, GenomeBounds,
};
pub use optim::{Algorithm, OptResult, OptimizerConfig, SearchSpace};
pub use plant::{PlantState, RoadProfile, SuspensionParams};
