//! Closed-loop simulation, metrics, the tuning objective and comparison tables.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::controller::{
    ControllerGenome, ControllerOptions, ControllerState, Engine, FuzzyPid, GenomeBounds,
};
use crate::error::{Error, Result};
use crate::optim::{self, GenerationStats, OptResult, OptimizerConfig};
use crate::plant::{self, PlantState, RoadProfile, SuspensionParams};

/// Header of the trajectory CSV.
pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "x1", "x2", "v1", "v2", "a1", "u", "w"];
/// Header of the comparison CSV.
pub const COMPARISON_HEADER: [&str; 3] = ["controller", "step_mse", "sine_mse"];
/// Cell marker for a run that diverged.
pub const DIVERGED: &str = "diverged";

/// Settling band as a fraction of the final value.
pub const SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    Passive,
    Fuzzy {
        engine: Engine,
        genome: ControllerGenome,
        options: ControllerOptions,
    },
}

impl ControllerSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ControllerSpec::Passive => "passive",
            ControllerSpec::Fuzzy { engine, .. } => engine.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SuspensionParams,
    pub profile: RoadProfile,
    pub controller: ControllerSpec,
    pub dt: f64,
    pub horizon: f64,
}

impl SimConfig {
    pub fn passive(profile: RoadProfile) -> Self {
        Self {
            params: SuspensionParams::default(),
            profile,
            controller: ControllerSpec::Passive,
            dt: 1e-3,
            horizon: 10.0,
        }
    }

    /// Number of integration steps, `horizon / dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(
                "run.dt",
                format!("must be > 0, got {}", self.dt),
            ));
        }
        if !(self.horizon.is_finite() && self.horizon >= 1.0) {
            return Err(Error::invalid(
                "run.horizon",
                format!("must be >= 1 s, got {}", self.horizon),
            ));
        }
        let n = (self.horizon / self.dt).round();
        if ((n * self.dt) - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::invalid(
                "run.horizon",
                format!(
                    "{} is not an integer multiple of dt = {}",
                    self.horizon, self.dt
                ),
            ));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.profile.validate()?;
        if let ControllerSpec::Fuzzy {
            genome, options, ..
        } = &self.controller
        {
            genome.validate()?;
            options.validate()?;
        }
        self.steps().map(|_| ())
    }
}

/// Scalar summary of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse_x1: f64,
    pub mse_a1: f64,
    /// Largest `|x1|` [m].
    pub peak_x1: f64,
    /// Time after which `x1` stays inside the settling band; `None` if it never does.
    pub settling_time_x1: Option<f64>,
}

impl Metrics {
    pub fn from_series(t: &[f64], x1: &[f64], a1: &[f64]) -> Self {
        Self {
            mse_x1: mse(x1, 0.0),
            mse_a1: mse(a1, 0.0),
            peak_x1: peak_abs(x1),
            settling_time_x1: settling_time(t, x1),
        }
    }
}

/// Sampled closed-loop trajectory, one row per sample from `t = 0` to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub t: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// Sprung acceleration [m/s^2].
    pub a1: Vec<f64>,
    /// Applied actuator force [N].
    pub u: Vec<f64>,
    /// Road displacement [m].
    pub w: Vec<f64>,
    pub metrics: Metrics,
}

impl SimResult {
    fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            t: v(),
            x1: v(),
            x2: v(),
            v1: v(),
            v2: v(),
            a1: v(),
            u: v(),
            w: v(),
            metrics: Metrics {
                mse_x1: 0.0,
                mse_a1: 0.0,
                peak_x1: 0.0,
                settling_time_x1: None,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn recompute_metrics(&self) -> Metrics {
        Metrics::from_series(&self.t, &self.x1, &self.a1)
    }

    /// Trajectory CSV with header `t,x1,x2,v1,v2,a1,u,w`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRAJECTORY_HEADER)?;
        for i in 0..self.len() {
            let row = [
                self.t[i], self.x1[i], self.x2[i], self.v1[i], self.v2[i], self.a1[i], self.u[i],
                self.w[i],
            ];
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Mean squared deviation of `series` from `reference`; NaN for an empty series.
pub fn mse(series: &[f64], reference: f64) -> f64 {
    let sum: f64 = series
        .iter()
        .map(|v| (v - reference) * (v - reference))
        .sum();
    sum / series.len() as f64
}

fn peak_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Settling time of `x` into a band of [`SETTLING_BAND`] times its final
/// value. When the final value is below a tenth of the peak excursion (a
/// response regulated back to zero) the band is taken relative to the peak.
pub fn settling_time(t: &[f64], x: &[f64]) -> Option<f64> {
    let last = *x.last()?;
    let peak = peak_abs(x);
    let scale = if last.abs() >= 0.1 * peak {
        last.abs()
    } else {
        peak
    };
    let band = SETTLING_BAND * scale;
    match x.iter().rposition(|v| (v - last).abs() > band) {
        None => Some(t[0]),
        // Entering the band only at the final sample does not count.
        Some(i) if i + 2 < x.len() => Some(t[i + 1]),
        Some(_) => None,
    }
}

/// Run the plant with the configured controller from rest.
///
/// Each step reads `(x1, v1)`, computes the force (zero when passive),
/// records the sample, then advances one RK4 step holding the force.
pub fn run_closed_loop(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let n = cfg.steps()?;
    let p = &cfg.params;
    let controller = match &cfg.controller {
        ControllerSpec::Passive => None,
        ControllerSpec::Fuzzy {
            engine,
            genome,
            options,
        } => Some(FuzzyPid::new(*genome, *engine, options, p.f_max)?),
    };

    let mut out = SimResult::with_capacity(n + 1);
    let mut s = PlantState::REST;
    let mut cs = ControllerState::default();
    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        let force = match &controller {
            Some(c) => {
                let (f, next) = c.compute_force(&cs, s.x1, s.v1, cfg.dt)?;
                cs = next;
                p.saturate(f)
            }
            None => 0.0,
        };
        let (w, w_dot) = cfg.profile.eval(t);
        let d = plant::derivatives(p, &s, w, w_dot, force)?;

        out.t.push(t);
        out.x1.push(s.x1);
        out.x2.push(s.x2);
        out.v1.push(s.v1);
        out.v2.push(s.v2);
        out.a1.push(d[2]);
        out.u.push(force);
        out.w.push(w);

        if k < n {
            s = plant::rk4_step(p, &s, t, cfg.dt, force, &cfg.profile)?;
        }
    }
    out.metrics = out.recompute_metrics();
    Ok(out)
}

/// A disturbance scenario with everything but the controller genome fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SuspensionParams,
    pub profile: RoadProfile,
    pub options: ControllerOptions,
    pub dt: f64,
    pub horizon: f64,
    /// Weight of `mse_a1` added to `mse_x1` in the fitness.
    pub gamma: f64,
}

impl Scenario {
    pub fn new(profile: RoadProfile) -> Self {
        Self {
            params: SuspensionParams::default(),
            profile,
            options: ControllerOptions::default(),
            dt: 1e-3,
            horizon: 10.0,
            gamma: 0.0,
        }
    }

    pub fn sim_config(&self, controller: ControllerSpec) -> SimConfig {
        SimConfig {
            params: self.params,
            profile: self.profile,
            controller,
            dt: self.dt,
            horizon: self.horizon,
        }
    }

    pub fn fuzzy(&self, engine: Engine, genome: ControllerGenome) -> SimConfig {
        self.sim_config(ControllerSpec::Fuzzy {
            engine,
            genome,
            options: self.options,
        })
    }

    pub fn fitness(&self, m: &Metrics) -> f64 {
        if self.gamma == 0.0 {
            m.mse_x1
        } else {
            m.mse_x1 + self.gamma * m.mse_a1
        }
    }
}

/// Tuning fitness of `genome` on `scenario`: `mse_x1 (+ gamma mse_a1)`.
/// Invalid genomes and diverged runs score `+inf`.
pub fn objective(genome: &ControllerGenome, scenario: &Scenario, engine: Engine) -> f64 {
    match run_closed_loop(&scenario.fuzzy(engine, *genome)) {
        Ok(r) => scenario.fitness(&r.metrics),
        Err(_) => f64::INFINITY,
    }
}

/// Tune a controller on `scenario` over `bounds`.
pub fn tune(
    scenario: &Scenario,
    engine: Engine,
    bounds: &GenomeBounds,
    cfg: &OptimizerConfig,
    observer: &mut dyn FnMut(&GenerationStats),
) -> Result<(ControllerGenome, OptResult)> {
    let space = bounds.search_space()?;
    let f = |x: &[f64]| match ControllerGenome::from_slice(x) {
        Ok(g) => objective(&g, scenario, engine),
        Err(_) => f64::INFINITY,
    };
    let result = optim::optimize(&space, cfg, &f, observer)?;
    let genome = ControllerGenome::from_slice(&result.best_vector)?;
    Ok((genome, result))
}

/// What a comparison row runs.
#[derive(Debug, Clone, PartialEq)]
pub enum RowKind {
    Passive,
    Fixed {
        engine: Engine,
        genome: ControllerGenome,
    },
    /// Tuned once per replicate with seeds `optimizer.seed + r`.
    Optimized {
        engine: Engine,
        optimizer: OptimizerConfig,
        replicates: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub kind: RowKind,
}

/// Which disturbance optimized rows are tuned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Training {
    /// Tune on the step scenario, evaluate on both.
    #[default]
    Step,
    /// Tune on the sine scenario, evaluate on both.
    Sine,
    /// Tune separately for each scenario.
    PerScenario,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub step: Scenario,
    pub sine: Scenario,
    pub bounds: GenomeBounds,
    pub training: Training,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            step: Scenario::new(RoadProfile::DEFAULT_STEP),
            sine: Scenario::new(RoadProfile::DEFAULT_SINE),
            bounds: GenomeBounds::default(),
            training: Training::Step,
        }
    }
}

/// Which column of the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Step,
    Sine,
}

impl ScenarioKind {
    pub const BOTH: [ScenarioKind; 2] = [ScenarioKind::Step, ScenarioKind::Sine];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Step => "step",
            ScenarioKind::Sine => "sine",
        }
    }
}

/// One replicate's contribution to a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    /// `None` when the run diverged.
    pub mse: Option<f64>,
    pub genome: Option<ControllerGenome>,
    pub seed: Option<u64>,
}

/// One (row, scenario) entry of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Median fitness over replicates; `None` if it is a divergence.
    pub median: Option<f64>,
    pub replicates: Vec<Replicate>,
    /// Trajectory of the replicate holding the (lower) median.
    pub trajectory: Option<SimResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowOutcome {
    pub label: String,
    pub step: Cell,
    pub sine: Cell,
    /// Every optimizer run made for this row, in replicate order.
    pub runs: Vec<(ScenarioKind, OptResult)>,
}

impl RowOutcome {
    pub fn cell(&self, kind: ScenarioKind) -> &Cell {
        match kind {
            ScenarioKind::Step => &self.step,
            ScenarioKind::Sine => &self.sine,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<RowOutcome>,
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => DIVERGED.to_string(),
    }
}

impl ComparisonTable {
    /// CSV with header `controller,step_mse,sine_mse`; diverged cells read `diverged`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COMPARISON_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                fmt_cell(r.step.median),
                fmt_cell(r.sine.median),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Median with divergences ordered last; `None` if the median lands on one.
/// Returns the value and the index of the (lower) median replicate.
fn median(values: &[Option<f64>]) -> (Option<f64>, usize) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let key = |i: usize| values[i].unwrap_or(f64::INFINITY);
    idx.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
    let n = idx.len();
    let lo = idx[(n - 1) / 2];
    let hi = idx[n / 2];
    let m = 0.5 * (key(lo) + key(hi));
    (m.is_finite().then_some(m), lo)
}

fn evaluate(scenario: &Scenario, controller: ControllerSpec) -> (Option<f64>, Option<SimResult>) {
    match run_closed_loop(&scenario.sim_config(controller)) {
        Ok(r) => {
            let f = scenario.fitness(&r.metrics);
            (f.is_finite().then_some(f), Some(r))
        }
        Err(_) => (None, None),
    }
}

fn assemble(entries: Vec<(Replicate, Option<SimResult>)>) -> Cell {
    let values: Vec<Option<f64>> = entries.iter().map(|e| e.0.mse).collect();
    let (m, at) = median(&values);
    let mut trajectory = None;
    let mut replicates = Vec::with_capacity(entries.len());
    for (i, (rep, traj)) in entries.into_iter().enumerate() {
        if i == at {
            trajectory = traj;
        }
        replicates.push(rep);
    }
    Cell {
        median: m,
        replicates,
        trajectory,
    }
}

fn run_row(row: &CompareRow, opts: &CompareOptions) -> Result<RowOutcome> {
    let scenario = |k: ScenarioKind| match k {
        ScenarioKind::Step => &opts.step,
        ScenarioKind::Sine => &opts.sine,
    };
    let mut runs = Vec::new();
    let mut cells: Vec<Vec<(Replicate, Option<SimResult>)>> = vec![Vec::new(), Vec::new()];
    match &row.kind {
        RowKind::Passive => {
            for (c, k) in ScenarioKind::BOTH.iter().enumerate() {
                let (mse, traj) = evaluate(scenario(*k), ControllerSpec::Passive);
                cells[c].push((
                    Replicate {
                        mse,
                        genome: None,
                        seed: None,
                    },
                    traj,
                ));
            }
        }
        RowKind::Fixed { engine, genome } => {
            for (c, k) in ScenarioKind::BOTH.iter().enumerate() {
                let s = scenario(*k);
                let spec = ControllerSpec::Fuzzy {
                    engine: *engine,
                    genome: *genome,
                    options: s.options,
                };
                let (mse, traj) = evaluate(s, spec);
                cells[c].push((
                    Replicate {
                        mse,
                        genome: Some(*genome),
                        seed: None,
                    },
                    traj,
                ));
            }
        }
        RowKind::Optimized {
            engine,
            optimizer,
            replicates,
        } => {
            if *replicates == 0 {
                return Err(Error::invalid(
                    format!("compare.rows[{}].replicates", row.label),
                    "must be >= 1",
                ));
            }
            for r in 0..*replicates {
                let seed = optimizer.seed.wrapping_add(r as u64);
                let cfg = optimizer.clone().with_seed(seed);
                let trained: Vec<(ScenarioKind, ControllerGenome)> = match opts.training {
                    Training::Step | Training::Sine => {
                        let on = if opts.training == Training::Step {
                            ScenarioKind::Step
                        } else {
                            ScenarioKind::Sine
                        };
                        let (g, res) =
                            tune(scenario(on), *engine, &opts.bounds, &cfg, &mut |_| {})?;
                        runs.push((on, res));
                        ScenarioKind::BOTH.iter().map(|k| (*k, g)).collect()
                    }
                    Training::PerScenario => {
                        let mut v = Vec::new();
                        for k in ScenarioKind::BOTH {
                            let (g, res) =
                                tune(scenario(k), *engine, &opts.bounds, &cfg, &mut |_| {})?;
                            runs.push((k, res));
                            v.push((k, g));
                        }
                        v
                    }
                };
                for (c, (k, g)) in trained.into_iter().enumerate() {
                    let s = scenario(k);
                    let spec = ControllerSpec::Fuzzy {
                        engine: *engine,
                        genome: g,
                        options: s.options,
                    };
                    let (mse, traj) = evaluate(s, spec);
                    cells[c].push((
                        Replicate {
                            mse,
                            genome: Some(g),
                            seed: Some(seed),
                        },
                        traj,
                    ));
                }
            }
        }
    }
    let sine = assemble(cells.pop().unwrap_or_default());
    let step = assemble(cells.pop().unwrap_or_default());
    Ok(RowOutcome {
        label: row.label.clone(),
        step,
        sine,
        runs,
    })
}

/// Evaluate every row on the step and sine scenarios. `on_row` is called as
/// each row completes, in row order.
pub fn compare(
    rows: &[CompareRow],
    opts: &CompareOptions,
    on_row: &mut dyn FnMut(&RowOutcome),
) -> Result<ComparisonTable> {
    if rows.is_empty() {
        return Err(Error::invalid(
            "compare.rows",
            "at least one row is required",
        ));
    }
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let r = run_row(row, opts)?;
        on_row(&r);
        out.push(r);
    }
    Ok(ComparisonTable { rows: out })
}
