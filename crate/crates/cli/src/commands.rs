use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qcar_core::harness::{self, ControllerSpec, ScenarioKind, SimResult};
use serde::Serialize;

use crate::config::{ControllerKind, Overrides, RunConfig};
use crate::CliError;

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_trajectory(dir: &Path, name: &str, r: &SimResult) -> Result<(), CliError> {
    r.write_csv(out_file(dir, name)?)
        .map_err(CliError::from_core)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut f = out_file(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Filesystem-safe version of a row label.
fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn simulate(path: &Path, o: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::load(path, o)?;
    let r = harness::run_closed_loop(&cfg.sim_config(cfg.road.0)).map_err(CliError::from_core)?;
    let dir = &cfg.run.out_dir;
    write_trajectory(dir, "trajectory.csv", &r)?;
    write_json(dir, "metrics.json", &r.metrics)?;
    writeln!(
        out,
        "mse_x1={} mse_a1={} peak_x1={} samples={}",
        r.metrics.mse_x1,
        r.metrics.mse_a1,
        r.metrics.peak_x1,
        r.len()
    )?;
    Ok(())
}

pub fn optimize(path: &Path, o: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::load(path, o)?;
    let opt = cfg.optimizer.config()?;
    let engine = cfg.optimizer.engine;
    let training = cfg.scenario(cfg.road.0);

    writeln!(out, "generation\tbest\tmean")?;
    let (genome, result) =
        harness::tune(&training, engine, &cfg.optimizer.bounds, &opt, &mut |s| {
            let _ = writeln!(out, "{}\t{}\t{}", s.generation, s.best, s.mean);
        })
        .map_err(CliError::from_core)?;

    let dir = &cfg.run.out_dir;
    write_json(dir, "opt_result.json", &result)?;

    // A ready-made `simulate` document for the tuned controller on the training road.
    let mut best = cfg.clone();
    best.controller.kind = match engine {
        qcar_core::Engine::T1 => ControllerKind::T1,
        qcar_core::Engine::It2 => ControllerKind::It2,
    };
    best.controller.genome = genome;
    best.compare = Default::default();
    write_json(dir, "best_config.json", &best)?;

    let spec = ControllerSpec::Fuzzy {
        engine,
        genome,
        options: cfg.controller.options(),
    };
    for (name, profile) in [("step", cfg.scenarios.step), ("sine", cfg.scenarios.sine)] {
        let mut sim = cfg.sim_config(profile);
        sim.controller = spec.clone();
        let r = harness::run_closed_loop(&sim).map_err(CliError::from_core)?;
        write_trajectory(dir, &format!("trajectory_{name}.csv"), &r)?;
    }
    writeln!(
        out,
        "best_fitness={} evaluations={} genome={}",
        result.best_fitness,
        result.evaluations,
        serde_json::to_string(&genome).unwrap_or_default()
    )?;
    Ok(())
}

#[derive(Serialize)]
struct RunRecord<'a> {
    row: &'a str,
    trained_on: ScenarioKind,
    result: &'a qcar_core::OptResult,
}

pub fn compare(path: &Path, o: &Overrides, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::load(path, o)?;
    let rows = cfg.compare_rows()?;
    let opts = cfg.compare_options();
    let table = harness::compare(&rows, &opts, &mut |r| {
        let show =
            |v: Option<f64>| v.map_or_else(|| harness::DIVERGED.to_string(), |x| x.to_string());
        let _ = writeln!(
            out,
            "{}: step={} sine={}",
            r.label,
            show(r.step.median),
            show(r.sine.median)
        );
    })
    .map_err(CliError::from_core)?;

    let dir = &cfg.run.out_dir;
    table
        .write_csv(out_file(dir, "comparison.csv")?)
        .map_err(CliError::from_core)?;

    let cells: PathBuf = dir.join("cells");
    let mut records = Vec::new();
    for row in &table.rows {
        for kind in ScenarioKind::BOTH {
            if let Some(traj) = &row.cell(kind).trajectory {
                write_trajectory(
                    &cells,
                    &format!("{}_{}.csv", slug(&row.label), kind.name()),
                    traj,
                )?;
            }
        }
        records.extend(row.runs.iter().map(|(k, r)| RunRecord {
            row: &row.label,
            trained_on: *k,
            result: r,
        }));
    }
    write_json(dir, "compare_runs.json", &records)?;
    Ok(())
}
