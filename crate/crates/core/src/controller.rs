//! Fuzzy PID suspension controller.
//!
//! The body displacement error and its rate are scaled into the fuzzy
//! universe, a PD-like fuzzy surface produces `u_f`, and the actuator command
//! blends the direct path with its running integral:
//!
//! ```text
//! force = sat(ku * (alpha * u_f + (1 - alpha) * integral(u_f)), f_max)
//! ```
//!
//! so the two blend coefficients always sum to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{It2Partition, It2System, RuleBase, T1Partition, T1System, TypeReduction};
use crate::optim::SearchSpace;

/// Which fuzzy inference engine drives the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    T1,
    It2,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::T1 => "t1",
            Engine::It2 => "it2",
        }
    }
}

/// Tunable controller parameters; the optimizers see them as a flat
/// 7-vector in field order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGenome {
    /// Error gain [1/m].
    pub ke: f64,
    /// Error-rate gain [s/m].
    pub kde: f64,
    /// Output gain [N].
    pub ku: f64,
    /// Weight of the direct path; the integral path gets `1 - alpha`.
    pub alpha: f64,
    /// Spread of the error partition.
    pub s_e: f64,
    /// Spread of the error-rate partition.
    pub s_de: f64,
    /// Spread of the output partition.
    pub s_u: f64,
}

impl Default for ControllerGenome {
    fn default() -> Self {
        Self {
            ke: 10.0,
            kde: 1.0,
            ku: 1000.0,
            alpha: 0.5,
            s_e: 1.0,
            s_de: 1.0,
            s_u: 1.0,
        }
    }
}

impl ControllerGenome {
    pub const LEN: usize = 7;
    pub const FIELDS: [&'static str; 7] = ["ke", "kde", "ku", "alpha", "s_e", "s_de", "s_u"];

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.ke, self.kde, self.ku, self.alpha, self.s_e, self.s_de, self.s_u,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != Self::LEN {
            return Err(Error::invalid(
                "genome",
                format!("expected {} values, got {}", Self::LEN, v.len()),
            ));
        }
        let g = Self {
            ke: v[0],
            kde: v[1],
            ku: v[2],
            alpha: v[3],
            s_e: v[4],
            s_de: v[5],
            s_u: v[6],
        };
        g.validate()?;
        Ok(g)
    }

    /// The two blend coefficients `(alpha, 1 - alpha)`.
    pub fn blend(&self) -> (f64, f64) {
        (self.alpha, 1.0 - self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("ke", self.ke), ("kde", self.kde), ("ku", self.ku)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    format!("genome.{name}"),
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(
                "genome.alpha",
                format!("must lie in [0, 1], got {}", self.alpha),
            ));
        }
        for (name, v) in [("s_e", self.s_e), ("s_de", self.s_de), ("s_u", self.s_u)] {
            if !(0.5..=2.0).contains(&v) {
                return Err(Error::invalid(
                    format!("genome.{name}"),
                    format!("must lie in [0.5, 2], got {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// Per-field search box for controller tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenomeBounds {
    pub lower: ControllerGenome,
    pub upper: ControllerGenome,
}

impl Default for GenomeBounds {
    fn default() -> Self {
        Self {
            lower: ControllerGenome {
                ke: 1.0,
                kde: 0.1,
                ku: 1e-3,
                alpha: 0.0,
                s_e: 0.5,
                s_de: 0.5,
                s_u: 0.5,
            },
            upper: ControllerGenome {
                ke: 100.0,
                kde: 20.0,
                ku: 3000.0,
                alpha: 1.0,
                s_e: 2.0,
                s_de: 2.0,
                s_u: 2.0,
            },
        }
    }
}

impl GenomeBounds {
    pub fn search_space(&self) -> Result<SearchSpace> {
        let space = SearchSpace::new(self.lower.to_vec(), self.upper.to_vec())?;
        self.lower.validate()?;
        self.upper.validate()?;
        Ok(space)
    }
}

/// Integrator memory carried between control steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    /// Running integral of the fuzzy output.
    pub integ: f64,
    /// Last error sample [m].
    pub prev_error: f64,
}

/// Settings outside the tuned genome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerOptions {
    /// Footprint of uncertainty for the type-2 engine.
    pub fou: f64,
    /// Anti-windup clamp on the integral path.
    pub integ_max: f64,
    pub reduction: TypeReduction,
}

impl Default for ControllerOptions {
    fn default() -> Self {
        Self {
            fou: It2Partition::DEFAULT_FOU,
            integ_max: 10.0,
            reduction: TypeReduction::Centroid,
        }
    }
}

impl ControllerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.fou.is_finite() && (0.0..1.0).contains(&self.fou)) {
            return Err(Error::invalid(
                "controller.fou",
                format!("must lie in [0, 1), got {}", self.fou),
            ));
        }
        if !(self.integ_max.is_finite() && self.integ_max >= 0.0) {
            return Err(Error::invalid(
                "controller.integ_max",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Surface {
    T1(T1System),
    It2(It2System),
}

/// A ready-to-run controller: genome plus prebuilt inference tables.
#[derive(Debug, Clone)]
pub struct FuzzyPid {
    genome: ControllerGenome,
    surface: Surface,
    f_max: f64,
    integ_max: f64,
}

impl FuzzyPid {
    pub fn new(
        genome: ControllerGenome,
        engine: Engine,
        options: &ControllerOptions,
        f_max: f64,
    ) -> Result<Self> {
        genome.validate()?;
        options.validate()?;
        let rules = RuleBase::standard();
        let surface = match engine {
            Engine::T1 => Surface::T1(T1System::new(
                &rules,
                T1Partition::new(genome.s_e)?,
                T1Partition::new(genome.s_de)?,
                T1Partition::new(genome.s_u)?,
            )),
            Engine::It2 => Surface::It2(It2System::new(
                &rules,
                It2Partition::new(genome.s_e, options.fou)?,
                It2Partition::new(genome.s_de, options.fou)?,
                It2Partition::new(genome.s_u, options.fou)?,
                options.reduction,
            )),
        };
        Ok(Self {
            genome,
            surface,
            f_max,
            integ_max: options.integ_max,
        })
    }

    pub fn genome(&self) -> &ControllerGenome {
        &self.genome
    }

    pub fn engine(&self) -> Engine {
        match self.surface {
            Surface::T1(_) => Engine::T1,
            Surface::It2(_) => Engine::It2,
        }
    }

    /// Fuzzy surface output for already-normalized inputs.
    pub fn surface(&self, e: f64, de: f64) -> f64 {
        match &self.surface {
            Surface::T1(s) => s.infer(e, de),
            Surface::It2(s) => s.infer(e, de),
        }
    }

    /// Upper bound on `|force|` for any state.
    pub fn force_bound(&self) -> f64 {
        let (a, b) = self.genome.blend();
        self.f_max.min(self.genome.ku * (a + b * self.integ_max))
    }

    /// One control update from the measured body displacement and velocity.
    pub fn compute_force(
        &self,
        st: &ControllerState,
        x1: f64,
        v1: f64,
        dt: f64,
    ) -> Result<(f64, ControllerState)> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if !(x1.is_finite() && v1.is_finite() && st.integ.is_finite()) {
            return Err(Error::Divergence("non-finite controller input"));
        }
        let g = &self.genome;
        let e = -x1;
        let de = -v1;
        let u = self.surface((g.ke * e).clamp(-1.0, 1.0), (g.kde * de).clamp(-1.0, 1.0));
        let integ = (st.integ + u * dt).clamp(-self.integ_max, self.integ_max);
        let (a, b) = g.blend();
        let force = (g.ku * (a * u + b * integ)).clamp(-self.f_max, self.f_max);
        Ok((
            force,
            ControllerState {
                integ,
                prev_error: e,
            },
        ))
    }
}

/// One-shot control update; builds the inference tables on every call.
#[allow(clippy::too_many_arguments)]
pub fn compute_force(
    genome: &ControllerGenome,
    st: &ControllerState,
    x1: f64,
    v1: f64,
    dt: f64,
    engine: Engine,
    options: &ControllerOptions,
    f_max: f64,
) -> Result<(f64, ControllerState)> {
    FuzzyPid::new(*genome, engine, options, f_max)?.compute_force(st, x1, v1, dt)
}
