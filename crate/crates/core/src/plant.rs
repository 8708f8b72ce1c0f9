//! Quarter-car vertical dynamics.
//!
//! Two masses stacked on springs and dampers: the sprung body `m1` rides on
//! the suspension (`k1`, `b1`) above the unsprung wheel `m2`, which rides on
//! the tire (`k2`, `b2`) above the road displacement `w`. An ideal actuator
//! between the masses pushes the body up with `+F` and the wheel down with
//! `-F`.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of one vehicle corner plus the actuator force limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuspensionParams {
    /// Sprung mass [kg].
    pub m1: f64,
    /// Unsprung mass [kg].
    pub m2: f64,
    /// Suspension spring [N/m].
    pub k1: f64,
    /// Tire spring [N/m].
    pub k2: f64,
    /// Suspension damping [N s/m].
    pub b1: f64,
    /// Tire damping [N s/m].
    pub b2: f64,
    /// Actuator saturation [N]. Zero makes the suspension passive.
    pub f_max: f64,
}

impl Default for SuspensionParams {
    fn default() -> Self {
        Self {
            m1: 466.5,
            m2: 49.8,
            k1: 5700.0,
            k2: 135_000.0,
            b1: 290.0,
            b2: 1400.0,
            f_max: 2000.0,
        }
    }
}

impl SuspensionParams {
    pub fn validate(&self) -> Result<()> {
        let physical = [
            ("plant.m1", self.m1),
            ("plant.m2", self.m2),
            ("plant.k1", self.k1),
            ("plant.k2", self.k2),
            ("plant.b1", self.b1),
            ("plant.b2", self.b2),
        ];
        for (name, v) in physical {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.f_max.is_finite() && self.f_max >= 0.0) {
            return Err(Error::invalid(
                "plant.f_max",
                format!("must be finite and >= 0, got {}", self.f_max),
            ));
        }
        Ok(())
    }

    /// Clamp an actuator command to `[-f_max, f_max]`.
    pub fn saturate(&self, force: f64) -> f64 {
        force.clamp(-self.f_max, self.f_max)
    }

    /// Passive state matrix `A` in `d/dt [x1, x2, v1, v2] = A [x1, x2, v1, v2]`
    /// (zero road, zero force), recovered column by column from [`derivatives`].
    pub fn system_matrix(&self) -> Matrix4<f64> {
        let mut a = Matrix4::zeros();
        for j in 0..4 {
            let mut basis = [0.0; 4];
            basis[j] = 1.0;
            let s = PlantState::from_array(basis);
            let d = rates(self, &s, 0.0, 0.0, 0.0);
            for (i, di) in d.iter().enumerate() {
                a[(i, j)] = *di;
            }
        }
        a
    }

    /// Undamped natural frequencies `|lambda| / 2 pi` [Hz] of the two passive
    /// modes, ascending (body mode, wheel mode).
    pub fn modal_frequencies(&self) -> [f64; 2] {
        let eig = self.system_matrix().complex_eigenvalues();
        let mut f: Vec<f64> = eig
            .iter()
            .filter(|l| l.im > 0.0)
            .map(|l| l.norm() / (2.0 * PI))
            .collect();
        f.sort_by(f64::total_cmp);
        // Both modes of the Table-range parameters are underdamped; an
        // overdamped mode reports as 0 Hz.
        while f.len() < 2 {
            f.insert(0, 0.0);
        }
        [f[0], f[1]]
    }
}

/// Mechanical state of the quarter car.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// Sprung displacement [m].
    pub x1: f64,
    /// Unsprung displacement [m].
    pub x2: f64,
    /// Sprung velocity [m/s].
    pub v1: f64,
    /// Unsprung velocity [m/s].
    pub v2: f64,
}

impl PlantState {
    pub const REST: PlantState = PlantState {
        x1: 0.0,
        x2: 0.0,
        v1: 0.0,
        v2: 0.0,
    };

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            x1: a[0],
            x2: a[1],
            v1: a[2],
            v2: a[3],
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.v1, self.v2]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    fn offset(self, d: &[f64; 4], h: f64) -> Self {
        Self {
            x1: self.x1 + h * d[0],
            x2: self.x2 + h * d[1],
            v1: self.v1 + h * d[2],
            v2: self.v2 + h * d[3],
        }
    }

    /// Kinetic plus spring potential energy [J], measured from rest with zero road.
    pub fn mechanical_energy(&self, p: &SuspensionParams) -> f64 {
        let defl = self.x1 - self.x2;
        0.5 * p.m1 * self.v1 * self.v1
            + 0.5 * p.m2 * self.v2 * self.v2
            + 0.5 * p.k1 * defl * defl
            + 0.5 * p.k2 * self.x2 * self.x2
    }
}

/// Road surface disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RoadProfile {
    /// `w(t) = amplitude` for `t >= start_time`, zero before.
    Step {
        amplitude: f64,
        #[serde(default)]
        start_time: f64,
    },
    /// `w(t) = amplitude * sin(2 pi frequency t)`.
    Sine { amplitude: f64, frequency: f64 },
}

impl RoadProfile {
    pub const DEFAULT_STEP: RoadProfile = RoadProfile::Step {
        amplitude: 0.1,
        start_time: 0.0,
    };
    pub const DEFAULT_SINE: RoadProfile = RoadProfile::Sine {
        amplitude: 0.05,
        frequency: 1.0,
    };

    /// Flat road.
    pub fn flat() -> Self {
        RoadProfile::Step {
            amplitude: 0.0,
            start_time: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RoadProfile::Step {
                amplitude,
                start_time,
            } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Error::invalid("road.amplitude", "must be finite and >= 0"));
                }
                if !(start_time.is_finite() && start_time >= 0.0) {
                    return Err(Error::invalid("road.start_time", "must be finite and >= 0"));
                }
            }
            RoadProfile::Sine {
                amplitude,
                frequency,
            } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Error::invalid("road.amplitude", "must be finite and >= 0"));
                }
                if !(frequency.is_finite() && frequency > 0.0) {
                    return Err(Error::invalid("road.frequency", "must be finite and > 0"));
                }
            }
        }
        Ok(())
    }

    /// Road displacement and velocity at time `t`.
    ///
    /// The step's velocity is taken as zero everywhere, including at the jump;
    /// the discontinuity reaches the wheel through the tire spring only.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            RoadProfile::Step {
                amplitude,
                start_time,
            } => {
                let w = if t >= start_time { amplitude } else { 0.0 };
                (w, 0.0)
            }
            RoadProfile::Sine {
                amplitude,
                frequency,
            } => {
                let omega = 2.0 * PI * frequency;
                let (s, c) = (omega * t).sin_cos();
                (amplitude * s, omega * amplitude * c)
            }
        }
    }
}

/// Unchecked right-hand side, shared by [`derivatives`] and the matrix probe.
#[inline]
fn rates(p: &SuspensionParams, s: &PlantState, w: f64, w_dot: f64, force: f64) -> [f64; 4] {
    let susp = p.b1 * (s.v1 - s.v2) + p.k1 * (s.x1 - s.x2);
    let tire = p.b2 * (s.v2 - w_dot) + p.k2 * (s.x2 - w);
    [
        s.v1,
        s.v2,
        (-susp + force) / p.m1,
        (susp - tire - force) / p.m2,
    ]
}

/// Time derivative `(x1', x2', v1', v2')` of the plant state.
///
/// `force` is the actuator command, already saturated by the caller.
pub fn derivatives(
    p: &SuspensionParams,
    s: &PlantState,
    w: f64,
    w_dot: f64,
    force: f64,
) -> Result<[f64; 4]> {
    if !(s.is_finite() && w.is_finite() && w_dot.is_finite() && force.is_finite()) {
        return Err(Error::Divergence("non-finite plant input"));
    }
    let d = rates(p, s, w, w_dot, force);
    if d.iter().all(|v| v.is_finite()) {
        Ok(d)
    } else {
        Err(Error::Divergence("non-finite plant derivative"))
    }
}

/// One classical RK4 step of length `dt` from time `t`, holding `force`
/// constant across the step and sampling the road at `t`, `t + dt/2`, `t + dt`.
pub fn rk4_step(
    p: &SuspensionParams,
    s: &PlantState,
    t: f64,
    dt: f64,
    force: f64,
    profile: &RoadProfile,
) -> Result<PlantState> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    if !(s.is_finite() && force.is_finite()) {
        return Err(Error::Divergence("non-finite plant input"));
    }
    let (w0, wd0) = profile.eval(t);
    let (wh, wdh) = profile.eval(t + 0.5 * dt);
    let (w1, wd1) = profile.eval(t + dt);

    let k1 = rates(p, s, w0, wd0, force);
    let k2 = rates(p, &s.offset(&k1, 0.5 * dt), wh, wdh, force);
    let k3 = rates(p, &s.offset(&k2, 0.5 * dt), wh, wdh, force);
    let k4 = rates(p, &s.offset(&k3, dt), w1, wd1, force);

    let mut incr = [0.0; 4];
    for i in 0..4 {
        incr[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    let next = s.offset(&incr, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Divergence("non-finite state after integration step"))
    }
}
