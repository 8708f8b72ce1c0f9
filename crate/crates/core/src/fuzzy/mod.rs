//! Two-input, one-output fuzzy inference over five linguistic labels.
//!
//! Inputs and output live on the normalized universe `[-1, 1]`. Each label is
//! a triangle with apex on the uniform grid `{-1, -0.5, 0, 0.5, 1}`; the outer
//! labels are shouldered. A spread factor scales every triangle's foot
//! distance about its apex, and the interval type-2 partition widens
//! (upper) and narrows (lower) the feet by a footprint-of-uncertainty ratio.

mod inference;
mod km;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use inference::{it2_infer, t1_infer, It2System, T1System, TypeReduction, OUTPUT_POINTS};
pub use km::km_type_reduce;

/// Linguistic label, ordered `NB < N < Z < P < PB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    NB,
    N,
    Z,
    P,
    PB,
}

impl Label {
    pub const ALL: [Label; 5] = [Label::NB, Label::N, Label::Z, Label::P, Label::PB];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Self::ALL.get(i).copied()
    }

    /// Mirror through `Z`.
    pub fn negate(self) -> Label {
        Self::ALL[4 - self.index()]
    }

    /// Apex position before any spread scaling.
    pub fn apex(self) -> f64 {
        APEXES[self.index()]
    }
}

const APEXES: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Foot distance of every triangle at spread 1.
const BASE_HALF_WIDTH: f64 = 0.5;

/// Grade of a shared-apex triangle with the given foot distance.
#[inline]
fn triangle(label: usize, half_width: f64, u: f64) -> f64 {
    let apex = APEXES[label];
    if (label == 0 && u <= apex) || (label == 4 && u >= apex) {
        return 1.0;
    }
    if half_width <= 0.0 {
        return if u == apex { 1.0 } else { 0.0 };
    }
    (1.0 - (u - apex).abs() / half_width).max(0.0)
}

fn check_spread(field: &str, spread: f64) -> Result<()> {
    if spread.is_finite() && spread > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("spread must be finite and > 0, got {spread}"),
        ))
    }
}

/// Type-1 partition of five triangular labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct T1Partition {
    pub spread: f64,
}

impl Default for T1Partition {
    fn default() -> Self {
        Self { spread: 1.0 }
    }
}

impl T1Partition {
    pub fn new(spread: f64) -> Result<Self> {
        check_spread("spread", spread)?;
        Ok(Self { spread })
    }

    pub fn half_width(&self) -> f64 {
        BASE_HALF_WIDTH * self.spread
    }

    /// `(left foot, apex, right foot)`; the shoulder side of NB/PB is reported at the apex.
    pub fn triangle(&self, label: Label) -> (f64, f64, f64) {
        let a = label.apex();
        let h = self.half_width();
        let left = if label == Label::NB { a } else { a - h };
        let right = if label == Label::PB { a } else { a + h };
        (left, a, right)
    }

    /// Membership grade of `u` (expected inside `[-1, 1]`).
    pub fn grade(&self, label: Label, u: f64) -> f64 {
        triangle(label.index(), self.half_width(), u)
    }

    pub(crate) fn grades(&self, u: f64) -> [f64; 5] {
        let h = self.half_width();
        std::array::from_fn(|i| triangle(i, h, u))
    }
}

/// Interval type-2 partition: each label is a (lower, upper) pair of
/// triangles sharing an apex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct It2Partition {
    pub spread: f64,
    /// Footprint of uncertainty in `[0, 1)`: upper feet at `h (1 + fou)`, lower at `h (1 - fou)`.
    pub fou: f64,
}

impl Default for It2Partition {
    fn default() -> Self {
        Self {
            spread: 1.0,
            fou: It2Partition::DEFAULT_FOU,
        }
    }
}

impl It2Partition {
    pub const DEFAULT_FOU: f64 = 0.15;

    pub fn new(spread: f64, fou: f64) -> Result<Self> {
        check_spread("spread", spread)?;
        if !(fou.is_finite() && (0.0..1.0).contains(&fou)) {
            return Err(Error::invalid(
                "fou",
                format!("must lie in [0, 1), got {fou}"),
            ));
        }
        Ok(Self { spread, fou })
    }

    /// The type-1 partition obtained at zero footprint.
    pub fn embedded(&self) -> T1Partition {
        T1Partition {
            spread: self.spread,
        }
    }

    fn widths(&self) -> (f64, f64) {
        let h = BASE_HALF_WIDTH * self.spread;
        (h * (1.0 - self.fou), h * (1.0 + self.fou))
    }

    /// `(lower, upper)` grade of `u`.
    pub fn grade(&self, label: Label, u: f64) -> (f64, f64) {
        let (lo, hi) = self.widths();
        (
            triangle(label.index(), lo, u),
            triangle(label.index(), hi, u),
        )
    }

    pub(crate) fn grades(&self, u: f64) -> ([f64; 5], [f64; 5]) {
        let (lo, hi) = self.widths();
        (
            std::array::from_fn(|i| triangle(i, lo, u)),
            std::array::from_fn(|i| triangle(i, hi, u)),
        )
    }
}

/// 5x5 rule matrix indexed `[error label][error-derivative label]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleBase {
    table: [[Label; 5]; 5],
}

impl Default for RuleBase {
    fn default() -> Self {
        Self::standard()
    }
}

impl RuleBase {
    /// The 25-rule PD table used by the suspension controller.
    pub fn standard() -> Self {
        use Label::*;
        Self {
            table: [
                [NB, NB, N, N, Z],
                [NB, N, N, Z, P],
                [N, N, Z, P, P],
                [N, Z, P, P, PB],
                [Z, P, P, PB, PB],
            ],
        }
    }

    pub fn from_table(table: [[Label; 5]; 5]) -> Self {
        Self { table }
    }

    pub fn consequent(&self, error: Label, error_rate: Label) -> Label {
        self.table[error.index()][error_rate.index()]
    }

    pub fn table(&self) -> &[[Label; 5]; 5] {
        &self.table
    }

    /// `rule(i, j) == -rule(4 - i, 4 - j)` for every cell.
    pub fn is_point_symmetric(&self) -> bool {
        (0..5).all(|i| (0..5).all(|j| self.table[i][j] == self.table[4 - i][4 - j].negate()))
    }
}
