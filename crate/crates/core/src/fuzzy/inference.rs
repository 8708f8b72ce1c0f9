//! Mamdani (type-1) and interval type-2 inference engines.

use serde::{Deserialize, Serialize};

use super::km::{km_left, km_right};
use super::{It2Partition, Label, RuleBase, T1Partition};

/// Number of samples of the output universe used for defuzzification.
pub const OUTPUT_POINTS: usize = 201;

const HALF: usize = (OUTPUT_POINTS - 1) / 2;

/// Output sample `k`, exactly antisymmetric about the center sample.
#[inline]
fn grid_point(k: usize) -> f64 {
    (k as f64 - HALF as f64) / HALF as f64
}

type Table = [[f64; OUTPUT_POINTS]; 5];

fn tabulate(grade: impl Fn(usize, f64) -> f64) -> Box<Table> {
    let mut t = Box::new([[0.0; OUTPUT_POINTS]; 5]);
    for (l, row) in t.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = grade(l, grid_point(k));
        }
    }
    t
}

fn consequent_index(rules: &RuleBase) -> [[usize; 5]; 5] {
    let t = rules.table();
    std::array::from_fn(|i| std::array::from_fn(|j| t[i][j].index()))
}

/// Max over rules of `min(a_i, b_j)`, grouped by consequent label.
#[inline]
fn fire(cons: &[[usize; 5]; 5], a: &[f64; 5], b: &[f64; 5]) -> [f64; 5] {
    let mut f = [0.0f64; 5];
    for i in 0..5 {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..5 {
            let s = a[i].min(b[j]);
            let c = cons[i][j];
            if s > f[c] {
                f[c] = s;
            }
        }
    }
    f
}

#[inline]
fn aggregate(firing: &[f64; 5], table: &Table, k: usize) -> f64 {
    let mut g = 0.0f64;
    for l in 0..5 {
        let v = firing[l].min(table[l][k]);
        if v > g {
            g = v;
        }
    }
    g
}

/// Type-1 Mamdani controller: min conjunction and implication, max
/// aggregation, centroid defuzzification on [`OUTPUT_POINTS`] samples.
#[derive(Debug, Clone)]
pub struct T1System {
    cons: [[usize; 5]; 5],
    error: T1Partition,
    rate: T1Partition,
    output: Box<Table>,
}

impl T1System {
    pub fn new(
        rules: &RuleBase,
        error: T1Partition,
        rate: T1Partition,
        output: T1Partition,
    ) -> Self {
        Self {
            cons: consequent_index(rules),
            error,
            rate,
            output: tabulate(|l, y| output.grade(Label::ALL[l], y)),
        }
    }

    /// Crisp output in `[-1, 1]`; inputs are clipped to `[-1, 1]`. Returns 0 when nothing fires.
    pub fn infer(&self, e: f64, de: f64) -> f64 {
        let f = fire(
            &self.cons,
            &self.error.grades(e.clamp(-1.0, 1.0)),
            &self.rate.grades(de.clamp(-1.0, 1.0)),
        );
        // Mirrored samples are summed in pairs so the centroid is exactly odd
        // under mirrored firing.
        let mut num = 0.0;
        let mut den = aggregate(&f, &self.output, HALF);
        for k in 0..HALF {
            let lo = aggregate(&f, &self.output, k);
            let hi = aggregate(&f, &self.output, OUTPUT_POINTS - 1 - k);
            num += grid_point(OUTPUT_POINTS - 1 - k) * (hi - lo);
            den += lo + hi;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

/// How the interval type-2 output set is reduced to `[y_l, y_r]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeReduction {
    /// Karnik-Mendel over the sampled aggregated footprint. Collapses to the
    /// type-1 centroid when the footprint is empty.
    #[default]
    Centroid,
    /// Karnik-Mendel over rule firing intervals and the centroid intervals
    /// of the consequent sets.
    CenterOfSets,
}

/// Interval type-2 controller with Karnik-Mendel type reduction; the crisp
/// output is the midpoint of the reduced interval.
#[derive(Debug, Clone)]
pub struct It2System {
    cons: [[usize; 5]; 5],
    error: It2Partition,
    rate: It2Partition,
    lower: Box<Table>,
    upper: Box<Table>,
    reduction: TypeReduction,
    /// Centroid interval of each consequent label, used by center-of-sets.
    label_centroids: [(f64, f64); 5],
}

impl It2System {
    pub fn new(
        rules: &RuleBase,
        error: It2Partition,
        rate: It2Partition,
        output: It2Partition,
        reduction: TypeReduction,
    ) -> Self {
        let lower = tabulate(|l, y| output.grade(Label::ALL[l], y).0);
        let upper = tabulate(|l, y| output.grade(Label::ALL[l], y).1);
        let ys: Vec<f64> = (0..OUTPUT_POINTS).map(grid_point).collect();
        let label_centroids = std::array::from_fn(|l| {
            (
                km_left(&ys, &lower[l], &upper[l]),
                km_right(&ys, &lower[l], &upper[l]),
            )
        });
        Self {
            cons: consequent_index(rules),
            error,
            rate,
            lower,
            upper,
            reduction,
            label_centroids,
        }
    }

    /// Reduced interval `[y_l, y_r]`, or `None` when no rule fires.
    pub fn reduce(&self, e: f64, de: f64) -> Option<(f64, f64)> {
        let (el, eu) = self.error.grades(e.clamp(-1.0, 1.0));
        let (dl, du) = self.rate.grades(de.clamp(-1.0, 1.0));
        match self.reduction {
            TypeReduction::Centroid => {
                let fl = fire(&self.cons, &el, &dl);
                let fu = fire(&self.cons, &eu, &du);
                let mut c = [0.0; OUTPUT_POINTS];
                let mut lo = [0.0; OUTPUT_POINTS];
                let mut hi = [0.0; OUTPUT_POINTS];
                let mut n = 0;
                for k in 0..OUTPUT_POINTS {
                    let u = aggregate(&fu, &self.upper, k);
                    if u > 0.0 {
                        c[n] = grid_point(k);
                        lo[n] = aggregate(&fl, &self.lower, k);
                        hi[n] = u;
                        n += 1;
                    }
                }
                if n == 0 {
                    return None;
                }
                Some((
                    km_left(&c[..n], &lo[..n], &hi[..n]),
                    km_right(&c[..n], &lo[..n], &hi[..n]),
                ))
            }
            TypeReduction::CenterOfSets => {
                // Rules sharing a consequent share its centroid, so their
                // firing intervals add.
                let mut lo = [0.0; 5];
                let mut hi = [0.0; 5];
                for i in 0..5 {
                    for j in 0..5 {
                        let c = self.cons[i][j];
                        lo[c] += el[i].min(dl[j]);
                        hi[c] += eu[i].min(du[j]);
                    }
                }
                if hi.iter().all(|&h| h == 0.0) {
                    return None;
                }
                let cl: [f64; 5] = std::array::from_fn(|l| self.label_centroids[l].0);
                let cr: [f64; 5] = std::array::from_fn(|l| self.label_centroids[l].1);
                Some((km_left(&cl, &lo, &hi), km_right(&cr, &lo, &hi)))
            }
        }
    }

    /// Crisp output in `[-1, 1]`; 0 when nothing fires.
    pub fn infer(&self, e: f64, de: f64) -> f64 {
        match self.reduce(e, de) {
            Some((l, r)) => 0.5 * (l + r),
            None => 0.0,
        }
    }
}

/// One-shot type-1 inference with the same partition on both inputs.
pub fn t1_infer(
    rules: &RuleBase,
    input: &T1Partition,
    output: &T1Partition,
    e: f64,
    de: f64,
) -> f64 {
    T1System::new(rules, *input, *input, *output).infer(e, de)
}

/// One-shot interval type-2 inference (centroid type reduction) with the
/// same partition on both inputs.
pub fn it2_infer(
    rules: &RuleBase,
    input: &It2Partition,
    output: &It2Partition,
    e: f64,
    de: f64,
) -> f64 {
    It2System::new(rules, *input, *input, *output, TypeReduction::Centroid).infer(e, de)
}
