use std::fmt;

use serde::{Deserialize, Serialize};

use crate::series::TimeSeries;

/// Weighting control function `h(t, x) ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HKind {
    /// `t / T`
    Id,
    /// Normalised cumulative absolute increments.
    L1,
    /// Normalised cumulative squared increments.
    L2,
}

impl fmt::Display for HKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HKind::Id => "id",
            HKind::L1 => "l1",
            HKind::L2 => "l2",
        })
    }
}

/// Cumulative increment mass: entry `t` is `Σ_{r=2..t} |δx_r|` (L1) or
/// `Σ |δx_r|²` (L2), summed over dimensions. `Id` counts time steps minus one.
pub fn increment_mass(kind: HKind, x: &TimeSeries) -> Vec<f64> {
    let len = x.len();
    let mut step = vec![0.0; len];
    match kind {
        HKind::Id => step.iter_mut().skip(1).for_each(|s| *s = 1.0),
        HKind::L1 | HKind::L2 => {
            for row in x.dims() {
                for t in 1..len {
                    let d = (row[t] - row[t - 1]).abs();
                    step[t] += if kind == HKind::L1 { d } else { d * d };
                }
            }
        }
    }
    let mut acc = 0.0;
    step.iter()
        .map(|s| {
            acc += s;
            acc
        })
        .collect()
}

/// `h(t, x)` for all `t = 1..T` at once. Constant series fall back to `t / T`.
pub fn h_series(kind: HKind, x: &TimeSeries) -> Vec<f64> {
    let len = x.len();
    let id = || (1..=len).map(|t| t as f64 / len as f64).collect();
    if kind == HKind::Id {
        return id();
    }
    let mass = increment_mass(kind, x);
    let total = mass[len - 1];
    if total <= 0.0 {
        return id();
    }
    mass.into_iter().map(|m| m / total).collect()
}

/// `h(t, x)` at a single 1-based time index, computed directly from the
/// definition.
pub fn h_eval(kind: HKind, t: usize, x: &TimeSeries) -> f64 {
    let len = x.len();
    assert!((1..=len).contains(&t), "time index {t} outside 1..={len}");
    let fallback = t as f64 / len as f64;
    let measure = |upto: usize| -> f64 {
        (2..=upto)
            .map(|r| {
                x.dims()
                    .map(|row| {
                        let d = (row[r - 1] - row[r - 2]).abs();
                        if kind == HKind::L1 { d } else { d * d }
                    })
                    .sum::<f64>()
            })
            .sum()
    };
    match kind {
        HKind::Id => fallback,
        HKind::L1 | HKind::L2 => {
            let total = measure(len);
            if total <= 0.0 {
                fallback
            } else {
                measure(t) / total
            }
        }
    }
}
