//! Preparateurs: transforms applied to a series before the ISS.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Dimensions with a population standard deviation below this are zeroed by [`std`].
pub const STD_EPSILON: f64 = 1e-12;

/// Replaces every NaN by the last non-NaN value of its dimension; leading
/// NaNs become 0.
pub fn nan_fill(x: &TimeSeries) -> TimeSeries {
    if !x.has_nan() {
        return x.clone();
    }
    x.map_dims(|row| {
        let mut last = 0.0;
        row.iter()
            .map(|&v| {
                if !v.is_nan() {
                    last = v;
                }
                last
            })
            .collect()
    })
}

/// Per-dimension standardisation to mean 0 and population standard deviation 1.
pub fn std(x: &TimeSeries) -> TimeSeries {
    x.map_dims(|row| {
        let n = row.len() as f64;
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd < STD_EPSILON {
            vec![0.0; row.len()]
        } else {
            row.iter().map(|v| (v - mean) / sd).collect()
        }
    })
}

/// `(0, x_2 - x_1, x_3 - x_2, ...)` per dimension.
pub fn inc(x: &TimeSeries) -> TimeSeries {
    x.map_dims(increments)
}

pub(crate) fn increments(row: &[f64]) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(row.windows(2).map(|w| w[1] - w[0]))
        .collect()
}

/// Lifts a univariate series to `(x, δx)`.
pub fn inc_lift(x: &TimeSeries) -> Result<TimeSeries> {
    if x.ndim() != 1 {
        return Err(Error::NotUnivariate(x.ndim()));
    }
    let row = x.dim(0);
    TimeSeries::new(vec![row.to_vec(), increments(row)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrepStep {
    NanFill,
    Std,
    Inc,
    IncLift,
}

impl PrepStep {
    pub fn apply(self, x: &TimeSeries) -> Result<TimeSeries> {
        match self {
            PrepStep::NanFill => Ok(nan_fill(x)),
            PrepStep::Std => Ok(std(x)),
            PrepStep::Inc => Ok(inc(x)),
            PrepStep::IncLift => inc_lift(x),
        }
    }

    fn output_dim(self, d: usize) -> Result<usize> {
        match self {
            PrepStep::IncLift if d != 1 => Err(Error::NotUnivariate(d)),
            PrepStep::IncLift => Ok(2),
            _ => Ok(d),
        }
    }
}

impl fmt::Display for PrepStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrepStep::NanFill => "nan_fill",
            PrepStep::Std => "std",
            PrepStep::Inc => "inc",
            PrepStep::IncLift => "inc_lift",
        })
    }
}

/// Steps applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrepChain(pub Vec<PrepStep>);

impl PrepChain {
    pub fn new(steps: impl Into<Vec<PrepStep>>) -> Self {
        Self(steps.into())
    }

    pub fn apply(&self, x: &TimeSeries) -> Result<TimeSeries> {
        let mut cur = x.clone();
        for step in &self.0 {
            cur = step.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Dimension after the chain for an input of dimension `d`.
    pub fn output_dim(&self, d: usize) -> Result<usize> {
        self.0.iter().try_fold(d, |d, s| s.output_dim(d))
    }
}

impl fmt::Display for PrepChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("id");
        }
        let names: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&names.join(">"))
    }
}
