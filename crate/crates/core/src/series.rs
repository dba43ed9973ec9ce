use crate::error::{Error, Result};

/// A `d`-dimensional real-valued sequence of length `T`.
///
/// Values are stored dimension-major, so `dim(j)` is a contiguous slice.
/// Raw series coming out of a loader may hold NaN; everything downstream
/// of [`crate::prepare::nan_fill`] is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    ndim: usize,
    len: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from one row per dimension. All rows must share a length >= 1.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let ndim = rows.len();
        if ndim == 0 {
            return Err(Error::InvalidSeries("no dimensions".into()));
        }
        let len = rows[0].len();
        if len == 0 {
            return Err(Error::InvalidSeries("empty series".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != len) {
            return Err(Error::InvalidSeries(format!(
                "ragged dimensions ({} vs {len})",
                bad.len()
            )));
        }
        Ok(Self {
            ndim,
            len,
            values: rows.concat(),
        })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(vec![values])
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Zero-based dimension accessor.
    pub fn dim(&self, j: usize) -> &[f64] {
        &self.values[j * self.len..(j + 1) * self.len]
    }

    pub fn dim_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.len..(j + 1) * self.len]
    }

    pub fn dims(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.len)
    }

    /// Value of dimension `j` (zero-based) at time index `t` (zero-based).
    pub fn get(&self, j: usize, t: usize) -> f64 {
        self.values[j * self.len + t]
    }

    /// First `len` time steps.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(1, self.len);
        Self::new(self.dims().map(|d| d[..len].to_vec()).collect()).expect("non-empty prefix")
    }

    /// Applies `f` to every dimension row, keeping the length.
    pub fn map_dims(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Self {
        Self::new(self.dims().map(&mut f).collect()).expect("shape preserved by map_dims")
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.dims().map(<[f64]>::to_vec).collect()
    }
}
