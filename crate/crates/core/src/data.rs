//! UCR-style dataset loading and the stuttering transform.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub samples: Vec<TimeSeries>,
    pub labels: Vec<String>,
}

impl LabeledDataset {
    pub fn new(samples: Vec<TimeSeries>, labels: Vec<String>) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::LengthMismatch(samples.len(), labels.len()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        Ok(Self { samples, labels })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn map_samples(&self, f: impl FnMut(&TimeSeries) -> TimeSeries) -> Self {
        Self {
            samples: self.samples.iter().map(f).collect(),
            labels: self.labels.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Tab,
    Comma,
    /// Tab if the first data line has one, comma otherwise.
    Auto,
}

impl Delimiter {
    fn resolve(self, line: &str) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
            Delimiter::Auto if line.contains('\t') => '\t',
            Delimiter::Auto => ',',
        }
    }
}

/// One sample per line: label, then the values. `NaN` and empty fields load as NaN.
pub fn load_ucr(path: impl AsRef<Path>, delimiter: Delimiter) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ucr(&text, delimiter, path)
}

pub fn parse_ucr(text: &str, delimiter: Delimiter, path: &Path) -> Result<LabeledDataset> {
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut sep = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let sep = *sep.get_or_insert_with(|| delimiter.resolve(line));
        let malformed = |msg: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let mut fields = line.split(sep);
        let label = fields.next().unwrap_or_default().trim();
        if label.is_empty() {
            return Err(malformed("missing label".into()));
        }
        let values = fields
            .enumerate()
            .map(|(j, field)| {
                let field = field.trim();
                if field.is_empty() || field.eq_ignore_ascii_case("nan") {
                    Ok(f64::NAN)
                } else {
                    field
                        .parse::<f64>()
                        .map_err(|_| malformed(format!("field {}: not a number: {field:?}", j + 2)))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(malformed("no values after the label".into()));
        }
        samples.push(TimeSeries::univariate(values)?);
        labels.push(label.to_string());
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset(path.to_path_buf()));
    }
    LabeledDataset::new(samples, labels)
}

/// Number of extra copies of each of the `len` time steps after drawing
/// `count` positions uniformly with replacement.
pub fn stutter_positions(len: usize, count: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut repeats = vec![0usize; len];
    for _ in 0..count {
        repeats[rng.gen_range(0..len)] += 1;
    }
    repeats
}

/// Repeats every time step `1 + repeats[t]` times.
pub fn apply_repeats(x: &TimeSeries, repeats: &[usize]) -> TimeSeries {
    x.map_dims(|row| {
        row.iter()
            .zip(repeats)
            .flat_map(|(&v, &r)| std::iter::repeat_n(v, 1 + r))
            .collect()
    })
}

fn stutter_with(x: &TimeSeries, proportion: f64, rng: &mut impl Rng) -> TimeSeries {
    let count = (proportion * x.len() as f64).round() as usize;
    if count == 0 {
        return x.clone();
    }
    let repeats = stutter_positions(x.len(), count, rng);
    apply_repeats(x, &repeats)
}

/// Inserts `round(proportion · T)` duplicated time steps at positions drawn
/// from a ChaCha8 stream seeded with `seed`.
pub fn stutter(x: &TimeSeries, proportion: f64, seed: u64) -> TimeSeries {
    stutter_with(x, proportion, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Stutters every sample from one seeded stream, in sample order.
pub fn stutter_dataset(ds: &LabeledDataset, proportion: f64, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ds.map_samples(|x| stutter_with(x, proportion, &mut rng))
}

/// Appends the last value `k` more times.
pub fn lengthen_tail(x: &TimeSeries, k: usize) -> TimeSeries {
    let mut repeats = vec![0; x.len()];
    repeats[x.len() - 1] = k;
    apply_repeats(x, &repeats)
}
