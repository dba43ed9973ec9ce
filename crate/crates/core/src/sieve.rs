//! Sieves turn an ISS output series `z` into a scalar.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::iss::{increment_mass, HKind};
use crate::prepare::increments;
use crate::series::TimeSeries;

pub const MAX_ORDER: u8 = 3;

/// Increment norm used by the coquantile cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutNorm {
    L1,
    L2,
}

impl CutNorm {
    fn kind(self) -> HKind {
        match self {
            CutNorm::L1 => HKind::L1,
            CutNorm::L2 => HKind::L2,
        }
    }
}

/// Which length divides the MPI sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MpiDenominator {
    /// Length of the series being sieved.
    Length,
    /// Longest training series seen during fit. Keeps MPI unchanged when a
    /// test series is stuttered.
    TrainLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SieveSpec {
    End,
    CoQuantile {
        q: f64,
        norm: CutNorm,
    },
    Npi {
        k: u8,
        alpha_l: f64,
        alpha_r: f64,
    },
    Mpi {
        k: u8,
        alpha_l: f64,
        alpha_r: f64,
        denominator: MpiDenominator,
    },
}

impl SieveSpec {
    pub fn npi(k: u8, alpha_l: f64, alpha_r: f64) -> Self {
        SieveSpec::Npi { k, alpha_l, alpha_r }
    }

    pub fn mpi(k: u8, alpha_l: f64, alpha_r: f64) -> Self {
        SieveSpec::Mpi {
            k,
            alpha_l,
            alpha_r,
            denominator: MpiDenominator::Length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSieve(format!("{self}: {msg}")));
        match *self {
            SieveSpec::End => Ok(()),
            SieveSpec::CoQuantile { q, .. } if !(0.0..=1.0).contains(&q) => bad("q must lie in [0, 1]"),
            SieveSpec::CoQuantile { .. } => Ok(()),
            SieveSpec::Npi { k, alpha_l, alpha_r } | SieveSpec::Mpi { k, alpha_l, alpha_r, .. } => {
                if k > MAX_ORDER {
                    bad("order k must be at most 3")
                } else if !(0.0 <= alpha_l && alpha_l < alpha_r && alpha_r <= 1.0) {
                    bad("need 0 <= alpha_l < alpha_r <= 1")
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Order and quantile levels for sieves that need a fitted window.
    pub fn window_levels(&self) -> Option<(u8, f64, f64)> {
        match *self {
            SieveSpec::Npi { k, alpha_l, alpha_r } | SieveSpec::Mpi { k, alpha_l, alpha_r, .. } => {
                Some((k, alpha_l, alpha_r))
            }
            _ => None,
        }
    }
}

impl fmt::Display for SieveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SieveSpec::End => f.write_str("end"),
            SieveSpec::CoQuantile { q, norm: CutNorm::L1 } => write!(f, "coq:{q}"),
            SieveSpec::CoQuantile { q, norm: CutNorm::L2 } => write!(f, "coq:{q}:l2"),
            SieveSpec::Npi { k, alpha_l, alpha_r } => write!(f, "npi:{k}:{alpha_l}:{alpha_r}"),
            SieveSpec::Mpi {
                k,
                alpha_l,
                alpha_r,
                denominator,
            } => {
                write!(f, "mpi:{k}:{alpha_l}:{alpha_r}")?;
                if *denominator == MpiDenominator::TrainLength {
                    f.write_str(":train_len")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for SieveSpec {
    type Err = Error;

    /// `end`, `coq:<q>[:l1|:l2]`, `npi:<k>[:<αl>:<αr>]`,
    /// `mpi:<k>[:<αl>:<αr>][:train_len]`. A bare order uses `αl = 0.5, αr = 1`.
    fn from_str(text: &str) -> Result<Self> {
        let invalid = || Error::InvalidSieve(text.to_string());
        let parts: Vec<&str> = text.trim().split(':').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| invalid());
        let spec = match parts.as_slice() {
            ["end"] => SieveSpec::End,
            ["coq", q] => SieveSpec::CoQuantile {
                q: num(q)?,
                norm: CutNorm::L1,
            },
            ["coq", q, norm] => SieveSpec::CoQuantile {
                q: num(q)?,
                norm: match *norm {
                    "l1" => CutNorm::L1,
                    "l2" => CutNorm::L2,
                    _ => return Err(invalid()),
                },
            },
            [kind @ ("npi" | "mpi"), rest @ ..] => {
                let (rest, denominator) = match rest {
                    [head @ .., "train_len"] if *kind == "mpi" => (head, MpiDenominator::TrainLength),
                    _ => (rest, MpiDenominator::Length),
                };
                let (k, alpha_l, alpha_r) = match rest {
                    [k] => (k, 0.5, 1.0),
                    [k, l, r] => (k, num(l)?, num(r)?),
                    _ => return Err(invalid()),
                };
                let k: u8 = k.parse().map_err(|_| invalid())?;
                if *kind == "npi" {
                    SieveSpec::Npi { k, alpha_l, alpha_r }
                } else {
                    SieveSpec::Mpi {
                        k,
                        alpha_l,
                        alpha_r,
                        denominator,
                    }
                }
            }
            _ => return Err(invalid()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for SieveSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SieveSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Half-open value window `(lower, upper]`; `upper = None` is `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Window {
    /// `(0, ∞)`: plain counting of positive values.
    pub const POSITIVE: Window = Window {
        lower: 0.0,
        upper: None,
    };

    pub fn contains(&self, v: f64) -> bool {
        v > self.lower && self.upper.is_none_or(|u| v <= u)
    }
}

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let pos = alpha * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn fit_window(mut pool: Vec<f64>, alpha_l: f64, alpha_r: f64) -> Result<Window> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    pool.sort_by(f64::total_cmp);
    Ok(Window {
        lower: quantile_sorted(&pool, alpha_l),
        upper: (alpha_r < 1.0).then(|| quantile_sorted(&pool, alpha_r)),
    })
}

/// `δ^k z`: increments applied `k` times.
pub fn kth_increments(z: &[f64], k: u8) -> Vec<f64> {
    let mut out = z.to_vec();
    for _ in 0..k {
        out = increments(&out);
    }
    out
}

pub fn sieve_end(z: &[f64]) -> f64 {
    z[z.len() - 1]
}

/// 1-based cut index `max{t : G_t / G_T <= q}`.
pub fn coquantile_index(x: &TimeSeries, q: f64, norm: CutNorm) -> usize {
    let len = x.len();
    if q <= 0.0 {
        return 1;
    }
    let mass = increment_mass(norm.kind(), x);
    let total = mass[len - 1];
    if q >= 1.0 || total <= 0.0 {
        return len;
    }
    // mass is nondecreasing, so the admissible t form a prefix
    mass.iter().take_while(|&&m| m / total <= q).count().max(1)
}

/// Number of `t` with `δ^k z_t > 0` inside the window.
pub fn sieve_npi(z: &[f64], k: u8, window: Window) -> f64 {
    kth_increments(z, k)
        .into_iter()
        .filter(|&v| v > 0.0 && window.contains(v))
        .count() as f64
}

/// `(1/n) Σ δ^k z_t` over the same positions as [`sieve_npi`].
pub fn sieve_mpi(z: &[f64], k: u8, window: Window, denominator: usize) -> f64 {
    let total: f64 = kth_increments(z, k)
        .into_iter()
        .filter(|&v| v > 0.0 && window.contains(v))
        .sum();
    total / denominator as f64
}

/// A sieve with everything fitted from training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSieve {
    pub spec: SieveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_len: Option<usize>,
}

impl FittedSieve {
    /// Wraps a spec that needs no fitting, using the `(0, ∞)` window for NPI/MPI.
    pub fn unfitted(spec: SieveSpec) -> Self {
        Self {
            spec,
            window: None,
            train_len: None,
        }
    }

    /// `z` is the ISS output over `control.len()` steps; `control` is only read
    /// by coquantile cuts.
    pub fn apply(&self, z: &[f64], control: &TimeSeries) -> f64 {
        let window = self.window.unwrap_or(Window::POSITIVE);
        match self.spec {
            SieveSpec::End => sieve_end(z),
            SieveSpec::CoQuantile { q, norm } => z[coquantile_index(control, q, norm) - 1],
            SieveSpec::Npi { k, .. } => sieve_npi(z, k, window),
            SieveSpec::Mpi { k, denominator, .. } => {
                let n = match denominator {
                    MpiDenominator::TrainLength => self.train_len.unwrap_or(z.len()),
                    MpiDenominator::Length => z.len(),
                };
                sieve_mpi(z, k, window, n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iss::{iss, IssSpec, Mode};
    use crate::semiring::Semiring;
    use crate::words::parse_word;
    use proptest::prelude::*;

    #[test]
    fn end_examples() {
        assert_eq!(sieve_end(&[0.0, 2.0, 11.0]), 11.0);
        assert_eq!(sieve_end(&[5.0]), 5.0);
        let x = TimeSeries::univariate(vec![1.0, 2.0, 3.0]).unwrap();
        let spec = IssSpec::plain(parse_word("[1]", 1).unwrap(), Semiring::Real, Mode::Strict);
        assert_eq!(sieve_end(&iss(&x, &spec).unwrap()), 6.0);
    }

    #[test]
    fn coquantile_examples() {
        let x = TimeSeries::univariate(vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(coquantile_index(&x, 0.5, CutNorm::L1), 3);
        assert_eq!(coquantile_index(&x, 0.0, CutNorm::L1), 1);
        assert_eq!(coquantile_index(&x, 1.0, CutNorm::L1), 4);
        // L2 ratios are (0, 1/5, 1/5, 1)
        assert_eq!(coquantile_index(&x, 0.1, CutNorm::L2), 1);
        assert_eq!(coquantile_index(&x, 0.2, CutNorm::L2), 3);
        let flat = TimeSeries::univariate(vec![2.0; 5]).unwrap();
        assert_eq!(coquantile_index(&flat, 0.3, CutNorm::L1), 5);
    }

    #[test]
    fn window_fitting() {
        let w = fit_window(vec![4.0, 1.0, 3.0, 2.0], 0.5, 1.0).unwrap();
        assert_eq!(w, Window { lower: 2.5, upper: None });
        assert_eq!(fit_window(vec![3.0, 1.0, 2.0], 0.0, 1.0).unwrap().lower, 1.0);
        assert_eq!(fit_window(vec![7.0], 0.5, 1.0).unwrap().lower, 7.0);
        let w = fit_window(vec![0.0, 10.0], 0.25, 0.75).unwrap();
        assert_eq!(w, Window { lower: 2.5, upper: Some(7.5) });
        assert!(matches!(fit_window(vec![], 0.5, 1.0), Err(Error::EmptyPool)));
    }

    #[test]
    fn npi_mpi_examples() {
        let z = [0.0, 2.0, 11.0];
        assert_eq!(sieve_npi(&z, 1, Window::POSITIVE), 2.0);
        assert_eq!(sieve_npi(&z, 0, Window::POSITIVE), 2.0);
        let inc: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(sieve_npi(&inc, 1, Window::POSITIVE), 8.0);
        assert!((sieve_mpi(&z, 1, Window::POSITIVE, 3) - 11.0 / 3.0).abs() < 1e-15);
        assert_eq!(sieve_mpi(&[0.0; 4], 1, Window::POSITIVE, 4), 0.0);
        let none = Window { lower: 100.0, upper: None };
        assert_eq!(sieve_mpi(&z, 1, none, 3), 0.0);
        let mid = Window { lower: 1.0, upper: Some(5.0) };
        assert_eq!(sieve_npi(&z, 1, mid), 1.0);
        assert_eq!(kth_increments(&z, 2), [0.0, 2.0, 7.0]);
    }

    #[test]
    fn spec_strings() {
        for text in ["end", "coq:0.5", "coq:0.25:l2", "npi:1:0.5:1", "mpi:2:0.5:1", "mpi:1:0.5:1:train_len"] {
            let s: SieveSpec = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert_eq!("npi:1".parse::<SieveSpec>().unwrap(), SieveSpec::npi(1, 0.5, 1.0));
        for bad in ["", "npi", "npi:4:0.5:1", "npi:1:0.6:0.5", "coq:1.5", "mpi:x", "end:1", "npi:1:train_len"] {
            assert!(bad.parse::<SieveSpec>().is_err(), "{bad}");
        }
        let json = serde_json::to_string(&SieveSpec::mpi(1, 0.5, 1.0)).unwrap();
        assert_eq!(json, r#""mpi:1:0.5:1""#);
    }

    proptest! {
        #[test]
        fn npi_counts_running_max_improvements(values in prop::collection::vec(-10i32..10, 1..40)) {
            let x = TimeSeries::univariate(values.iter().map(|&v| f64::from(v)).collect()).unwrap();
            let spec = IssSpec::plain(parse_word("[1][1^(-1)]", 1).unwrap(), Semiring::Arctic, Mode::NonStrict);
            let z = iss(&x, &spec).unwrap();
            let mut improvements = 0;
            let mut best = z[0];
            for &v in &z[1..] {
                if v > best {
                    improvements += 1;
                    best = v;
                }
            }
            prop_assert_eq!(sieve_npi(&z, 1, Window::POSITIVE), f64::from(improvements));
        }
    }
}
