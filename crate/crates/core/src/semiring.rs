//! The two commutative semirings used by the ISS engine.
//!
//! Values are plain `f64`. In the arctic (max-plus) semiring the bottom
//! element is `f64::NEG_INFINITY`, so `max` and `+` handle it natively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semiring {
    /// `(R, +, *, 0, 1)`
    Real,
    /// `(R ∪ {-inf}, max, +, -inf, 0)`
    Arctic,
}

impl Semiring {
    pub fn zero(self) -> f64 {
        match self {
            Semiring::Real => 0.0,
            Semiring::Arctic => f64::NEG_INFINITY,
        }
    }

    pub fn one(self) -> f64 {
        match self {
            Semiring::Real => 1.0,
            Semiring::Arctic => 0.0,
        }
    }

    #[inline]
    pub fn add(self, a: f64, b: f64) -> f64 {
        match self {
            Semiring::Real => a + b,
            Semiring::Arctic => a.max(b),
        }
    }

    #[inline]
    pub fn mul(self, a: f64, b: f64) -> f64 {
        match self {
            Semiring::Real => a * b,
            Semiring::Arctic => {
                let r = a + b;
                debug_assert!(!r.is_nan(), "arctic product produced NaN from {a} + {b}");
                r
            }
        }
    }

    /// `a` multiplied with itself `n` times.
    ///
    /// Negative `n` is only meaningful in the arctic semiring, where it is the
    /// signed multiple `n * a`. The bottom element has no inverse; every power
    /// of it stays at the bottom so that no `+inf` (and later NaN) can appear.
    #[inline]
    pub fn pow(self, a: f64, n: i32) -> Result<f64> {
        debug_assert!(n != 0, "zero exponent");
        match self {
            Semiring::Real if n < 0 => Err(Error::NegativeExponentInRealSemiring(n)),
            Semiring::Real => Ok(a.powi(n)),
            Semiring::Arctic if a == f64::NEG_INFINITY => Ok(a),
            Semiring::Arctic => Ok(f64::from(n) * a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Semiring::Real => "real",
            Semiring::Arctic => "arctic",
        }
    }
}

impl std::fmt::Display for Semiring {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Semiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Semiring::Real),
            "arctic" => Ok(Semiring::Arctic),
            other => Err(Error::InvalidConfig(format!(
                "unknown semiring {other:?} (expected \"real\" or \"arctic\")"
            ))),
        }
    }
}
