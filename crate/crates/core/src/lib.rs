//! Iterated-sums signatures over the real and arctic semirings, and a
//! feature pipeline for time series classification built on them.

pub mod argmax;
pub mod classify;
pub mod data;
pub mod error;
pub mod fruit;
pub mod iss;
pub mod prepare;
pub mod semiring;
pub mod series;
pub mod sieve;
pub mod words;

pub use error::{Error, Result};
pub use fruit::{FeatureMatrix, FittedFruit, FruitConfig};
pub use iss::{iss, IssSpec, Mode, Weighting};
pub use semiring::Semiring;
pub use series::TimeSeries;
pub use words::{parse_word, ExtendedLetter, Word};
