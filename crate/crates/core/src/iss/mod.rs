//! Iterated-sums signature engine.
//!
//! Every ISS value series is computed in `O(T·p)` by chaining letter
//! evaluations with shifted cumulative semiring sums:
//!
//! ```text
//! S = cs0( y_p ⊙ cs_r( y_{p-1} ⊙ cs_r( ... y_2 ⊙ cs_r(y_1) ) ) ) ⊙ ν
//! ```
//!
//! with `r = 1` for strict index chains (`t_1 < ... < t_p`) and `r = 0` for
//! non-strict ones. Exponential weightings are folded into the `y_k` and the
//! outer factor `ν`; cosine weightings are expanded into separable terms (see
//! [`cosine`]). [`brute`] holds the naive enumeration used as test oracle.

pub mod brute;
pub mod cosine;
mod weighting;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use brute::{iss_brute, iss_brute_with_control};
pub use cosine::{cosine_expansion, cosine_iss, cosine_iss_expanded};
pub use weighting::{h_eval, h_series, increment_mass, HKind};

use crate::error::{Error, Result};
use crate::semiring::Semiring;
use crate::series::TimeSeries;
use crate::words::{ExtendedLetter, Word};

/// Largest exponential weight scale the engine accepts; `e^300` stays far
/// below `f64::MAX` even after multiplying letter products.
pub const MAX_WEIGHT_SCALE: f64 = 300.0;

pub const DEFAULT_WEIGHT_SCALE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `0 < t_1 < ... < t_p <= t`
    Strict,
    /// `1 <= t_1 <= ... <= t_p <= t`
    #[serde(alias = "nonstrict")]
    NonStrict,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::NonStrict => "non_strict",
        })
    }
}

fn default_scale() -> f64 {
    DEFAULT_WEIGHT_SCALE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting {
    None,
    /// Penalises index gaps through `g(t) = scale · h(t)`, with
    /// `α_1 = ... = α_{p-1} = 1` and `α_p = 1` only when `outer` is set.
    Exponential {
        h: HKind,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default)]
        outer: bool,
    },
    /// Every gap (including the outer one) is weighted by
    /// `cos(α (t_k - t_{k+1}))^b` with `α = π / (f T)`.
    Cosine { b: u32, f: f64 },
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Weighting::None => f.write_str("none"),
            Weighting::Exponential { h, scale, outer } => {
                write!(f, "exp(h={h},scale={scale}")?;
                if outer {
                    f.write_str(",outer")?;
                }
                f.write_str(")")
            }
            Weighting::Cosine { b, f: freq } => write!(f, "cos(b={b},f={freq})"),
        }
    }
}

/// Word, semiring, index mode and weighting: everything that defines one
/// ISS transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssSpec {
    pub word: Word,
    pub semiring: Semiring,
    pub mode: Mode,
    pub weighting: Weighting,
}

impl IssSpec {
    pub fn new(word: Word, semiring: Semiring, mode: Mode, weighting: Weighting) -> Self {
        Self {
            word,
            semiring,
            mode,
            weighting,
        }
    }

    /// Unweighted spec.
    pub fn plain(word: Word, semiring: Semiring, mode: Mode) -> Self {
        Self::new(word, semiring, mode, Weighting::None)
    }

    /// Checks the combination rules and, when `d` is given, the word's
    /// dimensions.
    pub fn validate(&self, d: Option<usize>) -> Result<()> {
        if let Some(d) = d {
            self.word.check_dims(d)?;
        }
        if self.semiring == Semiring::Real && self.word.has_negative_exponent() {
            let n = self
                .word
                .letters()
                .iter()
                .flat_map(|l| l.factors())
                .map(|&(_, e)| e)
                .find(|&e| e < 0)
                .unwrap_or(-1);
            return Err(Error::NegativeExponentInRealSemiring(n));
        }
        match self.weighting {
            Weighting::None => {}
            Weighting::Exponential { scale, .. } => {
                if self.semiring == Semiring::Real && self.mode == Mode::NonStrict {
                    return Err(Error::UnsupportedSpec(
                        "exponential weighting with real non-strict sums".into(),
                    ));
                }
                if !(scale > 0.0 && scale <= MAX_WEIGHT_SCALE) {
                    return Err(Error::InvalidWeighting(format!(
                        "scale {scale} outside (0, {MAX_WEIGHT_SCALE}]"
                    )));
                }
            }
            Weighting::Cosine { b, f } => {
                if self.semiring != Semiring::Real || self.mode != Mode::Strict {
                    return Err(Error::UnsupportedSpec(
                        "cosine weighting requires the real semiring and strict mode".into(),
                    ));
                }
                if b == 0 || b > 16 {
                    return Err(Error::InvalidWeighting(format!("cosine power {b} outside 1..=16")));
                }
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::InvalidWeighting(format!("frequency {f} outside (0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// Entrywise `⊙`-product over the letter's factors of `x^{[j]}` raised to
/// the factor's exponent.
pub fn letter_eval(x: &TimeSeries, letter: &ExtendedLetter, s: Semiring) -> Result<Vec<f64>> {
    for &(dim, exp) in letter.factors() {
        if dim > x.ndim() {
            return Err(Error::DimensionOutOfRange { dim, d: x.ndim() });
        }
        if s == Semiring::Real && exp < 0 {
            return Err(Error::NegativeExponentInRealSemiring(exp));
        }
    }
    Ok(letter_values(x, letter, s))
}

/// [`letter_eval`] without validation.
fn letter_values(x: &TimeSeries, letter: &ExtendedLetter, s: Semiring) -> Vec<f64> {
    let mut out = vec![s.one(); x.len()];
    for &(dim, exp) in letter.factors() {
        let row = x.dim(dim - 1);
        match s {
            Semiring::Real => {
                for (o, &v) in out.iter_mut().zip(row) {
                    *o *= v.powi(exp);
                }
            }
            Semiring::Arctic => {
                let n = f64::from(exp);
                for (o, &v) in out.iter_mut().zip(row) {
                    *o += if v == f64::NEG_INFINITY { v } else { n * v };
                }
            }
        }
    }
    out
}

/// Cumulative semiring sum with shift `r`: entry `t` (1-based) is `𝟘` for
/// `t <= r` and `z_1 ⊕ ... ⊕ z_{t-r}` otherwise.
pub fn cumsum_shift(z: &[f64], r: usize, s: Semiring) -> Vec<f64> {
    let mut out = vec![s.zero(); z.len()];
    let mut acc = s.zero();
    for t in r..z.len() {
        acc = s.add(acc, z[t - r]);
        out[t] = acc;
    }
    out
}

trait Ops {
    const ZERO: f64;
    fn add(a: f64, b: f64) -> f64;
    fn mul(a: f64, b: f64) -> f64;
}

struct RealOps;
struct ArcticOps;

impl Ops for RealOps {
    const ZERO: f64 = 0.0;
    #[inline(always)]
    fn add(a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline(always)]
    fn mul(a: f64, b: f64) -> f64 {
        a * b
    }
}

impl Ops for ArcticOps {
    const ZERO: f64 = f64::NEG_INFINITY;
    #[inline(always)]
    fn add(a: f64, b: f64) -> f64 {
        a.max(b)
    }
    #[inline(always)]
    fn mul(a: f64, b: f64) -> f64 {
        a + b
    }
}

/// `cs0(y_p ⊙ cs_r(... ⊙ cs_r(y_1)))`, overwriting the first series.
fn chain_generic<O: Ops>(ys: &mut [Vec<f64>], inner_shift: usize) -> Vec<f64> {
    let (first, rest) = ys.split_first_mut().expect("nonempty word");
    let mut acc = std::mem::take(first);
    for y in rest.iter() {
        let mut run = O::ZERO;
        for (a, &yt) in acc.iter_mut().zip(y) {
            let prev = *a;
            if inner_shift == 0 {
                run = O::add(run, prev);
                *a = O::mul(run, yt);
            } else {
                *a = O::mul(run, yt);
                run = O::add(run, prev);
            }
        }
    }
    let mut run = O::ZERO;
    for a in acc.iter_mut() {
        run = O::add(run, *a);
        *a = run;
    }
    acc
}

pub(crate) fn chain(ys: &mut [Vec<f64>], mode: Mode, s: Semiring) -> Vec<f64> {
    let shift = match mode {
        Mode::Strict => 1,
        Mode::NonStrict => 0,
    };
    match s {
        Semiring::Real => chain_generic::<RealOps>(ys, shift),
        Semiring::Arctic => chain_generic::<ArcticOps>(ys, shift),
    }
}

/// ISS value series of `x` for `spec`. Weightings that depend on the data
/// read `x` itself; see [`iss_with_control`].
pub fn iss(x: &TimeSeries, spec: &IssSpec) -> Result<Vec<f64>> {
    iss_with_control(x, spec, x)
}

/// ISS of `x` where the weighting control function `h` is evaluated on
/// `control` instead of `x`.
///
/// Pipelines pass the unprepared input here, so that `h = L1` measures the
/// increments of the original series even when the ISS runs on `δx`.
pub fn iss_with_control(x: &TimeSeries, spec: &IssSpec, control: &TimeSeries) -> Result<Vec<f64>> {
    spec.validate(Some(x.ndim()))?;
    if control.len() != x.len() {
        return Err(Error::LengthMismatch(control.len(), x.len()));
    }
    debug_assert!(!x.has_nan(), "ISS input contains NaN");

    let letters: Vec<Vec<f64>> = spec
        .word
        .letters()
        .iter()
        .map(|l| letter_values(x, l, spec.semiring))
        .collect();

    match spec.weighting {
        Weighting::None => {
            let mut ys = letters;
            Ok(chain(&mut ys, spec.mode, spec.semiring))
        }
        Weighting::Exponential { h, scale, outer } => {
            let g: Vec<f64> = h_series(h, control).into_iter().map(|v| scale * v).collect();
            Ok(exponential_weighted(letters, &g, outer, spec.mode, spec.semiring))
        }
        Weighting::Cosine { b, f } => Ok(cosine::cosine_from_letters(&letters, b, f)),
    }
}

/// Gap coefficients `α_1..α_p` used by the exponential weighting.
pub(crate) fn alphas(p: usize, outer: bool) -> Vec<f64> {
    (1..=p)
        .map(|k| if k < p || outer { 1.0 } else { 0.0 })
        .collect()
}

/// Folds `ω(t_1..t_p, t)` into the letter series:
/// `y_k = (α_k - α_{k-1}) g(t_k) ⊙ L_k` and `ν_t = -α_p g(t)` (multiplicatively
/// exponentiated in the real semiring).
fn exponential_weighted(
    mut ys: Vec<Vec<f64>>,
    g: &[f64],
    outer: bool,
    mode: Mode,
    s: Semiring,
) -> Vec<f64> {
    let alpha = alphas(ys.len(), outer);
    let mut prev = 0.0;
    for (y, &a) in ys.iter_mut().zip(&alpha) {
        let delta = a - prev;
        prev = a;
        if delta == 0.0 {
            continue;
        }
        match s {
            Semiring::Real => y.iter_mut().zip(g).for_each(|(v, &gt)| *v *= (delta * gt).exp()),
            Semiring::Arctic => y.iter_mut().zip(g).for_each(|(v, &gt)| *v += delta * gt),
        }
    }
    let mut out = chain(&mut ys, mode, s);
    let outer_alpha = *alpha.last().expect("nonempty word");
    if outer_alpha != 0.0 {
        match s {
            Semiring::Real => out
                .iter_mut()
                .zip(g)
                .for_each(|(v, &gt)| *v *= (-outer_alpha * gt).exp()),
            Semiring::Arctic => out.iter_mut().zip(g).for_each(|(v, &gt)| *v -= outer_alpha * gt),
        }
    }
    out
}

/// Exponentially weighted real ISS (strict).
pub fn weighted_iss_real(x: &TimeSeries, spec: &IssSpec) -> Result<Vec<f64>> {
    if spec.semiring != Semiring::Real || !matches!(spec.weighting, Weighting::Exponential { .. }) {
        return Err(Error::UnsupportedSpec(
            "weighted_iss_real needs a real spec with exponential weighting".into(),
        ));
    }
    iss(x, spec)
}

/// Exponentially weighted arctic ISS (either mode).
pub fn weighted_iss_arctic(x: &TimeSeries, spec: &IssSpec) -> Result<Vec<f64>> {
    if spec.semiring != Semiring::Arctic || !matches!(spec.weighting, Weighting::Exponential { .. }) {
        return Err(Error::UnsupportedSpec(
            "weighted_iss_arctic needs an arctic spec with exponential weighting".into(),
        ));
    }
    iss(x, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;

    fn uni(v: &[f64]) -> TimeSeries {
        TimeSeries::univariate(v.to_vec()).unwrap()
    }

    fn spec(w: &str, d: usize, s: Semiring, mode: Mode, weighting: Weighting) -> IssSpec {
        IssSpec::new(parse_word(w, d).unwrap(), s, mode, weighting)
    }

    #[test]
    fn letter_eval_examples() {
        let l = |t: &str| parse_word(t, 2).unwrap().letters()[0].clone();
        assert_eq!(letter_eval(&uni(&[2.0, 3.0]), &l("[1^2]"), Semiring::Real).unwrap(), [4.0, 9.0]);
        let x2 = TimeSeries::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(letter_eval(&x2, &l("[12]"), Semiring::Real).unwrap(), [3.0, 8.0]);
        assert_eq!(
            letter_eval(&uni(&[5.0, -1.0]), &l("[1^(-1)]"), Semiring::Arctic).unwrap(),
            [-5.0, 1.0]
        );
        assert!(letter_eval(&uni(&[1.0]), &l("[1^(-1)]"), Semiring::Real).is_err());
        assert!(letter_eval(&uni(&[1.0]), &l("[2]"), Semiring::Real).is_err());
    }

    #[test]
    fn cumsum_shift_examples() {
        assert_eq!(cumsum_shift(&[1.0, 2.0, 3.0], 0, Semiring::Real), [1.0, 3.0, 6.0]);
        assert_eq!(cumsum_shift(&[1.0, 2.0, 3.0], 1, Semiring::Real), [0.0, 1.0, 3.0]);
        assert_eq!(cumsum_shift(&[1.0, 3.0, 2.0], 0, Semiring::Arctic), [1.0, 3.0, 3.0]);
        let shifted = cumsum_shift(&[1.0, 3.0, 2.0], 1, Semiring::Arctic);
        assert_eq!(shifted, [f64::NEG_INFINITY, 1.0, 3.0]);
    }

    #[test]
    fn unweighted_examples() {
        let x = uni(&[1.0, 2.0, 3.0]);
        let s = spec("[1]", 1, Semiring::Real, Mode::Strict, Weighting::None);
        assert_eq!(iss(&x, &s).unwrap(), [1.0, 3.0, 6.0]);
        let s = spec("[1^2]", 1, Semiring::Real, Mode::Strict, Weighting::None);
        assert_eq!(iss(&x, &s).unwrap(), [1.0, 5.0, 14.0]);
        let s = spec("[1][1]", 1, Semiring::Real, Mode::Strict, Weighting::None);
        assert_eq!(iss(&x, &s).unwrap(), [0.0, 2.0, 11.0]);

        let x = uni(&[1.0, 3.0, -4.0, 2.0, 0.0, 5.0, 1.0, 1.0]);
        let s = spec("[1][1^(-1)][1]", 1, Semiring::Arctic, Mode::NonStrict, Weighting::None);
        let z = iss(&x, &s).unwrap();
        assert_eq!(z[7], 12.0);
        assert_eq!(iss(&x.truncated(4), &s).unwrap()[3], 9.0);
    }

    #[test]
    fn exponential_real_examples() {
        let x = uni(&[1.0, 1.0, 1.0]);
        let w = Weighting::Exponential { h: HKind::Id, scale: 3.0, outer: false };
        let z = weighted_iss_real(&x, &spec("[1][1]", 1, Semiring::Real, Mode::Strict, w)).unwrap();
        let expected = 2.0 * (-1.0f64).exp() + (-2.0f64).exp();
        assert!((z[2] - expected).abs() < 1e-12, "{} vs {expected}", z[2]);
        // 2/e + 1/e² = 0.8710941...
        assert!((z[2] - 0.87109).abs() < 1e-5);

        let x = uni(&[1.0, 2.0]);
        let w = Weighting::Exponential { h: HKind::L1, scale: 50.0, outer: false };
        let z = weighted_iss_real(&x, &spec("[1][1]", 1, Semiring::Real, Mode::Strict, w)).unwrap();
        let expected = 2.0 * (-50.0f64).exp();
        assert!((z[1] - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn single_letter_without_outer_weight_is_unweighted() {
        let x = uni(&[0.3, -1.2, 2.5, 0.7]);
        for h in [HKind::Id, HKind::L1, HKind::L2] {
            let w = Weighting::Exponential { h, scale: 50.0, outer: false };
            for s in [Semiring::Real, Semiring::Arctic] {
                let weighted = iss(&x, &spec("[1^2]", 1, s, Mode::Strict, w)).unwrap();
                let plain = iss(&x, &spec("[1^2]", 1, s, Mode::Strict, Weighting::None)).unwrap();
                assert_eq!(weighted, plain);
            }
        }
    }

    #[test]
    fn exponential_arctic_examples() {
        let w = Weighting::Exponential { h: HKind::Id, scale: 2.0, outer: false };
        let z = weighted_iss_arctic(&uni(&[0.0, 0.0]), &spec("[1][1]", 1, Semiring::Arctic, Mode::Strict, w))
            .unwrap();
        assert!((z[1] + 1.0).abs() < 1e-12);

        let w = Weighting::Exponential { h: HKind::Id, scale: 3.0, outer: false };
        let z = weighted_iss_arctic(
            &uni(&[5.0, 0.0, 0.0]),
            &spec("[1][1]", 1, Semiring::Arctic, Mode::Strict, w),
        )
        .unwrap();
        assert!((z[2] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rules() {
        let neg = spec("[1^(-1)]", 1, Semiring::Real, Mode::Strict, Weighting::None);
        assert!(matches!(neg.validate(None), Err(Error::NegativeExponentInRealSemiring(-1))));
        let w = Weighting::Exponential { h: HKind::Id, scale: 50.0, outer: false };
        assert!(spec("[1]", 1, Semiring::Real, Mode::NonStrict, w).validate(None).is_err());
        assert!(spec("[1]", 1, Semiring::Arctic, Mode::NonStrict, w).validate(None).is_ok());
        let c = Weighting::Cosine { b: 1, f: 0.5 };
        assert!(spec("[1]", 1, Semiring::Arctic, Mode::Strict, c).validate(None).is_err());
        assert!(spec("[1]", 1, Semiring::Real, Mode::NonStrict, c).validate(None).is_err());
        let big = Weighting::Exponential { h: HKind::Id, scale: 301.0, outer: false };
        assert!(spec("[1]", 1, Semiring::Real, Mode::Strict, big).validate(None).is_err());
        let bad_f = Weighting::Cosine { b: 1, f: 0.0 };
        assert!(spec("[1]", 1, Semiring::Real, Mode::Strict, bad_f).validate(None).is_err());
        assert!(spec("[2]", 2, Semiring::Real, Mode::Strict, Weighting::None)
            .validate(Some(1))
            .is_err());
    }

    #[test]
    fn max_scale_does_not_overflow() {
        let x = TimeSeries::univariate((0..64).map(|t| ((t as f64) * 0.3).sin() * 3.0).collect()).unwrap();
        let w = Weighting::Exponential { h: HKind::Id, scale: MAX_WEIGHT_SCALE, outer: true };
        let z = iss(&x, &spec("[1^3][1][1^2]", 1, Semiring::Real, Mode::Strict, w)).unwrap();
        assert!(z.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn weighting_json_shape() {
        let w: Weighting = serde_json::from_str(r#"{"kind":"exponential","h":"id"}"#).unwrap();
        assert_eq!(w, Weighting::Exponential { h: HKind::Id, scale: 50.0, outer: false });
        let w: Weighting = serde_json::from_str(r#"{"kind":"cosine","b":2,"f":0.05}"#).unwrap();
        assert_eq!(w, Weighting::Cosine { b: 2, f: 0.05 });
        let m: Mode = serde_json::from_str(r#""nonstrict""#).unwrap();
        assert_eq!(m, Mode::NonStrict);
    }
}
