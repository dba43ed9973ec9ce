//! Cosine-weighted real ISS.
//!
//! Each gap factor `cos(α(u - v))^b` is expanded binomially into
//! `Σ_j C(b, j) φ_j(u) φ_j(v)` with `φ_j(t) = cos(αt)^{b-j} sin(αt)^j`, which
//! makes every term separable in the indices. Summing over all choices of
//! `j` per gap gives `(b+1)^p` plain strict ISS over trig-modulated letters
//! ([`cosine_iss_expanded`]). The fast path ([`cosine_from_letters`]) carries
//! the `b+1` partial sums per level instead, which is the same expansion
//! factored level by level and costs `O(T·p·(b+1))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::iss::{chain, IssSpec, Mode, Weighting};
use crate::semiring::Semiring;
use crate::series::TimeSeries;
use crate::words::binomial;

/// `φ_j(t)` for `j = 0..=b` and `t = 1..=T`, with `α = π / (f T)`.
fn modulators(len: usize, b: u32, f: f64) -> Vec<Vec<f64>> {
    let alpha = PI / (f * len as f64);
    (0..=b)
        .map(|j| {
            (1..=len)
                .map(|t| {
                    let (s, c) = (alpha * t as f64).sin_cos();
                    c.powi((b - j) as i32) * s.powi(j as i32)
                })
                .collect()
        })
        .collect()
}

fn coefficients(b: u32) -> Vec<f64> {
    (0..=b).map(|j| binomial(u64::from(b), u64::from(j)) as f64).collect()
}

/// Fast path over precomputed letter series.
pub(crate) fn cosine_from_letters(letters: &[Vec<f64>], b: u32, f: f64) -> Vec<f64> {
    let len = letters[0].len();
    let phi = modulators(len, b, f);
    let coef = coefficients(b);
    let terms = phi.len();
    let p = letters.len();

    let mut current = letters[0].clone();
    let mut run = vec![0.0; terms];
    for k in 0..p {
        let last = k + 1 == p;
        run.iter_mut().for_each(|r| *r = 0.0);
        let mut next = vec![0.0; len];
        for t in 0..len {
            if last {
                for j in 0..terms {
                    run[j] += current[t] * phi[j][t];
                }
            }
            let mut gap = 0.0;
            for j in 0..terms {
                gap += coef[j] * phi[j][t] * run[j];
            }
            if last {
                next[t] = gap;
            } else {
                next[t] = letters[k + 1][t] * gap;
                for j in 0..terms {
                    run[j] += current[t] * phi[j][t];
                }
            }
        }
        current = next;
    }
    current
}

/// Cosine-weighted ISS of `x`.
pub fn cosine_iss(x: &TimeSeries, spec: &IssSpec) -> Result<Vec<f64>> {
    if !matches!(spec.weighting, Weighting::Cosine { .. }) {
        return Err(Error::UnsupportedSpec("cosine_iss needs a cosine weighting".into()));
    }
    crate::iss::iss(x, spec)
}

/// All `(b+1)^p` terms of the expansion: binomial coefficient product and the
/// per-gap choice of `j`.
pub fn cosine_expansion(p: usize, b: u32) -> Vec<(f64, Vec<u32>)> {
    let coef = coefficients(b);
    let mut out = vec![(1.0, Vec::with_capacity(p))];
    for _ in 0..p {
        out = out
            .into_iter()
            .flat_map(|(c, choice)| {
                (0..=b).map({
                    let coef = &coef;
                    move |j| {
                        let mut next = choice.clone();
                        next.push(j);
                        (c * coef[j as usize], next)
                    }
                })
            })
            .collect();
    }
    out
}

/// Cosine-weighted ISS computed as the explicit sum of `(b+1)^p` plain strict
/// real ISS over modulated letters.
pub fn cosine_iss_expanded(x: &TimeSeries, spec: &IssSpec) -> Result<Vec<f64>> {
    spec.validate(Some(x.ndim()))?;
    let Weighting::Cosine { b, f } = spec.weighting else {
        return Err(Error::UnsupportedSpec("cosine_iss_expanded needs a cosine weighting".into()));
    };
    let letters: Vec<Vec<f64>> = spec
        .word
        .letters()
        .iter()
        .map(|l| crate::iss::letter_eval(x, l, Semiring::Real))
        .collect::<Result<_>>()?;
    let len = x.len();
    let phi = modulators(len, b, f);
    let mut total = vec![0.0; len];
    for (coef, choice) in cosine_expansion(letters.len(), b) {
        let mut ys: Vec<Vec<f64>> = letters
            .iter()
            .enumerate()
            .map(|(k, l)| {
                (0..len)
                    .map(|t| {
                        let left = if k > 0 { phi[choice[k - 1] as usize][t] } else { 1.0 };
                        l[t] * left * phi[choice[k] as usize][t]
                    })
                    .collect()
            })
            .collect();
        let component = chain(&mut ys, Mode::Strict, Semiring::Real);
        let outer = &phi[*choice.last().expect("p >= 1") as usize];
        for t in 0..len {
            total[t] += coef * outer[t] * component[t];
        }
    }
    Ok(total)
}
