//! Naive enumeration of every index tuple. Test oracle only: `O(T^{p+1})`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::iss::{alphas, h_eval, IssSpec, Mode, Weighting};
use crate::semiring::Semiring;
use crate::series::TimeSeries;

const MAX_P: usize = 6;
const MAX_T: usize = 64;

pub fn iss_brute(x: &TimeSeries, spec: &IssSpec) -> Result<Vec<f64>> {
    iss_brute_with_control(x, spec, x)
}

pub fn iss_brute_with_control(x: &TimeSeries, spec: &IssSpec, control: &TimeSeries) -> Result<Vec<f64>> {
    spec.validate(Some(x.ndim()))?;
    let p = spec.word.len();
    let len = x.len();
    if p > MAX_P || len > MAX_T {
        return Err(Error::OracleTooLarge { p, len });
    }
    if control.len() != len {
        return Err(Error::LengthMismatch(control.len(), len));
    }
    let s = spec.semiring;

    // letter value at 1-based time t
    let letter = |k: usize, t: usize| -> f64 {
        let mut v = s.one();
        for &(dim, exp) in spec.word.letters()[k].factors() {
            let pw = s.pow(x.get(dim - 1, t - 1), exp).expect("validated");
            v = s.mul(v, pw);
        }
        v
    };

    let g = |t: usize, h, scale: f64| scale * h_eval(h, t, control);

    let weight = |tuple: &[usize], t: usize| -> f64 {
        match spec.weighting {
            Weighting::None => s.one(),
            Weighting::Exponential { h, scale, outer } => {
                let alpha = alphas(p, outer);
                let mut exponent = 0.0;
                for k in 0..p {
                    let next = if k + 1 < p { tuple[k + 1] } else { t };
                    exponent += alpha[k] * (g(tuple[k], h, scale) - g(next, h, scale));
                }
                match s {
                    Semiring::Real => exponent.exp(),
                    Semiring::Arctic => exponent,
                }
            }
            Weighting::Cosine { b, f } => {
                let alpha = PI / (f * len as f64);
                (0..p)
                    .map(|k| {
                        let next = if k + 1 < p { tuple[k + 1] } else { t };
                        (alpha * (tuple[k] as f64 - next as f64)).cos().powi(b as i32)
                    })
                    .product()
            }
        }
    };

    let strict = spec.mode == Mode::Strict;
    let mut out = Vec::with_capacity(len);
    let mut tuple = vec![0usize; p];
    for t in 1..=len {
        let mut total = s.zero();
        // odometer over nondecreasing / increasing tuples bounded by t
        fn visit(
            k: usize,
            lo: usize,
            t: usize,
            strict: bool,
            tuple: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if k == tuple.len() {
                f(tuple);
                return;
            }
            for i in lo..=t {
                tuple[k] = i;
                visit(k + 1, if strict { i + 1 } else { i }, t, strict, tuple, f);
            }
        }
        visit(0, 1, t, strict, &mut tuple, &mut |tp: &[usize]| {
            let term = match (spec.weighting, s) {
                // Telescoped form of the same weight, Σ (α_k - α_{k-1}) g(t_k) - α_p g(t),
                // added index by index so that max-plus values come out bit-identical
                // to the recursion.
                (Weighting::Exponential { h, scale, outer }, Semiring::Arctic) => {
                    let alpha = alphas(p, outer);
                    let mut v = s.one();
                    let mut prev = 0.0;
                    for (k, &tk) in tp.iter().enumerate() {
                        let delta = alpha[k] - prev;
                        prev = alpha[k];
                        let mut y = letter(k, tk);
                        if delta != 0.0 {
                            y += delta * g(tk, h, scale);
                        }
                        v = s.mul(v, y);
                    }
                    if alpha[p - 1] != 0.0 {
                        v -= alpha[p - 1] * g(t, h, scale);
                    }
                    v
                }
                _ => {
                    let mut term = weight(tp, t);
                    for (k, &tk) in tp.iter().enumerate() {
                        term = s.mul(term, letter(k, tk));
                    }
                    term
                }
            };
            total = s.add(total, term);
        });
        out.push(total);
    }
    Ok(out)
}
