#![allow(dead_code)]

use itersum_core::iss::HKind;
use itersum_core::words::{ExtendedLetter, Word};
use itersum_core::{IssSpec, Mode, Semiring, TimeSeries, Weighting};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_series(rng: &mut impl Rng, d: usize, len: usize) -> TimeSeries {
    TimeSeries::new((0..d).map(|_| (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()).unwrap()
}

/// Random word over `d` dims with at most `max_p` letters and total weight
/// at most `max_weight`.
pub fn random_word(rng: &mut impl Rng, d: usize, max_weight: u32, max_p: usize, negative: bool) -> Word {
    loop {
        let p = rng.gen_range(1..=max_p);
        let letters: Option<Vec<ExtendedLetter>> = (0..p)
            .map(|_| {
                let factors: Vec<(usize, i32)> = (0..rng.gen_range(1..=2))
                    .map(|_| {
                        let mag = rng.gen_range(1..=2);
                        let sign = if negative && rng.gen_bool(0.4) { -1 } else { 1 };
                        (rng.gen_range(1..=d), sign * mag)
                    })
                    .collect();
                ExtendedLetter::new(factors).ok()
            })
            .collect();
        if let Some(letters) = letters {
            let w = Word::new(letters).unwrap();
            if w.weight() <= max_weight {
                return w;
            }
        }
    }
}

/// A random valid spec for a series of dimension `d`.
pub fn random_spec(rng: &mut impl Rng, d: usize, max_weight: u32, max_p: usize) -> IssSpec {
    let semiring = *[Semiring::Real, Semiring::Arctic].choose(rng).unwrap();
    let mode = *[Mode::Strict, Mode::NonStrict].choose(rng).unwrap();
    let h = *[HKind::Id, HKind::L1, HKind::L2].choose(rng).unwrap();
    let exponential = Weighting::Exponential {
        h,
        scale: rng.gen_range(0.5..=300.0),
        outer: rng.gen_bool(0.5),
    };
    let weighting = match (semiring, mode, rng.gen_range(0..3)) {
        (_, _, 0) => Weighting::None,
        (Semiring::Real, Mode::Strict, 1) => Weighting::Cosine {
            b: rng.gen_range(1..=2),
            f: rng.gen_range(0.05..=1.0),
        },
        (Semiring::Real, Mode::NonStrict, _) => Weighting::None,
        _ => exponential,
    };
    let word = random_word(rng, d, max_weight, max_p, semiring == Semiring::Arctic);
    let spec = IssSpec::new(word, semiring, mode, weighting);
    spec.validate(Some(d)).unwrap();
    spec
}

/// `|a - b| <= tol · max(|a|, |b|, 1)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
