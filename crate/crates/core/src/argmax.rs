//! Arctic non-strict ISS together with the index tuple attaining it.
//!
//! The forward pass keeps, per level `k`, the running maximum and the time
//! index `J^(k)_t` where it was last improved (ties keep the earlier index).
//! The backward pass walks from the last level down and, for every position
//! after the level-`k` argmax `t̂ = J^(k)_T`, rewrites `J^(k-1)` with its value
//! at `t̂`. After that the tuple `(J^(1)_T, ..., J^(p)_T)` attains `z_T`.

use crate::error::{Error, Result};
use crate::iss::letter_eval;
use crate::semiring::Semiring;
use crate::series::TimeSeries;
use crate::words::Word;

#[derive(Debug, Clone, PartialEq)]
pub struct ArgmaxTrace {
    /// Arctic non-strict ISS values `z_t`.
    pub values: Vec<f64>,
    /// Indices straight out of the forward pass, `forward[k][t]` is 1-based.
    pub forward: Vec<Vec<usize>>,
    /// Indices after the backward correction.
    pub indices: Vec<Vec<usize>>,
}

impl ArgmaxTrace {
    /// `(J^(1)_t, ..., J^(p)_t)` for a 1-based `t`.
    pub fn tuple_at(&self, t: usize) -> Vec<usize> {
        self.indices.iter().map(|row| row[t - 1]).collect()
    }

    /// Index tuple at the last time step.
    pub fn final_tuple(&self) -> Vec<usize> {
        self.tuple_at(self.values.len())
    }
}

pub fn arctic_iss_with_indices(x: &TimeSeries, w: &Word) -> Result<ArgmaxTrace> {
    w.check_dims(x.ndim())?;
    let len = x.len();
    let p = w.len();

    // The accumulator starts at the multiplicative identity, so level 1 is
    // the running maximum of the first letter.
    let mut z = vec![Semiring::Arctic.one(); len];
    let mut forward = vec![vec![1usize; len]; p];
    for (k, letter) in w.letters().iter().enumerate() {
        let values = letter_eval(x, letter, Semiring::Arctic)?;
        for (zt, v) in z.iter_mut().zip(&values) {
            *zt = Semiring::Arctic.mul(*zt, *v);
        }
        let jk = &mut forward[k];
        for t in 1..len {
            if z[t - 1] >= z[t] {
                z[t] = z[t - 1];
                jk[t] = jk[t - 1];
            } else {
                jk[t] = t + 1;
            }
        }
    }

    let mut indices = forward.clone();
    for k in (1..p).rev() {
        let t_hat = indices[k][len - 1];
        let keep = indices[k - 1][t_hat - 1];
        for j in indices[k - 1].iter_mut().skip(t_hat) {
            *j = keep;
        }
    }

    if z.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidSeries("NaN in arctic argmax trace".into()));
    }
    Ok(ArgmaxTrace {
        values: z,
        forward,
        indices,
    })
}

/// Arctic value of the word evaluated at a given 1-based index tuple.
pub fn evaluate_at(x: &TimeSeries, w: &Word, tuple: &[usize]) -> Result<f64> {
    let mut total = Semiring::Arctic.one();
    for (letter, &t) in w.letters().iter().zip(tuple) {
        for &(dim, exp) in letter.factors() {
            let v = Semiring::Arctic.pow(x.get(dim - 1, t - 1), exp)?;
            total = Semiring::Arctic.mul(total, v);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iss::{iss, iss_brute, IssSpec, Mode};
    use crate::words::parse_word;
    use proptest::prelude::*;

    fn uni(v: &[f64]) -> TimeSeries {
        TimeSeries::univariate(v.to_vec()).unwrap()
    }

    #[test]
    fn worked_example() {
        let x = uni(&[1.0, 3.0, -4.0, 2.0, 0.0, 5.0, 1.0, 1.0]);
        let w = parse_word("[1][1^(-1)][1]", 1).unwrap();
        let trace = arctic_iss_with_indices(&x, &w).unwrap();
        assert_eq!(trace.forward[0], [1, 2, 2, 2, 2, 6, 6, 6]);
        assert_eq!(trace.forward[1], [1, 1, 3, 3, 3, 3, 3, 3]);
        // the third level improves at t = 4 (3 + 4 + 2 = 9) and t = 6
        assert_eq!(trace.forward[2], [1, 2, 2, 4, 4, 6, 6, 6]);
        assert_eq!(trace.indices[0], [1, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(trace.indices[1], [1, 1, 3, 3, 3, 3, 3, 3]);
        assert_eq!(trace.final_tuple(), [2, 3, 6]);
        assert_eq!(trace.values, [1.0, 3.0, 3.0, 9.0, 9.0, 12.0, 12.0, 12.0]);
        assert_eq!(evaluate_at(&x, &w, &[2, 3, 6]).unwrap(), 12.0);
    }

    #[test]
    fn single_step() {
        let trace = arctic_iss_with_indices(&uni(&[7.0]), &parse_word("[1]", 1).unwrap()).unwrap();
        assert_eq!(trace.values, [7.0]);
        assert_eq!(trace.indices, [vec![1]]);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<f64>, Vec<i32>)> {
        (
            prop::collection::vec((-20i32..20).prop_map(|v| f64::from(v) / 4.0), 1..=16),
            prop::collection::vec(prop_oneof![-2..=-1i32, 1..=2i32], 1..=4),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn final_tuple_attains_maximum((values, exps) in arb_case()) {
            let x = uni(&values);
            let text: String = exps.iter().map(|e| format!("[1^({e})]")).collect();
            let w = parse_word(&text, 1).unwrap();
            let trace = arctic_iss_with_indices(&x, &w).unwrap();
            let spec = IssSpec::plain(w.clone(), Semiring::Arctic, Mode::NonStrict);
            prop_assert_eq!(&trace.values, &iss(&x, &spec).unwrap());
            let brute = iss_brute(&x, &spec).unwrap();
            let len = values.len();
            prop_assert_eq!(trace.values[len - 1], brute[len - 1]);
            let tuple = trace.final_tuple();
            prop_assert!(tuple.windows(2).all(|p| p[0] <= p[1]), "{:?}", tuple);
            prop_assert_eq!(evaluate_at(&x, &w, &tuple).unwrap(), trace.values[len - 1]);
        }
    }
}
