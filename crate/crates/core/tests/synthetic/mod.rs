#![allow(dead_code)]

use std::f64::consts::PI;

use itersum_core::data::LabeledDataset;
use itersum_core::prepare::std;
use itersum_core::TimeSeries;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Class "A": a standardised sine with random frequency and phase. Class
/// "B": a sine plus a linear trend. Both get Gaussian noise of the given σ.
pub fn sine_vs_trend(rng: &mut impl Rng, per_class: usize, len: usize, sigma: f64) -> LabeledDataset {
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for i in 0..2 * per_class {
        let class_b = i % 2 == 1;
        let freq = rng.gen_range(2.0..4.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        let slope = rng.gen_range(1.5..3.0);
        let sine: Vec<f64> = (0..len)
            .map(|t| (2.0 * PI * freq * t as f64 / len as f64 + phase).sin())
            .collect();
        let base = if class_b {
            sine.iter().enumerate().map(|(t, v)| v + slope * t as f64 / len as f64).collect()
        } else {
            std(&TimeSeries::univariate(sine).unwrap()).dim(0).to_vec()
        };
        let noisy = base.into_iter().map(|v| v + noise.sample(rng)).collect();
        samples.push(TimeSeries::univariate(noisy).unwrap());
        labels.push(if class_b { "B" } else { "A" }.to_string());
    }
    LabeledDataset::new(samples, labels).unwrap()
}
