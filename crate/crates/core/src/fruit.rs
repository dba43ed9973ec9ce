//! Pipelines ("fruits"): branches of preparateurs, ISS specs and sieves.
//!
//! Every sample is NaN-filled first. Each branch then applies its prep chain,
//! evaluates all of its ISS specs on the result and reduces each ISS series
//! with every sieve. Data-dependent weightings and coquantile cuts read the
//! NaN-filled input before the prep chain.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iss::{iss_with_control, HKind, IssSpec, Mode, Weighting, DEFAULT_WEIGHT_SCALE};
use crate::prepare::{nan_fill, PrepChain, PrepStep};
use crate::semiring::Semiring;
use crate::series::TimeSeries;
use crate::sieve::{fit_window, kth_increments, FittedSieve, MpiDenominator, SieveSpec};
use crate::words::{alternating_arctic_words, enumerate_words, Word};

pub const PRESET_NAMES: [&str; 3] = ["general", "twi", "reduced:<real_w>,<arctic_len>,<cos_w>"];

/// Word family of a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum WordSet {
    /// All words up to the given weight over `dim` letters. `dim` defaults to
    /// the branch's output dimension.
    MaxWeight {
        max_weight: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    List { list: Vec<Word> },
    Alternating { alternating: Alternating },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alternating {
    pub dims: DimPairs,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimPairs {
    One([usize; 2]),
    Many(Vec<[usize; 2]>),
}

impl DimPairs {
    fn pairs(&self) -> Vec<(usize, usize)> {
        match self {
            DimPairs::One([a, b]) => vec![(*a, *b)],
            DimPairs::Many(v) => v.iter().map(|[a, b]| (*a, *b)).collect(),
        }
    }
}

impl WordSet {
    pub fn words(&self, branch_dim: usize) -> Result<Vec<Word>> {
        match self {
            WordSet::MaxWeight { max_weight, dim } => {
                let d = dim.unwrap_or(branch_dim);
                if d == 0 || *max_weight == 0 {
                    return Err(Error::InvalidConfig("max_weight and dim must be at least 1".into()));
                }
                Ok(enumerate_words(d, *max_weight))
            }
            WordSet::List { list } => {
                if list.is_empty() {
                    return Err(Error::InvalidConfig("empty word list".into()));
                }
                Ok(list.clone())
            }
            WordSet::Alternating { alternating } => {
                if alternating.length == 0 {
                    return Err(Error::InvalidConfig("alternating words need length >= 1".into()));
                }
                let mut out = Vec::new();
                for pair in alternating.dims.pairs() {
                    let (plus, minus) = alternating_arctic_words(pair, alternating.length)?;
                    out.push(plus);
                    out.push(minus);
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// One branch as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    #[serde(default)]
    pub prep: PrepChain,
    pub semiring: Semiring,
    pub mode: Mode,
    #[serde(default = "no_weighting")]
    pub weighting: OneOrMany<Weighting>,
    pub words: WordSet,
    pub sieves: Vec<SieveSpec>,
}

fn no_weighting() -> OneOrMany<Weighting> {
    OneOrMany::One(Weighting::None)
}

/// A branch with its specs enumerated: weightings outer, words inner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub prep: PrepChain,
    pub specs: Vec<IssSpec>,
    pub sieves: Vec<SieveSpec>,
}

impl BranchConfig {
    pub fn resolve(&self, input_dim: usize) -> Result<Branch> {
        let d = self.prep.output_dim(input_dim)?;
        let words = self.words.words(d)?;
        let mut specs = Vec::new();
        for weighting in self.weighting.to_vec() {
            for w in &words {
                let spec = IssSpec::new(w.clone(), self.semiring, self.mode, weighting);
                spec.validate(Some(d))?;
                specs.push(spec);
            }
        }
        if self.sieves.is_empty() {
            return Err(Error::InvalidConfig("branch without sieves".into()));
        }
        for s in &self.sieves {
            s.validate()?;
        }
        Ok(Branch {
            prep: self.prep.clone(),
            specs,
            sieves: self.sieves.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FruitConfig {
    pub branches: Vec<BranchConfig>,
}

/// Where a feature column comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub branch: usize,
    pub word: String,
    pub semiring: Semiring,
    pub mode: Mode,
    pub weighting: String,
    pub sieve: String,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "b{}|{}|{}|{}|{}|{}",
            self.branch, self.semiring, self.mode, self.weighting, self.word, self.sieve
        )
    }
}

fn general_sieves() -> Vec<SieveSpec> {
    let mut out: Vec<SieveSpec> = (0..3).map(|k| SieveSpec::npi(k, 0.5, 1.0)).collect();
    out.extend((0..3).map(|k| SieveSpec::mpi(k, 0.5, 1.0)));
    out.push(SieveSpec::End);
    out
}

impl FruitConfig {
    /// The three-branch pipeline with the default sizes.
    pub fn general() -> Self {
        Self::reduced(6, 48, 4)
    }

    /// General pipeline shape with configurable real word weight, arctic word
    /// length and cosine word weight.
    pub fn reduced(real_w: u32, arctic_len: usize, cos_w: u32) -> Self {
        let lift_std = PrepChain::new([PrepStep::IncLift, PrepStep::Std]);
        let cosine = [1u32, 2]
            .iter()
            .flat_map(|&b| [1.0, 3.0, 5.0, 7.0, 9.0].map(|n| Weighting::Cosine { b, f: n / 20.0 }))
            .collect();
        Self {
            branches: vec![
                BranchConfig {
                    prep: lift_std.clone(),
                    semiring: Semiring::Real,
                    mode: Mode::Strict,
                    weighting: OneOrMany::One(Weighting::Exponential {
                        h: HKind::Id,
                        scale: DEFAULT_WEIGHT_SCALE,
                        outer: false,
                    }),
                    words: WordSet::MaxWeight {
                        max_weight: real_w,
                        dim: Some(2),
                    },
                    sieves: general_sieves(),
                },
                BranchConfig {
                    prep: PrepChain::new([PrepStep::IncLift]),
                    semiring: Semiring::Arctic,
                    mode: Mode::NonStrict,
                    weighting: OneOrMany::One(Weighting::None),
                    words: WordSet::Alternating {
                        alternating: Alternating {
                            dims: DimPairs::Many(vec![[1, 1], [1, 2], [2, 1], [2, 2]]),
                            length: arctic_len,
                        },
                    },
                    sieves: general_sieves(),
                },
                BranchConfig {
                    prep: lift_std,
                    semiring: Semiring::Real,
                    mode: Mode::Strict,
                    weighting: OneOrMany::Many(cosine),
                    words: WordSet::MaxWeight {
                        max_weight: cos_w,
                        dim: Some(2),
                    },
                    sieves: general_sieves(),
                },
            ],
        }
    }

    /// Time-warping invariant pipeline.
    pub fn twi() -> Self {
        let sieves = vec![
            SieveSpec::npi(1, 0.5, 1.0),
            SieveSpec::Mpi {
                k: 1,
                alpha_l: 0.5,
                alpha_r: 1.0,
                denominator: MpiDenominator::TrainLength,
            },
            SieveSpec::End,
        ];
        Self {
            branches: vec![
                BranchConfig {
                    prep: PrepChain::new([PrepStep::Inc]),
                    semiring: Semiring::Real,
                    mode: Mode::Strict,
                    weighting: OneOrMany::One(Weighting::Exponential {
                        h: HKind::L1,
                        scale: DEFAULT_WEIGHT_SCALE,
                        outer: false,
                    }),
                    words: WordSet::MaxWeight {
                        max_weight: 9,
                        dim: Some(1),
                    },
                    sieves: sieves.clone(),
                },
                BranchConfig {
                    prep: PrepChain::default(),
                    semiring: Semiring::Arctic,
                    mode: Mode::NonStrict,
                    weighting: OneOrMany::One(Weighting::None),
                    words: WordSet::Alternating {
                        alternating: Alternating {
                            dims: DimPairs::One([1, 1]),
                            length: 48,
                        },
                    },
                    sieves,
                },
            ],
        }
    }

    /// `general`, `twi` or `reduced:<real_w>,<arctic_len>,<cos_w>`.
    pub fn preset(name: &str) -> Result<Self> {
        let unknown = || {
            Error::InvalidConfig(format!(
                "unknown preset {name:?}; available presets: {}",
                PRESET_NAMES.join(", ")
            ))
        };
        match name {
            "general" => Ok(Self::general()),
            "twi" => Ok(Self::twi()),
            _ => {
                let params = name.strip_prefix("reduced:").ok_or_else(unknown)?;
                let nums: Vec<usize> = params
                    .split(',')
                    .map(|p| p.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| unknown())?;
                match nums.as_slice() {
                    &[r, a, c] if r >= 1 && a >= 1 && c >= 1 => Ok(Self::reduced(r as u32, a, c as u32)),
                    _ => Err(unknown()),
                }
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if cfg.branches.is_empty() {
            return Err(Error::InvalidConfig("config has no branches".into()));
        }
        Ok(cfg)
    }

    /// A preset name, or otherwise the path of a JSON config file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if name_or_path == "reduced" {
            return Err(Error::InvalidConfig(
                "preset reduced needs explicit sizes, e.g. reduced:4,16,3".into(),
            ));
        }
        match Self::preset(name_or_path) {
            Ok(cfg) => Ok(cfg),
            Err(e) if !Path::new(name_or_path).is_file() => Err(e),
            Err(_) => {
                let text = fs::read_to_string(name_or_path).map_err(|source| Error::Io {
                    path: name_or_path.into(),
                    source,
                })?;
                Self::from_json(&text).map_err(|e| Error::InvalidConfig(format!("{name_or_path}: {e}")))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn resolve(&self, input_dim: usize) -> Result<Vec<Branch>> {
        self.branches.iter().map(|b| b.resolve(input_dim)).collect()
    }

    /// Number of columns produced for inputs of dimension `input_dim`.
    pub fn feature_count(&self, input_dim: usize) -> Result<usize> {
        Ok(self
            .resolve(input_dim)?
            .iter()
            .map(|b| b.specs.len() * b.sieves.len())
            .sum())
    }

    /// Fits all quantile windows on `train`.
    pub fn fit(&self, train: &[TimeSeries]) -> Result<FittedFruit> {
        Ok(self.fit_inner(train, false)?.0)
    }

    /// Fits and returns the training feature matrix from the same ISS pass.
    pub fn fit_transform(&self, train: &[TimeSeries]) -> Result<(FittedFruit, FeatureMatrix)> {
        let (fitted, cols) = self.fit_inner(train, true)?;
        let n = train.len();
        let m = cols.len();
        let mut data = vec![0.0; n * m];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                data[i * m + j] = *v;
            }
        }
        let matrix = FeatureMatrix {
            n_samples: n,
            n_features: m,
            data,
            columns: fitted.columns(),
        };
        matrix.check_finite()?;
        Ok((fitted, matrix))
    }

    fn fit_inner(&self, train: &[TimeSeries], keep: bool) -> Result<(FittedFruit, Vec<Vec<f64>>)> {
        let first = train.first().ok_or(Error::EmptyTrainingSet)?;
        let input_dim = first.ndim();
        if let Some(bad) = train.iter().find(|x| x.ndim() != input_dim) {
            return Err(Error::DimensionMismatch {
                expected: input_dim,
                got: bad.ndim(),
            });
        }
        let branches = self.resolve(input_dim)?;
        let controls: Vec<TimeSeries> = train.par_iter().map(nan_fill).collect();
        let mut fitted = Vec::with_capacity(branches.len());
        let mut columns = Vec::new();
        for branch in branches {
            let prepared: Vec<TimeSeries> = controls
                .par_iter()
                .map(|x| branch.prep.apply(x))
                .collect::<Result<_>>()?;
            let train_len = prepared.iter().map(TimeSeries::len).max().unwrap_or(0);
            let per_spec: Vec<(Vec<FittedSieve>, Vec<Vec<f64>>)> = branch
                .specs
                .par_iter()
                .map(|spec| {
                    let zs: Vec<Vec<f64>> = prepared
                        .iter()
                        .zip(&controls)
                        .map(|(x, c)| iss_with_control(x, spec, c))
                        .collect::<Result<_>>()?;
                    let sieves = branch
                        .sieves
                        .iter()
                        .map(|&s| fit_sieve(s, &zs, train_len))
                        .collect::<Result<Vec<_>>>()?;
                    let cols = if keep {
                        sieves
                            .iter()
                            .map(|fs| zs.iter().zip(&controls).map(|(z, c)| fs.apply(z, c)).collect())
                            .collect()
                    } else {
                        Vec::new()
                    };
                    Ok((sieves, cols))
                })
                .collect::<Result<_>>()?;
            let mut specs = Vec::with_capacity(per_spec.len());
            for (spec, (sieves, cols)) in branch.specs.into_iter().zip(per_spec) {
                specs.push(FittedSpec { spec, sieves });
                columns.extend(cols);
            }
            fitted.push(FittedBranch {
                prep: branch.prep,
                specs,
            });
        }
        Ok((
            FittedFruit {
                input_dim,
                branches: fitted,
            },
            columns,
        ))
    }
}

fn fit_sieve(spec: SieveSpec, zs: &[Vec<f64>], train_len: usize) -> Result<FittedSieve> {
    let window = match spec.window_levels() {
        Some((k, alpha_l, alpha_r)) => {
            let pool: Vec<f64> = zs.iter().flat_map(|z| kth_increments(z, k)).collect();
            Some(fit_window(pool, alpha_l, alpha_r)?)
        }
        None => None,
    };
    Ok(FittedSieve {
        spec,
        window,
        train_len: matches!(
            spec,
            SieveSpec::Mpi {
                denominator: MpiDenominator::TrainLength,
                ..
            }
        )
        .then_some(train_len),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSpec {
    pub spec: IssSpec,
    pub sieves: Vec<FittedSieve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedBranch {
    pub prep: PrepChain,
    pub specs: Vec<FittedSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedFruit {
    pub input_dim: usize,
    pub branches: Vec<FittedBranch>,
}

impl FittedFruit {
    pub fn n_features(&self) -> usize {
        self.branches
            .iter()
            .flat_map(|b| &b.specs)
            .map(|s| s.sieves.len())
            .sum()
    }

    pub fn columns(&self) -> Vec<Column> {
        let mut out = Vec::with_capacity(self.n_features());
        for (bi, branch) in self.branches.iter().enumerate() {
            for fs in &branch.specs {
                for sieve in &fs.sieves {
                    out.push(Column {
                        branch: bi,
                        word: fs.spec.word.to_string(),
                        semiring: fs.spec.semiring,
                        mode: fs.spec.mode,
                        weighting: fs.spec.weighting.to_string(),
                        sieve: sieve.spec.to_string(),
                    });
                }
            }
        }
        out
    }

    /// Feature row of one sample. Lengths may differ from the training data.
    pub fn transform_one(&self, x: &TimeSeries) -> Result<Vec<f64>> {
        if x.ndim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.ndim(),
            });
        }
        let control = nan_fill(x);
        let mut row = Vec::with_capacity(self.n_features());
        for branch in &self.branches {
            let prepared = branch.prep.apply(&control)?;
            for fs in &branch.specs {
                let z = iss_with_control(&prepared, &fs.spec, &control)?;
                row.extend(fs.sieves.iter().map(|s| s.apply(&z, &control)));
            }
        }
        Ok(row)
    }

    pub fn transform(&self, data: &[TimeSeries]) -> Result<FeatureMatrix> {
        let rows: Vec<Vec<f64>> = data.par_iter().map(|x| self.transform_one(x)).collect::<Result<_>>()?;
        let matrix = FeatureMatrix {
            n_samples: rows.len(),
            n_features: self.n_features(),
            data: rows.concat(),
            columns: self.columns(),
        };
        matrix.check_finite()?;
        Ok(matrix)
    }
}

/// Row-major `n_samples × n_features` matrix with column provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub n_samples: usize,
    pub n_features: usize,
    pub data: Vec<f64>,
    pub columns: Vec<Column>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_samples).map(|i| self.row(i).to_vec()).collect()
    }

    fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Error::InvalidSeries(format!(
                "non-finite feature in row {}, column {}",
                pos / self.n_features.max(1),
                self.columns[pos % self.n_features.max(1)]
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::stutter;
    use crate::sieve::Window;

    fn uni(v: Vec<f64>) -> TimeSeries {
        TimeSeries::univariate(v).unwrap()
    }

    fn toy_set(n: usize, len: usize) -> Vec<TimeSeries> {
        (0..n)
            .map(|i| uni((0..len).map(|t| ((t * (i + 2)) as f64 * 0.37).sin() + 0.1 * i as f64).collect()))
            .collect()
    }

    #[test]
    fn preset_sizes() {
        let g = FruitConfig::general().resolve(1).unwrap();
        assert_eq!(g[0].specs.len(), 1351);
        assert_eq!(g[1].specs.len(), 8);
        assert_eq!(g[2].specs.len(), 115 * 10);
        assert!(g.iter().all(|b| b.sieves.len() == 7));
        assert_eq!(FruitConfig::general().feature_count(1).unwrap(), (1351 + 8 + 1150) * 7);

        let t = FruitConfig::twi().resolve(1).unwrap();
        assert_eq!(t[0].specs.len(), 511);
        assert_eq!(t[1].specs.len(), 2);
        assert_eq!(FruitConfig::twi().feature_count(1).unwrap(), 1539);

        assert_eq!(FruitConfig::reduced(6, 48, 4), FruitConfig::general());
        assert_eq!(FruitConfig::reduced(4, 48, 3).resolve(1).unwrap()[0].specs.len(), 115);
        assert!(FruitConfig::general().resolve(2).is_err());
    }

    #[test]
    fn preset_names() {
        assert_eq!(FruitConfig::preset("general").unwrap(), FruitConfig::general());
        assert_eq!(FruitConfig::preset("reduced:2,4,1").unwrap(), FruitConfig::reduced(2, 4, 1));
        let err = FruitConfig::load("banana").unwrap_err().to_string();
        assert!(err.contains("general") && err.contains("twi"), "{err}");
        assert!(FruitConfig::load("reduced").is_err());
        assert!(FruitConfig::preset("reduced:0,1,1").is_err());
    }

    #[test]
    fn json_round_trip() {
        for cfg in [FruitConfig::general(), FruitConfig::twi()] {
            let back = FruitConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
        }
        let text = r#"{"branches":[{"prep":["inc"],"semiring":"arctic","mode":"non_strict",
            "words":{"list":["[1][1^(-1)]"]},"sieves":["end","npi:1"]}]}"#;
        let cfg = FruitConfig::from_json(text).unwrap();
        assert_eq!(cfg.feature_count(1).unwrap(), 2);
        assert!(FruitConfig::from_json(r#"{"branches":[]}"#).is_err());
        assert!(FruitConfig::from_json(r#"{"branches":[{"semiring":"real"}]}"#).is_err());
    }

    #[test]
    fn fit_and_transform() {
        let train = toy_set(6, 20);
        let cfg = FruitConfig::reduced(2, 4, 1);
        let fitted = cfg.fit(&train).unwrap();
        assert_eq!(fitted, cfg.fit(&train).unwrap());
        let m = fitted.transform(&train).unwrap();
        assert_eq!(m.n_features, cfg.feature_count(1).unwrap());
        assert_eq!(m.columns.len(), m.n_features);
        let (fitted2, m2) = cfg.fit_transform(&train).unwrap();
        assert_eq!(fitted2, fitted);
        assert_eq!(m2, m);
        // other lengths are fine
        let test = toy_set(3, 33);
        assert_eq!(fitted.transform(&test).unwrap().n_samples, 3);
        assert!(cfg.fit(&[]).is_err());
        assert!(cfg.fit(&train[..1]).is_ok());
        let mixed = vec![train[0].clone(), TimeSeries::new(vec![vec![1.0], vec![2.0]]).unwrap()];
        assert!(matches!(cfg.fit(&mixed), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn npi_windows_are_open_above() {
        let cfg = FruitConfig::from_json(
            r#"{"branches":[{"semiring":"real","mode":"strict","words":{"max_weight":2},"sieves":["npi:1:0.5:1"]}]}"#,
        )
        .unwrap();
        let fitted = cfg.fit(&toy_set(4, 12)).unwrap();
        for fs in &fitted.branches[0].specs {
            let Some(Window { upper, .. }) = fs.sieves[0].window else {
                panic!("window not fitted")
            };
            assert_eq!(upper, None);
        }
    }

    #[test]
    fn twi_features_survive_stuttering() {
        let train = toy_set(5, 30);
        let fitted = FruitConfig::twi().fit(&train).unwrap();
        let base = fitted.transform(&train).unwrap();
        let stuttered: Vec<TimeSeries> = train.iter().enumerate().map(|(i, x)| stutter(x, 0.5, i as u64)).collect();
        let warped = fitted.transform(&stuttered).unwrap();
        for (a, b) in base.data.iter().zip(&warped.data) {
            assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0), "{a} vs {b}");
        }
    }
}
