use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use itersum_core::argmax::arctic_iss_with_indices;
use itersum_core::classify::{accuracy, default_lambda_grid, RidgeModel};
use itersum_core::data::{lengthen_tail, load_ucr, stutter_dataset, Delimiter, LabeledDataset};
use itersum_core::words::{alternating_arctic_words, enumerate_words, parse_word};
use itersum_core::{FittedFruit, FruitConfig, Semiring, TimeSeries};

const EVAL_HEADER: [&str; 5] = ["dataset", "config", "fit_seconds", "transform_seconds", "accuracy"];

#[derive(Parser)]
#[command(name = "itersum", version, about = "Iterated-sums signature features for time series classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DelimArg {
    Tab,
    Comma,
    Auto,
}

impl From<DelimArg> for Delimiter {
    fn from(d: DelimArg) -> Self {
        match d {
            DelimArg::Tab => Delimiter::Tab,
            DelimArg::Comma => Delimiter::Comma,
            DelimArg::Auto => Delimiter::Auto,
        }
    }
}

#[derive(clap::Args)]
struct DataArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Preset name (general, twi, reduced:R,A,C) or JSON config file.
    #[arg(long)]
    config: String,
    #[arg(long, value_enum, default_value = "auto")]
    delimiter: DelimArg,
}

#[derive(Subcommand)]
enum Command {
    /// Fit on a training split and report test accuracy as CSV.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for symmetry with the other commands; eval itself is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train once, then test on stuttered copies of the test set.
    StutterEval {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated stutter proportions.
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.5,0.9")]
        proportions: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Retrain per proportion on a training set whose series are padded
        /// with their last value by as many steps as the test set grew.
        #[arg(long)]
        lengthen_train: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List words in canonical form.
    Words {
        #[arg(long, requires = "max_weight", conflicts_with = "alternating")]
        d: Option<usize>,
        #[arg(long)]
        max_weight: Option<u32>,
        /// `a,b,length`
        #[arg(long, value_delimiter = ',', num_args = 1)]
        alternating: Option<Vec<usize>>,
    },
    /// Arctic ISS trace with the attaining index tuples.
    Argmax {
        /// File with the values of a univariate series, separated by commas or whitespace.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value = "arctic")]
        semiring: Semiring,
    },
    /// Evaluate every `<name>_TRAIN` / `<name>_TEST` pair in a directory.
    Benchmark {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        delimiter: DelimArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit a pipeline and classifier and save them as JSON.
    Fit {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        config: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        delimiter: DelimArg,
    },
    /// Predict labels with a saved model, one per line.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        delimiter: DelimArg,
    },
    /// Write the feature matrix of a dataset (windows fitted on --train) as CSV.
    Transform {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        delimiter: DelimArg,
    },
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    config: String,
    fruit: FittedFruit,
    ridge: RidgeModel,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Eval { data, out, seed: _ } => {
            let row = eval_pair(&data.train, &data.test, &data.config, data.delimiter.into())?;
            write_csv(out.as_deref(), &EVAL_HEADER, &[row])
        }
        Command::StutterEval {
            data,
            proportions,
            seed,
            lengthen_train,
            out,
        } => {
            let rows = stutter_eval(&data, &proportions, seed, lengthen_train)?;
            write_csv(out.as_deref(), &["proportion", "accuracy"], &rows)
        }
        Command::Words {
            d,
            max_weight,
            alternating,
        } => words(d, max_weight, alternating),
        Command::Argmax { input, word, semiring } => argmax(&input, &word, semiring),
        Command::Benchmark {
            dir,
            config,
            out,
            delimiter,
            seed: _,
        } => benchmark(&dir, &config, out.as_deref(), delimiter.into()),
        Command::Fit {
            train,
            config,
            model,
            delimiter,
        } => {
            let cfg = FruitConfig::load(&config)?;
            let train = load(&train, delimiter.into())?;
            let (fruit, features) = cfg.fit_transform(&train.samples)?;
            let ridge = RidgeModel::fit(&features.rows(), &train.labels, &default_lambda_grid())?;
            let saved = SavedModel { config, fruit, ridge };
            let text = serde_json::to_string(&saved)?;
            fs::write(&model, text).with_context(|| format!("{}", model.display()))
        }
        Command::Predict {
            model,
            data,
            out,
            delimiter,
        } => {
            let text = fs::read_to_string(&model).with_context(|| format!("{}", model.display()))?;
            let saved: SavedModel =
                serde_json::from_str(&text).with_context(|| format!("{}: not a saved model", model.display()))?;
            let ds = load(&data, delimiter.into())?;
            let features = saved.fruit.transform(&ds.samples)?;
            let predicted = saved.ridge.predict(&features.rows())?;
            let mut body = predicted.join("\n");
            body.push('\n');
            emit(out.as_deref(), &body)?;
            eprintln!("accuracy against file labels: {}", accuracy(&predicted, &ds.labels)?);
            Ok(())
        }
        Command::Transform {
            train,
            data,
            config,
            out,
            delimiter,
        } => {
            let cfg = FruitConfig::load(&config)?;
            let train = load(&train, delimiter.into())?;
            let ds = load(&data, delimiter.into())?;
            let fruit = cfg.fit(&train.samples)?;
            let features = fruit.transform(&ds.samples)?;
            let mut header = vec!["label".to_string()];
            header.extend(features.columns.iter().map(ToString::to_string));
            let rows: Vec<Vec<String>> = (0..features.n_samples)
                .map(|i| {
                    std::iter::once(ds.labels[i].clone())
                        .chain(features.row(i).iter().map(|v| format!("{v:e}")))
                        .collect()
                })
                .collect();
            write_csv(out.as_deref(), &header, &rows)
        }
    }
}

fn load(path: &Path, delimiter: Delimiter) -> Result<LabeledDataset> {
    Ok(load_ucr(path, delimiter)?)
}

fn dataset_name(train: &Path) -> String {
    let stem = train.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    stem.strip_suffix("_TRAIN").unwrap_or(stem).to_string()
}

fn secs(t: Instant) -> String {
    format!("{:.3}", t.elapsed().as_secs_f64())
}

fn fit_model(cfg: &FruitConfig, train: &LabeledDataset) -> Result<(FittedFruit, RidgeModel)> {
    let (fruit, features) = cfg.fit_transform(&train.samples)?;
    let ridge = RidgeModel::fit(&features.rows(), &train.labels, &default_lambda_grid())?;
    Ok((fruit, ridge))
}

fn score(fruit: &FittedFruit, ridge: &RidgeModel, test: &LabeledDataset) -> Result<f64> {
    let features = fruit.transform(&test.samples)?;
    let predicted = ridge.predict(&features.rows())?;
    Ok(accuracy(&predicted, &test.labels)?)
}

fn eval_pair(train: &Path, test: &Path, config: &str, delimiter: Delimiter) -> Result<Vec<String>> {
    let cfg = FruitConfig::load(config)?;
    let train_ds = load(train, delimiter)?;
    let test_ds = load(test, delimiter)?;
    let start = Instant::now();
    let (fruit, ridge) = fit_model(&cfg, &train_ds)?;
    let fit_seconds = secs(start);
    let start = Instant::now();
    let acc = score(&fruit, &ridge, &test_ds)?;
    let transform_seconds = secs(start);
    Ok(vec![
        dataset_name(train),
        config.to_string(),
        fit_seconds,
        transform_seconds,
        format!("{acc:.6}"),
    ])
}

fn stutter_eval(data: &DataArgs, proportions: &[f64], seed: u64, lengthen_train: bool) -> Result<Vec<Vec<String>>> {
    if let Some(p) = proportions.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        bail!("invalid stutter proportion {p}");
    }
    let cfg = FruitConfig::load(&data.config)?;
    let train = load(&data.train, data.delimiter.into())?;
    let test = load(&data.test, data.delimiter.into())?;
    let base = fit_model(&cfg, &train)?;
    proportions
        .iter()
        .map(|&p| {
            let warped = stutter_dataset(&test, p, seed);
            let acc = if lengthen_train && p > 0.0 {
                let padded = train.map_samples(|x| lengthen_tail(x, (p * x.len() as f64).round() as usize));
                let (fruit, ridge) = fit_model(&cfg, &padded)?;
                score(&fruit, &ridge, &warped)?
            } else {
                score(&base.0, &base.1, &warped)?
            };
            Ok(vec![p.to_string(), format!("{acc:.6}")])
        })
        .collect()
}

fn words(d: Option<usize>, max_weight: Option<u32>, alternating: Option<Vec<usize>>) -> Result<()> {
    let list = match (d, max_weight, alternating) {
        (Some(d), Some(w), None) => {
            if d == 0 || w == 0 {
                bail!("--d and --max-weight must be at least 1");
            }
            enumerate_words(d, w)
        }
        (None, None, Some(alt)) => {
            let &[a, b, len] = alt.as_slice() else {
                bail!("--alternating expects a,b,length");
            };
            if len == 0 {
                bail!("--alternating length must be at least 1");
            }
            let (plus, minus) = alternating_arctic_words((a, b), len)?;
            vec![plus, minus]
        }
        _ => bail!("use either --d with --max-weight, or --alternating a,b,length"),
    };
    let mut body = String::new();
    for w in &list {
        body.push_str(&w.to_string());
        body.push('\n');
    }
    body.push_str(&format!("# {} words\n", list.len()));
    emit(None, &body)
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            s.parse::<f64>()
                .with_context(|| format!("{}: value {}: not a number: {s:?}", path.display(), i + 1))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        bail!("{}: no values", path.display());
    }
    Ok(TimeSeries::univariate(values)?)
}

fn argmax(input: &Path, word: &str, semiring: Semiring) -> Result<()> {
    if semiring != Semiring::Arctic {
        bail!("argmax tracking requires the arctic semiring, got {semiring}");
    }
    let x = read_series(input)?;
    let w = parse_word(word, x.ndim())?;
    let trace = arctic_iss_with_indices(&x, &w)?;
    let p = w.len();
    let mut header = vec!["t".to_string(), "x".to_string(), "z".to_string()];
    header.extend((1..=p).map(|k| format!("forward_j{k}")));
    header.extend((1..=p).map(|k| format!("j{k}")));
    let rows: Vec<Vec<String>> = (0..x.len())
        .map(|t| {
            let mut row = vec![(t + 1).to_string(), x.get(0, t).to_string(), trace.values[t].to_string()];
            row.extend(trace.forward.iter().map(|j| j[t].to_string()));
            row.extend(trace.indices.iter().map(|j| j[t].to_string()));
            row
        })
        .collect();
    write_csv(None, &header, &rows)
}

/// `(name, train, test)` for every `<name>_TRAIN*` with a matching `<name>_TEST*`,
/// looking in `dir` and its immediate subdirectories.
fn find_pairs(dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let mut files = Vec::new();
    let mut stack = vec![(dir.to_path_buf(), 0)];
    while let Some((d, depth)) = stack.pop() {
        for entry in fs::read_dir(&d).with_context(|| format!("{}", d.display()))? {
            let path = entry?.path();
            if path.is_dir() && depth == 0 {
                stack.push((path, 1));
            } else if path.is_file() {
                files.push(path);
            }
        }
    }
    files.sort();
    let mut pairs = Vec::new();
    for train in &files {
        let Some(file_name) = train.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(idx) = file_name.find("_TRAIN") else {
            continue;
        };
        let test_name = format!("{}_TEST{}", &file_name[..idx], &file_name[idx + "_TRAIN".len()..]);
        let test = train.with_file_name(test_name);
        if test.is_file() {
            pairs.push((file_name[..idx].to_string(), train.clone(), test));
        }
    }
    Ok(pairs)
}

fn benchmark(dir: &Path, config: &str, out: Option<&Path>, delimiter: Delimiter) -> Result<()> {
    FruitConfig::load(config)?;
    let pairs = find_pairs(dir)?;
    let mut rows = Vec::with_capacity(pairs.len());
    for (name, train, test) in pairs {
        match eval_pair(&train, &test, config, delimiter) {
            Ok(mut row) => {
                row[0] = name;
                eprintln!("{}: accuracy {}", row[0], row[4]);
                rows.push(row);
            }
            Err(e) => {
                eprintln!("error: {name}: {}", format!("{e:#}").replace('\n', " "));
                rows.push(vec![name, config.to_string(), String::new(), String::new(), "NaN".into()]);
            }
        }
    }
    write_csv(out, &EVAL_HEADER, &rows)
}

fn write_csv<S: AsRef<str>>(out: Option<&Path>, header: &[S], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.iter().map(AsRef::as_ref))?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    emit(out, std::str::from_utf8(&bytes)?)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("{}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}
