//! Repeated cross-validated benchmarks over several datasets and methods,
//! with Friedman mean ranks.
//!
//! For every dataset, method and repetition: the training split is
//! standardized and ℓ1-rescaled, λ is selected by k-fold cross-validation on
//! it, the method is refit on the whole training split with that λ, and the
//! refit is scored on the test split. Test accuracies are pooled over
//! repetitions before methods are ranked.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::alpha_domain::Rational;
use crate::classifier::{accuracy, default_lambda_grid, fit, prepare_train, select_lambda, Init, TrainConfig};
use crate::dataset::{load_csv, CsvOptions, CvPlan, Dataset, LabelColumn};
use crate::losses::{make_spec, LossMode, MarginLoss};
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("name {0:?} is registered more than once")]
    NameCollision(String),
    #[error("no accuracy for dataset {dataset:?}, method {method:?}")]
    MissingCell { dataset: usize, method: usize },
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("nothing to run: {0}")]
    Empty(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub loss: MarginLoss,
    pub grid: Vec<f64>,
}

impl MethodSpec {
    pub fn new(name: impl Into<String>, loss: MarginLoss) -> Self {
        Self {
            name: name.into(),
            loss,
            grid: default_lambda_grid(),
        }
    }
}

/// The 13 default methods: five H-Bregman and five L-Bregman members, the
/// logistic loss, the hinge loss and the squared hinge loss.
pub fn default_methods() -> Vec<MethodSpec> {
    let bt = |name: &str, p: i64, q: i64, mode: LossMode| {
        MethodSpec::new(name, make_spec(Rational::new(p, q), mode, None).expect("supported alpha").into())
    };
    let mut v = Vec::new();
    for (i, (p, q)) in [(58, 59), (68, 69), (76, 77), (78, 79), (90, 91)].into_iter().enumerate() {
        v.push(bt(&format!("HB{}", i + 1), p, q, LossMode::HBregman));
    }
    for (i, (p, q)) in [(62, 63), (70, 71), (80, 81), (84, 85), (92, 93)].into_iter().enumerate() {
        v.push(bt(&format!("LB{}", i + 1), p, q, LossMode::LBregman));
    }
    v.push(bt("Logistic", 1, 1, LossMode::LBregman));
    v.push(MethodSpec::new("Hinge", MarginLoss::hinge(Rational::ZERO, 1.0).expect("hinge")));
    v.push(MethodSpec::new("L2SVM", MarginLoss::hinge(Rational::new(1, 2), 0.25).expect("squared hinge")));
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub train: PathBuf,
    pub test: PathBuf,
    pub csv: CsvOptions,
}

/// Parses a manifest: one dataset per line as
/// `name,train,test[,label_col[,has_header]]`. Relative paths resolve
/// against `base_dir`; blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<DatasetSpec>, BenchError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| BenchError::Manifest { line: k + 1, msg };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() < 3 || f.len() > 5 {
            return Err(err(format!("expected 3 to 5 fields, found {}", f.len())));
        }
        let label_col = f.get(3).map_or(Ok(LabelColumn::Last), |s| s.parse()).expect("infallible");
        let has_header = match f.get(4).map(|s| s.to_ascii_lowercase()) {
            None => false,
            Some(s) => match s.as_str() {
                "true" | "yes" | "1" | "header" => true,
                "false" | "no" | "0" | "" => false,
                _ => return Err(err(format!("bad header flag {s:?}"))),
            },
        };
        out.push(DatasetSpec {
            name: f[0].to_string(),
            train: base_dir.join(f[1]),
            test: base_dir.join(f[2]),
            csv: CsvOptions {
                label_col,
                has_header,
                label_map: None,
            },
        });
    }
    Ok(out)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<DatasetSpec>, BenchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BenchConfig {
    /// Folds, repetitions and the master seed.
    pub plan: CvPlan,
    pub train: TrainConfig,
}

/// Raw train/test splits of one dataset, or the reason they are missing.
pub struct BenchDataset {
    pub name: String,
    pub data: Result<(Dataset, Dataset), String>,
}

impl BenchDataset {
    pub fn new(name: impl Into<String>, train: Dataset, test: Dataset) -> Self {
        Self {
            name: name.into(),
            data: Ok((train, test)),
        }
    }

    pub fn load(spec: &DatasetSpec) -> Self {
        let data = load_csv(&spec.train, &spec.csv)
            .and_then(|tr| Ok((tr, load_csv(&spec.test, &spec.csv)?)))
            .map_err(|e| e.to_string());
        Self {
            name: spec.name.clone(),
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub dataset: usize,
    pub method: usize,
    pub repetition: usize,
    /// Selected λ and test hits, or the failure message.
    pub outcome: Result<CellScore, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellScore {
    pub lambda: f64,
    pub correct: usize,
    pub n_test: usize,
}

impl CellScore {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.n_test as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub cells: Vec<CellResult>,
    /// `accuracy[d][m]`: test accuracy pooled over repetitions, `None` if any
    /// repetition failed.
    pub accuracy: Vec<Vec<Option<f64>>>,
    /// Indices of datasets with every cell present; only these are ranked.
    pub ranked: Vec<usize>,
    pub failures: Vec<(String, String)>,
    pub mean_accuracy: Vec<f64>,
    pub friedman_rank: Vec<f64>,
}

fn check_unique<'a>(names: impl Iterator<Item = &'a str>) -> Result<(), BenchError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(BenchError::NameCollision(n.to_string()));
        }
    }
    Ok(())
}

/// Loads every dataset of the manifest and runs [`run_benchmark_on`].
pub fn run_benchmark(specs: &[DatasetSpec], methods: &[MethodSpec], cfg: &BenchConfig) -> Result<BenchmarkReport, BenchError> {
    check_unique(specs.iter().map(|s| s.name.as_str()))?;
    let data: Vec<BenchDataset> = specs.iter().map(BenchDataset::load).collect();
    run_benchmark_on(&data, methods, cfg)
}

fn run_cell(train: &Dataset, test: &Dataset, method: &MethodSpec, cfg: &BenchConfig, fold_seed: u64, rep: usize, init_seed: u64) -> Result<CellScore, String> {
    let plan = CvPlan {
        seed: fold_seed,
        ..cfg.plan
    };
    let train_cfg = TrainConfig {
        init: match cfg.train.init {
            Init::Zeros => Init::Zeros,
            Init::SeededUniform(_) => Init::SeededUniform(init_seed),
        },
        ..cfg.train
    };
    let sel = select_lambda(train, &method.loss, &plan, &method.grid, &train_cfg, rep).map_err(|e| e.to_string())?;
    let refit = fit(
        train,
        &method.loss,
        &TrainConfig {
            lambda: sel.best_lambda,
            ..train_cfg
        },
    )
    .map_err(|e| e.to_string())?;
    let acc = accuracy(&refit.hyperplane, test).map_err(|e| e.to_string())?;
    Ok(CellScore {
        lambda: sel.best_lambda,
        correct: (acc * test.n_samples() as f64).round() as usize,
        n_test: test.n_samples(),
    })
}

/// Runs every (dataset, method, repetition) cell. Cells run concurrently;
/// each one's folds and initialization derive from the master seed and the
/// cell's coordinates, so results do not depend on scheduling.
pub fn run_benchmark_on(data: &[BenchDataset], methods: &[MethodSpec], cfg: &BenchConfig) -> Result<BenchmarkReport, BenchError> {
    if methods.is_empty() {
        return Err(BenchError::Empty("no methods".into()));
    }
    if cfg.plan.repetitions == 0 {
        return Err(BenchError::Empty("zero repetitions".into()));
    }
    check_unique(methods.iter().map(|m| m.name.as_str()))?;
    check_unique(data.iter().map(|d| d.name.as_str()))?;

    let mut failures = Vec::new();
    let mut prepared: Vec<Option<(Dataset, Dataset)>> = Vec::with_capacity(data.len());
    for d in data {
        let p = d.data.as_ref().map_err(String::clone).and_then(|(tr, te)| {
            if tr.n_features() != te.n_features() {
                return Err(format!("train has {} features, test has {}", tr.n_features(), te.n_features()));
            }
            let train = prepare_train(tr).map_err(|e| e.to_string())?;
            let test = train.preprocessing().apply(te).map_err(|e| e.to_string())?;
            Ok((train, test))
        });
        match p {
            Ok(p) => prepared.push(Some(p)),
            Err(e) => {
                log::warn!("dataset {}: {e}", d.name);
                failures.push((d.name.clone(), e));
                prepared.push(None);
            }
        }
    }

    let reps = cfg.plan.repetitions;
    let coords: Vec<(usize, usize, usize)> = (0..data.len())
        .filter(|&d| prepared[d].is_some())
        .flat_map(|d| (0..methods.len()).flat_map(move |m| (0..reps).map(move |r| (d, m, r))))
        .collect();
    let master = cfg.plan.seed;
    let cells: Vec<CellResult> = coords
        .par_iter()
        .map(|&(d, m, r)| {
            let (train, test) = prepared[d].as_ref().expect("filtered");
            // folds are shared by all methods of a (dataset, repetition)
            let fold_seed = derive_seed(master, &[d as u64]);
            let init_seed = derive_seed(master, &[d as u64, m as u64, r as u64]);
            let outcome = run_cell(train, test, &methods[m], cfg, fold_seed, r, init_seed);
            if let Err(e) = &outcome {
                log::warn!("dataset {} method {} repetition {r}: {e}", data[d].name, methods[m].name);
            }
            CellResult {
                dataset: d,
                method: m,
                repetition: r,
                outcome,
            }
        })
        .collect();

    let mut correct = vec![vec![Some((0usize, 0usize)); methods.len()]; data.len()];
    for c in &cells {
        let slot = &mut correct[c.dataset][c.method];
        *slot = match (&c.outcome, *slot) {
            (Ok(s), Some((k, n))) => Some((k + s.correct, n + s.n_test)),
            _ => None,
        };
    }
    let accuracy: Vec<Vec<Option<f64>>> = (0..data.len())
        .map(|d| {
            if prepared[d].is_none() {
                return vec![None; methods.len()];
            }
            correct[d].iter().map(|s| s.and_then(|(k, n)| (n > 0).then(|| k as f64 / n as f64))).collect()
        })
        .collect();
    let ranked: Vec<usize> = (0..data.len())
        .filter(|&d| accuracy[d].iter().all(Option::is_some))
        .collect();
    for d in 0..data.len() {
        if prepared[d].is_some() && !ranked.contains(&d) {
            let msg = "one or more cells failed; excluded from ranking".to_string();
            log::warn!("dataset {}: {msg}", data[d].name);
            failures.push((data[d].name.clone(), msg));
        }
    }

    let sub: Vec<Vec<Option<f64>>> = ranked.iter().map(|&d| accuracy[d].clone()).collect();
    let friedman_rank = if sub.is_empty() {
        vec![f64::NAN; methods.len()]
    } else {
        friedman_ranking(&sub)?
    };
    let mean_accuracy = (0..methods.len())
        .map(|m| {
            if sub.is_empty() {
                f64::NAN
            } else {
                sub.iter().map(|row| row[m].expect("ranked")).sum::<f64>() / sub.len() as f64
            }
        })
        .collect();

    Ok(BenchmarkReport {
        datasets: data.iter().map(|d| d.name.clone()).collect(),
        methods: methods.iter().map(|m| m.name.clone()).collect(),
        cells,
        accuracy,
        ranked,
        failures,
        mean_accuracy,
        friedman_rank,
    })
}

/// Ranks one row by descending value; tied values share the mean of the
/// ranks they cover.
pub fn average_ranks(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Mean Friedman rank of each method over the datasets (rank 1 = highest
/// accuracy).
pub fn friedman_ranking(acc: &[Vec<Option<f64>>]) -> Result<Vec<f64>, BenchError> {
    let m = acc.first().map_or(0, Vec::len);
    let mut sums = vec![0.0; m];
    for (d, row) in acc.iter().enumerate() {
        let vals: Vec<f64> = (0..m)
            .map(|j| row.get(j).copied().flatten().ok_or(BenchError::MissingCell { dataset: d, method: j }))
            .collect::<Result<_, _>>()?;
        for (s, r) in sums.iter_mut().zip(average_ranks(&vals)) {
            *s += r;
        }
    }
    let n = acc.len().max(1) as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!("unknown format {s:?} (expected csv or markdown)")),
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.2}")
    } else {
        "NA".to_string()
    }
}

/// Renders ranked datasets as rows of percentage accuracies, followed by
/// the "Mean" and "Friedman Ranking" rows. Columns follow method
/// registration order.
pub fn emit_report(report: &BenchmarkReport, format: ReportFormat) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["dataset".to_string()];
    header.extend(report.methods.iter().cloned());
    for &d in &report.ranked {
        let mut row = vec![report.datasets[d].clone()];
        row.extend(report.accuracy[d].iter().map(|a| fmt_num(a.map_or(f64::NAN, |v| 100.0 * v))));
        rows.push(row);
    }
    let mut mean = vec!["Mean".to_string()];
    mean.extend(report.mean_accuracy.iter().map(|v| fmt_num(100.0 * v)));
    rows.push(mean);
    let mut fr = vec!["Friedman Ranking".to_string()];
    fr.extend(report.friedman_rank.iter().map(|v| fmt_num(*v)));
    rows.push(fr);

    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&header).expect("write to memory");
            for r in &rows {
                w.write_record(r).expect("write to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
        }
        ReportFormat::Markdown => {
            let mut s = String::new();
            let line = |cells: &[String]| format!("| {} |", cells.iter().map(|c| c.replace('|', "\\|")).collect::<Vec<_>>().join(" | "));
            let _ = writeln!(s, "{}", line(&header));
            let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
            for r in &rows {
                let _ = writeln!(s, "{}", line(r));
            }
            s
        }
    }
}
