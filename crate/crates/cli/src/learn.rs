use std::fmt::Write;

use bregman_tweedie::bench::load_manifest;
use bregman_tweedie::classifier::{prepare_train, Selection};
use bregman_tweedie::dataset::CsvOptions;
use bregman_tweedie::{
    default_lambda_grid, default_methods, emit_report, fit, load_csv, make_spec, predict as predict_one, run_benchmark, score,
    select_lambda, BenchConfig, CvPlan, Dataset, Hyperplane, LossMode, MarginLoss, OptimConfig, ReportFormat, TrainConfig,
};

use crate::args::{BenchArgs, CsvArgs, CvArgs, CvFlags, Family, LossArgs, OptimArgs, PredictArgs, TrainArgs};
use crate::{emit, CmdResult, Failure};

pub fn build_loss(a: &LossArgs) -> Result<MarginLoss, Failure> {
    match a.family {
        Family::Bt => {
            let mode = a.mode.unwrap_or(if a.c.is_some() { LossMode::Explicit } else { LossMode::LBregman });
            Ok(make_spec(a.alpha, mode, a.c).map_err(Failure::usage)?.into())
        }
        Family::Hinge => {
            if a.mode.is_some() {
                return Err(Failure::usage("--mode applies to the bt family only"));
            }
            MarginLoss::hinge(a.alpha, a.c.unwrap_or(1.0)).map_err(Failure::usage)
        }
    }
}

/// `"0.5,2^-3,1e-2"`; `None` gives the default grid.
pub fn parse_grid(s: Option<&str>) -> Result<Vec<f64>, Failure> {
    let Some(s) = s else {
        return Ok(default_lambda_grid());
    };
    let mut grid = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v = match tok.strip_prefix("2^") {
            Some(e) => e.parse::<i32>().map(|e| 2f64.powi(e)).ok(),
            None => tok.parse::<f64>().ok(),
        };
        match v {
            Some(v) if v >= 0.0 && v.is_finite() => grid.push(v),
            _ => return Err(Failure::usage(format!("bad lambda {tok:?} in --lambda-grid"))),
        }
    }
    if grid.is_empty() {
        return Err(Failure::usage("empty --lambda-grid"));
    }
    Ok(grid)
}

fn train_config(o: &OptimArgs, lambda: f64) -> Result<TrainConfig, Failure> {
    if !(o.rho > 1.0 && o.rho < 2.0) {
        return Err(Failure::usage(format!("--rho must lie in (1, 2), got {}", o.rho)));
    }
    if o.tol.is_nan() || o.tol <= 0.0 || o.max_iter == 0 {
        return Err(Failure::usage("--tol and --max-iter must be positive"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Failure::usage(format!("--lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(TrainConfig {
        lambda,
        rho: o.rho,
        optim: OptimConfig {
            tol: o.tol,
            max_iter: o.max_iter,
            ..OptimConfig::default()
        },
        ..TrainConfig::default()
    })
}

fn cv_plan(folds: usize, reps: usize, seed: u64) -> Result<CvPlan, Failure> {
    if folds < 2 || reps == 0 {
        return Err(Failure::usage("need --folds >= 2 and --reps >= 1"));
    }
    Ok(CvPlan {
        folds,
        repetitions: reps,
        seed,
        stratified: false,
    })
}

fn csv_options(a: &CsvArgs) -> CsvOptions {
    CsvOptions {
        label_col: a.label_col.clone(),
        has_header: a.has_header,
        label_map: a.label_map.clone(),
    }
}

fn load(path: &std::path::Path, csv: &CsvArgs) -> Result<Dataset, Failure> {
    load_csv(path, &csv_options(csv)).map_err(|e| Failure::Runtime(anyhow::anyhow!("{}: {e}", path.display())))
}

/// One selection per repetition of the plan.
fn cv_tables(ds: &Dataset, loss: &MarginLoss, flags: &CvFlags, cfg: &TrainConfig) -> Result<(Vec<f64>, Vec<Selection>), Failure> {
    let plan = cv_plan(flags.folds, flags.reps, flags.seed)?;
    let grid = parse_grid(flags.lambda_grid.as_deref())?;
    let mut sels = Vec::with_capacity(plan.repetitions);
    for rep in 0..plan.repetitions {
        sels.push(select_lambda(ds, loss, &plan, &grid, cfg, rep)?);
    }
    Ok((grid, sels))
}

/// Mean over repetitions of the per-repetition CV accuracy of each λ.
fn pooled(grid: &[f64], sels: &[Selection]) -> Vec<Option<f64>> {
    (0..grid.len())
        .map(|i| {
            let v: Vec<f64> = sels.iter().filter_map(|s| s.table[i].mean_accuracy).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect()
}

/// Highest pooled accuracy, ties to the larger λ.
fn best_lambda(grid: &[f64], pooled: &[Option<f64>]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (&l, acc) in grid.iter().zip(pooled) {
        let Some(acc) = *acc else { continue };
        best = match best {
            Some((bl, ba)) if ba > acc || (ba == acc && bl >= l) => Some((bl, ba)),
            _ => Some((l, acc)),
        };
    }
    best.map(|(l, _)| l)
}

pub fn train(a: &TrainArgs) -> CmdResult {
    let loss = build_loss(&a.loss)?;
    let base = train_config(&a.optim, a.lambda.unwrap_or(0.0))?;
    let raw = load(&a.data, &a.csv)?;
    let ds = prepare_train(&raw)?;
    let lambda = match a.lambda {
        Some(l) => l,
        None => {
            let (grid, sels) = cv_tables(&ds, &loss, &a.cv, &base)?;
            let l = best_lambda(&grid, &pooled(&grid, &sels)).ok_or_else(|| anyhow::anyhow!("every cross-validation fit failed"))?;
            log::info!("cross-validation picked lambda = {l}");
            l
        }
    };
    let f = fit(&ds, &loss, &TrainConfig { lambda, ..base })?;
    log::info!(
        "lambda = {lambda}, objective = {}, iterations = {}, termination = {:?}, training accuracy = {:.4}",
        f.result.value,
        f.result.iterations,
        f.result.termination,
        score(&f.hyperplane, &raw)?
    );
    emit(a.out.as_deref(), &f.hyperplane.to_text())
}

pub fn predict(a: &PredictArgs) -> CmdResult {
    let h = Hyperplane::load(&a.model).map_err(|e| anyhow::anyhow!("{}: {e}", a.model.display()))?;
    let raw = load(&a.data, &a.csv)?;
    let mut s = String::from("label,prediction\n");
    for (x, y) in raw.rows().zip(raw.labels()) {
        let p = predict_one(&h, x)?;
        let _ = writeln!(s, "{},{}", *y as i64, p as i64);
    }
    log::info!("accuracy = {:.4} on {} rows", score(&h, &raw)?, raw.n_samples());
    emit(a.out.as_deref(), &s)
}

pub fn cv(a: &CvArgs) -> CmdResult {
    let loss = build_loss(&a.loss)?;
    let cfg = train_config(&a.optim, 0.0)?;
    let ds = prepare_train(&load(&a.data, &a.csv)?)?;
    let (grid, sels) = cv_tables(&ds, &loss, &a.cv, &cfg)?;
    let pooled = pooled(&grid, &sels);
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
    let mut header = vec!["lambda".to_string()];
    header.extend((1..=sels.len()).map(|r| format!("rep{r}")));
    header.push("mean".into());
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut row = vec![l.to_string()];
            row.extend(sels.iter().map(|s| fmt(s.table[i].mean_accuracy)));
            row.push(fmt(pooled[i]));
            row
        })
        .collect();
    let mut s = String::new();
    match a.format {
        ReportFormat::Csv => {
            for r in std::iter::once(&header).chain(&rows) {
                let _ = writeln!(s, "{}", r.join(","));
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(s, "| {} |", header.join(" | "));
            let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
            for r in &rows {
                let _ = writeln!(s, "| {} |", r.join(" | "));
            }
        }
    }
    match best_lambda(&grid, &pooled) {
        Some(l) => log::info!("best lambda = {l}"),
        None => return Err(Failure::Runtime(anyhow::anyhow!("every cross-validation fit failed"))),
    }
    emit(a.out.as_deref(), &s)
}

pub fn bench(a: &BenchArgs) -> CmdResult {
    let cfg = BenchConfig {
        plan: cv_plan(a.folds, a.reps, a.seed)?,
        train: train_config(&a.optim, 0.0)?,
    };
    let grid = a.lambda_grid.as_deref().map(|g| parse_grid(Some(g))).transpose()?;
    let mut methods = default_methods();
    if let Some(g) = grid {
        for m in &mut methods {
            m.grid = g.clone();
        }
    }
    let specs = load_manifest(&a.manifest)?;
    let report = run_benchmark(&specs, &methods, &cfg)?;
    for (what, why) in &report.failures {
        log::warn!("{what}: {why}");
    }
    emit(a.out.as_deref(), &emit_report(&report, a.format))
}
