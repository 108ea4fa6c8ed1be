//! Linear classifiers `h(x) = ⟨w, x⟩ + b` trained by box-constrained
//! empirical risk minimization, plus λ selection by cross-validation.
//!
//! The objective is `Σ L(y_i h(x_i)) + λ‖w‖²` (bias unregularized) over the
//! box `‖(w, b)‖_∞ ≤ ρ|c_α|`. The logistic loss is trained unconstrained.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::alpha_domain::{rational_of_string, Rational};
use crate::dataset::{plan_folds, CvPlan, Dataset, DatasetError, FeatureStats, Preprocessing};
use crate::losses::{dot, make_spec, objective_and_grad, LossMode, MarginLoss};
use crate::optimizer::{minimize, BoxConstraint, OptimConfig, OptimResult};
use crate::seed::rng_for;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("alpha = {0} requires l1-rescaled training data")]
    NotRescaled(Rational),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} features, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("lambda selection failed: {0}")]
    Selection(String),
    #[error("malformed model file: {0}")]
    Model(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    #[default]
    Zeros,
    /// Uniform on `[-r/2, r/2]` per coordinate, `r = min(radius, 1)`.
    SeededUniform(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lambda: f64,
    pub rho: f64,
    pub optim: OptimConfig,
    pub init: Init,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            rho: 1.5,
            optim: OptimConfig::default(),
            init: Init::Zeros,
        }
    }
}

/// A trained linear classifier together with the preprocessing it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub b: f64,
    pub loss: MarginLoss,
    pub rho: f64,
    pub lambda: f64,
    pub preprocessing: Preprocessing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub hyperplane: Hyperplane,
    pub result: OptimResult,
}

/// `λ = 2^b` for `b = -14, …, 5`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-14..=5).map(|b| 2f64.powi(b)).collect()
}

/// Standardizes and ℓ1-rescales a raw training set.
pub fn prepare_train(raw: &Dataset) -> Result<Dataset, ClassifierError> {
    Ok(raw.standardize(None)?.rescale_l1(None))
}

fn check_config(cfg: &TrainConfig) -> Result<(), ClassifierError> {
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(ClassifierError::InvalidConfig(format!("lambda = {}", cfg.lambda)));
    }
    if !(cfg.rho > 1.0 && cfg.rho < 2.0) {
        return Err(ClassifierError::InvalidConfig(format!("rho = {} is outside (1, 2)", cfg.rho)));
    }
    let o = &cfg.optim;
    if o.memory == 0 || o.max_iter == 0 || o.ls_max == 0 || !(o.tol > 0.0) || !(o.armijo_c1 > 0.0 && o.armijo_c1 < 1.0) {
        return Err(ClassifierError::InvalidConfig(format!("optimizer settings {o:?}")));
    }
    Ok(())
}

/// Minimizes the regularized risk on `ds`, which must already be
/// standardized and rescaled unless the loss is logistic.
pub fn fit(ds: &Dataset, loss: &MarginLoss, cfg: &TrainConfig) -> Result<Fit, ClassifierError> {
    check_config(cfg)?;
    if loss.needs_rescaling() && !ds.is_rescaled() {
        return Err(ClassifierError::NotRescaled(loss.alpha()));
    }
    let d = ds.n_features();
    let radius = loss.box_radius(cfg.rho);
    let bx = if radius.is_finite() {
        BoxConstraint::new(radius)
    } else {
        BoxConstraint::unbounded()
    };
    let x0 = match cfg.init {
        Init::Zeros => vec![0.0; d + 1],
        Init::SeededUniform(seed) => {
            let half = radius.min(1.0) / 2.0;
            let mut rng = rng_for(seed, &[]);
            (0..=d).map(|_| rng.random_range(-half..=half)).collect()
        }
    };
    let result = minimize(
        |x: &[f64]| {
            let o = objective_and_grad(loss, cfg.lambda, ds, &x[..d], x[d]);
            let mut g = o.grad_w;
            g.push(o.grad_b);
            (o.value, g)
        },
        &x0,
        &bx,
        &cfg.optim,
    );
    let hyperplane = Hyperplane {
        w: result.point[..d].to_vec(),
        b: result.point[d],
        loss: *loss,
        rho: cfg.rho,
        lambda: cfg.lambda,
        preprocessing: ds.preprocessing(),
    };
    Ok(Fit { hyperplane, result })
}

fn sign(v: f64) -> f64 {
    // ties go to the positive class
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl Hyperplane {
    pub fn n_features(&self) -> usize {
        self.w.len()
    }

    /// `⟨w, x⟩ + b` on an already preprocessed row.
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// Label of an already preprocessed row.
    pub fn predict_prepared(&self, x: &[f64]) -> f64 {
        sign(self.decision(x))
    }

    /// Regularized objective at this hyperplane on a prepared dataset.
    pub fn objective(&self, ds: &Dataset) -> f64 {
        objective_and_grad(&self.loss, self.lambda, ds, &self.w, self.b).value
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("btclass-model 1\n");
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        let (kind, mode) = match &self.loss {
            MarginLoss::BregmanTweedie(spec) => ("bregman-tweedie", spec.mode.tag()),
            MarginLoss::HigherOrderHinge { .. } => ("higher-order-hinge", "custom"),
        };
        let _ = writeln!(s, "loss {kind}");
        let _ = writeln!(s, "alpha {}", self.loss.alpha());
        let _ = writeln!(s, "c {:.16e}", self.loss.c());
        let _ = writeln!(s, "mode {mode}");
        let _ = writeln!(s, "rho {:.16e}", self.rho);
        let _ = writeln!(s, "lambda {:.16e}", self.lambda);
        let _ = writeln!(s, "features {}", self.w.len());
        match &self.preprocessing.stats {
            Some(st) => {
                let _ = writeln!(s, "means {}", list(&st.means));
                let _ = writeln!(s, "stds {}", list(&st.stds));
            }
            None => s.push_str("means -\nstds -\n"),
        }
        let _ = writeln!(s, "divisor {:.16e}", self.preprocessing.divisor);
        let _ = writeln!(s, "w {}", list(&self.w));
        let _ = writeln!(s, "b {:.16e}", self.b);
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ClassifierError> {
        let bad = |m: String| ClassifierError::Model(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("btclass-model 1") {
            return Err(bad("missing header line".into()));
        }
        let mut field = |key: &str| -> Result<String, ClassifierError> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            if k != key {
                return Err(bad(format!("expected {key}, found {k}")));
            }
            Ok(v.trim().to_string())
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("bad number {v:?}")));
        let nums = |v: &str| v.split_whitespace().map(num).collect::<Result<Vec<f64>, _>>();

        let kind = field("loss")?;
        let alpha = rational_of_string(&field("alpha")?).map_err(|e| bad(e.to_string()))?;
        let c = num(&field("c")?)?;
        let mode: LossMode = field("mode")?.parse().map_err(bad)?;
        let rho = num(&field("rho")?)?;
        let lambda = num(&field("lambda")?)?;
        let d: usize = field("features")?.parse().map_err(|_| bad("bad feature count".into()))?;
        let means = field("means")?;
        let stds = field("stds")?;
        let stats = if means == "-" && stds == "-" {
            None
        } else {
            Some(FeatureStats {
                means: nums(&means)?,
                stds: nums(&stds)?,
            })
        };
        let divisor = num(&field("divisor")?)?;
        let w = nums(&field("w")?)?;
        let b = num(&field("b")?)?;

        let loss = match kind.as_str() {
            "bregman-tweedie" => {
                let c_opt = (mode == LossMode::Explicit).then_some(c);
                MarginLoss::from(make_spec(alpha, mode, c_opt).map_err(|e| bad(e.to_string()))?)
            }
            "higher-order-hinge" => MarginLoss::hinge(alpha, c).map_err(|e| bad(e.to_string()))?,
            other => return Err(bad(format!("unknown loss {other:?}"))),
        };
        if w.len() != d || stats.as_ref().is_some_and(|s| s.means.len() != d || s.stds.len() != d) {
            return Err(bad("vector lengths disagree with the feature count".into()));
        }
        Ok(Hyperplane {
            w,
            b,
            loss,
            rho,
            lambda,
            preprocessing: Preprocessing { stats, divisor },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Label of a raw feature row, after replaying the training preprocessing.
pub fn predict(h: &Hyperplane, x: &[f64]) -> Result<f64, ClassifierError> {
    if x.len() != h.n_features() {
        return Err(ClassifierError::Arity {
            expected: h.n_features(),
            got: x.len(),
        });
    }
    Ok(h.predict_prepared(&h.preprocessing.apply_row(x)))
}

/// Fraction of correctly classified rows of a prepared dataset.
pub fn accuracy(h: &Hyperplane, ds: &Dataset) -> Result<f64, ClassifierError> {
    if ds.n_features() != h.n_features() {
        return Err(ClassifierError::Arity {
            expected: h.n_features(),
            got: ds.n_features(),
        });
    }
    if ds.n_samples() == 0 {
        return Ok(0.0);
    }
    let hits = ds
        .rows()
        .zip(ds.labels())
        .filter(|(x, &y)| h.predict_prepared(x) == y)
        .count();
    Ok(hits as f64 / ds.n_samples() as f64)
}

/// Accuracy on a raw dataset using the stored preprocessing.
pub fn score(h: &Hyperplane, raw: &Dataset) -> Result<f64, ClassifierError> {
    if raw.n_features() != h.n_features() {
        return Err(ClassifierError::Arity {
            expected: h.n_features(),
            got: raw.n_features(),
        });
    }
    accuracy(h, &h.preprocessing.apply(raw)?)
}

/// One λ of a cross-validation table.
#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub lambda: f64,
    /// Validation accuracy per fold; `None` where the fit failed.
    pub fold_accuracy: Vec<Option<f64>>,
    /// Mean over the successful folds.
    pub mean_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub best_lambda: f64,
    pub table: Vec<CvRow>,
}

/// k-fold cross-validation of every λ in `grid` on the prepared training
/// set, using the folds of `repetition`. Returns the λ of highest mean
/// validation accuracy, ties going to the larger λ.
pub fn select_lambda(
    ds: &Dataset,
    loss: &MarginLoss,
    plan: &CvPlan,
    grid: &[f64],
    cfg: &TrainConfig,
    repetition: usize,
) -> Result<Selection, ClassifierError> {
    if grid.is_empty() {
        return Err(ClassifierError::Selection("empty lambda grid".into()));
    }
    let folds = plan_folds(ds, plan, repetition)?;
    let cells: Vec<(usize, usize)> = (0..grid.len()).flat_map(|i| (0..folds.len()).map(move |f| (i, f))).collect();
    let results: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(i, f)| {
            let fold = &folds[f];
            let cell_cfg = TrainConfig {
                lambda: grid[i],
                ..*cfg
            };
            let train = ds.subset(&fold.train);
            let valid = ds.subset(&fold.valid);
            match fit(&train, loss, &cell_cfg).and_then(|fit| accuracy(&fit.hyperplane, &valid)) {
                Ok(acc) => Some(acc),
                Err(e) => {
                    log::warn!("cv cell lambda={} fold={f} failed: {e}", grid[i]);
                    None
                }
            }
        })
        .collect();

    let table: Vec<CvRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let fold_accuracy = results[i * folds.len()..(i + 1) * folds.len()].to_vec();
            let ok: Vec<f64> = fold_accuracy.iter().flatten().copied().collect();
            let mean_accuracy = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
            CvRow {
                lambda,
                fold_accuracy,
                mean_accuracy,
            }
        })
        .collect();

    let best = table
        .iter()
        .filter_map(|r| r.mean_accuracy.map(|m| (m, r.lambda)))
        .fold(None, |best: Option<(f64, f64)>, (m, l)| match best {
            Some((bm, bl)) if bm > m || (bm == m && bl >= l) => Some((bm, bl)),
            _ => Some((m, l)),
        });
    match best {
        Some((_, best_lambda)) => Ok(Selection { best_lambda, table }),
        None => Err(ClassifierError::Selection("every cross-validation cell failed".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::make_spec;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn logistic() -> MarginLoss {
        make_spec(Rational::ONE, LossMode::LBregman, None).unwrap().into()
    }

    fn blob() -> Dataset {
        let rows = vec![
            vec![2.0, 1.0],
            vec![3.0, 2.5],
            vec![2.5, -0.5],
            vec![4.0, 0.0],
            vec![-2.0, 0.5],
            vec![-3.0, -1.0],
            vec![-2.5, 1.5],
            vec![-1.5, -2.0],
        ];
        Dataset::from_rows(rows, vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0]).unwrap()
    }

    #[test]
    fn lambda_grid() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 2f64.powi(-14));
        assert_eq!(g[19], 32.0);
    }

    #[test]
    fn separable_blob_is_fit_exactly() {
        let ds = prepare_train(&blob()).unwrap();
        let cfg = TrainConfig {
            lambda: 2f64.powi(-10),
            ..TrainConfig::default()
        };
        for loss in [
            logistic(),
            make_spec(r(84, 85), LossMode::HBregman, None).unwrap().into(),
            make_spec(r(84, 85), LossMode::LBregman, None).unwrap().into(),
            MarginLoss::hinge(Rational::ZERO, 1.0).unwrap(),
        ] {
            let fit = fit(&ds, &loss, &cfg).unwrap();
            assert_eq!(accuracy(&fit.hyperplane, &ds).unwrap(), 1.0, "{loss:?}");
            let radius = loss.box_radius(1.5);
            assert!(fit.result.point.iter().all(|v| v.abs() <= radius));
            assert!((fit.hyperplane.objective(&ds) - fit.result.value).abs() <= 1e-10 * (1.0 + fit.result.value.abs()));
        }
    }

    #[test]
    fn single_positive_sample_pushes_bias_up() {
        let ds = Dataset::from_rows(vec![vec![0.0]], vec![1.0]).unwrap();
        let cfg = TrainConfig {
            optim: OptimConfig {
                tol: 1e-4,
                ..OptimConfig::default()
            },
            ..TrainConfig::default()
        };
        let fit = fit(&ds, &logistic(), &cfg).unwrap();
        // sigmoid(-b) <= tol
        assert!(fit.hyperplane.b > 9.0, "{:?}", fit.result);
        assert!(fit.result.converged);
    }

    #[test]
    fn bregman_needs_rescaled_data() {
        let loss: MarginLoss = make_spec(r(2, 3), LossMode::HBregman, None).unwrap().into();
        let err = fit(&blob(), &loss, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, ClassifierError::NotRescaled(_)));
        assert!(fit(&blob(), &logistic(), &TrainConfig::default()).is_ok());
        let bad = TrainConfig {
            rho: 2.5,
            ..TrainConfig::default()
        };
        assert!(matches!(fit(&blob(), &logistic(), &bad), Err(ClassifierError::InvalidConfig(_))));
    }

    #[test]
    fn predict_examples() {
        let h = Hyperplane {
            w: vec![1.0, 0.0],
            b: 0.0,
            loss: logistic(),
            rho: 1.5,
            lambda: 0.0,
            preprocessing: Preprocessing::identity(),
        };
        assert_eq!(predict(&h, &[0.3, -2.0]).unwrap(), 1.0);
        assert_eq!(predict(&h, &[-0.3, 5.0]).unwrap(), -1.0);
        assert_eq!(predict(&h, &[0.0, 5.0]).unwrap(), 1.0);
        assert!(matches!(predict(&h, &[1.0]), Err(ClassifierError::Arity { expected: 2, got: 1 })));
    }

    #[test]
    fn fit_is_deterministic() {
        let ds = prepare_train(&blob()).unwrap();
        let loss: MarginLoss = make_spec(r(58, 59), LossMode::LBregman, None).unwrap().into();
        let cfg = TrainConfig {
            lambda: 0.01,
            init: Init::SeededUniform(9),
            ..TrainConfig::default()
        };
        let a = fit(&ds, &loss, &cfg).unwrap();
        let b = fit(&ds, &loss, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_text_round_trips_bit_exactly() {
        let ds = prepare_train(&blob()).unwrap();
        for loss in [
            make_spec(r(84, 85), LossMode::HBregman, None).unwrap().into(),
            make_spec(r(2, 7), LossMode::Explicit, Some(0.3)).unwrap().into(),
            MarginLoss::hinge(r(1, 2), 0.25).unwrap(),
            logistic(),
        ] {
            let h = fit(
                &ds,
                &loss,
                &TrainConfig {
                    lambda: 1.0 / 3.0,
                    ..TrainConfig::default()
                },
            )
            .unwrap()
            .hyperplane;
            let back = Hyperplane::from_text(&h.to_text()).unwrap();
            assert_eq!(back, h);
        }
        assert!(Hyperplane::from_text("nonsense").is_err());
    }

    #[test]
    fn score_replays_preprocessing() {
        let raw = blob();
        let ds = prepare_train(&raw).unwrap();
        let h = fit(&ds, &logistic(), &TrainConfig::default()).unwrap().hyperplane;
        assert_eq!(score(&h, &raw).unwrap(), accuracy(&h, &ds).unwrap());
        for i in 0..raw.n_samples() {
            assert_eq!(predict(&h, raw.row(i)).unwrap(), h.predict_prepared(ds.row(i)));
        }
    }

    #[test]
    fn selection_examples() {
        let ds = prepare_train(&blob()).unwrap();
        let plan = CvPlan {
            folds: 2,
            seed: 3,
            ..CvPlan::default()
        };
        let cfg = TrainConfig::default();
        let sel = select_lambda(&ds, &logistic(), &plan, &[0.125], &cfg, 0).unwrap();
        assert_eq!(sel.best_lambda, 0.125);
        assert_eq!(sel.table.len(), 1);
        assert_eq!(sel.table[0].fold_accuracy.len(), 2);
        // separable blob: every small λ scores perfectly, so the largest wins
        let sel = select_lambda(&ds, &logistic(), &plan, &[1e-3, 1e-2, 1e-4], &cfg, 0).unwrap();
        assert!(sel.table.iter().all(|r| r.mean_accuracy == Some(1.0)), "{:?}", sel.table);
        assert_eq!(sel.best_lambda, 1e-2);
        assert!(select_lambda(&ds, &logistic(), &plan, &[], &cfg, 0).is_err());
    }

    #[test]
    fn all_failed_cells_is_selection_error() {
        let raw = blob();
        let loss: MarginLoss = make_spec(r(2, 3), LossMode::HBregman, None).unwrap().into();
        let plan = CvPlan {
            folds: 2,
            ..CvPlan::default()
        };
        let err = select_lambda(&raw, &loss, &plan, &[0.1, 1.0], &TrainConfig::default(), 0).unwrap_err();
        assert!(matches!(err, ClassifierError::Selection(_)));
    }
}
