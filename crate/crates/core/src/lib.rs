//! Bregman-Tweedie margin losses and linear classifiers.
//!
//! The crate is layered bottom-up:
//!
//! - [`alpha_domain`]: exact rationals, the four real-line categories and
//!   sign-preserving rational powers.
//! - [`extended`]: the extended exponential and logarithm with their domains.
//! - [`legendre`]: the Ψ / Φ base functions, Bregman divergences and the
//!   Legendre transform.
//! - [`losses`]: Bregman-Tweedie and higher-order hinge margin losses.
//! - [`optimizer`]: box-constrained L-BFGS.
//! - [`dataset`], [`classifier`], [`bench`]: data handling, training and the
//!   cross-validated benchmark.

// NaN must fail range checks, so `!(x < y)` is deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha_domain;
pub mod bench;
pub mod classifier;
pub mod dataset;
pub mod extended;
pub mod legendre;
pub mod losses;
pub mod optimizer;
pub mod seed;

pub use alpha_domain::{classify_rational, rational_of_string, reciprocal_category, signed_pow, DomainError, Rational, RealCategory};
pub use extended::{c_alpha, domain_exp, domain_ln, exp_alpha, exp_alpha_c, ln_alpha, ln_alpha_c, BranchChoice, DomainSpec};
pub use legendre::{bregman_div, legendre_transform, BaseFunction, BaseKind, LegendreError};
pub use bench::{default_methods, emit_report, friedman_ranking, run_benchmark, run_benchmark_on, BenchConfig, BenchmarkReport, MethodSpec, ReportFormat};
pub use classifier::{accuracy, default_lambda_grid, fit, predict, score, select_lambda, Hyperplane, TrainConfig};
pub use dataset::{kfold_indices, load_csv, CsvOptions, CvPlan, Dataset};
pub use losses::{bt_loss, bt_loss_grad, higher_order_hinge, make_spec, objective_and_grad, LossMode, LossSpec, MarginLoss};
pub use optimizer::{minimize, project_box, BoxConstraint, OptimConfig, OptimResult};
