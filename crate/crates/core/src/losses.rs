//! Bregman-Tweedie margin losses and the higher-order hinge family.
//!
//! For a margin `m = y(⟨w, x⟩ + b)` the Bregman-Tweedie loss is
//!
//! ```text
//! L(m) = ln_{α,c}(c + exp_{α,c}(-m))        (α ≠ 1)
//! L(m) = ln(1 + e^{-m})                     (α = 1, logistic)
//! ```
//!
//! with margin derivative `L'(m) = -(E / (c + E))^α`, `E = exp_{α,c}(-m)`.
//! `c + E` vanishes at `m = 2|c_α|`, so the derivative only exists below that
//! point. Two sub-models fix the scale:
//!
//! - H-Bregman: `c_α = -1`, i.e. `c = (1-α)^{1/(1-α)}`.
//! - L-Bregman: `c = 1`, i.e. `c_α = 1/(α-1)`.
//!
//! Supported α are `0`, `1` and rationals in `(0, 1)` with an even numerator
//! (`2k/(2k+1)` and friends). At `α = 0, c = 1` the loss is the linear
//! "unhinge" loss `1 - m`.

use thiserror::Error;

use crate::alpha_domain::{classify_rational, signed_pow, Rational, RealCategory};
use crate::dataset::Dataset;
use crate::extended::{c_alpha, exp_alpha_c, ln_alpha_c};

/// Relative distance kept from the gradient singularity when clamping.
pub const EPS_DOM: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("alpha = {0} is outside the supported loss family")]
    UnsupportedAlpha(Rational),
    #[error("scale c = {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("the {0:?} sub-model fixes the scale c; pass mode Explicit to choose it")]
    ScaleFixedByMode(LossMode),
    #[error("margin {m} is outside the gradient domain m < {limit}")]
    GradDomain { m: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossMode {
    HBregman,
    LBregman,
    Explicit,
}

impl LossMode {
    pub fn tag(self) -> &'static str {
        match self {
            LossMode::HBregman => "h",
            LossMode::LBregman => "l",
            LossMode::Explicit => "custom",
        }
    }
}

impl std::str::FromStr for LossMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "h" | "hbregman" | "h-bregman" => Ok(LossMode::HBregman),
            "l" | "lbregman" | "l-bregman" => Ok(LossMode::LBregman),
            "custom" | "explicit" => Ok(LossMode::Explicit),
            _ => Err(format!("unknown loss mode {s:?} (expected h, l or custom)")),
        }
    }
}

/// A member of the Bregman-Tweedie family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub alpha: Rational,
    pub c: f64,
    pub mode: LossMode,
    /// `c^{1-α}/(α-1)`; `-∞` at α = 1 where it plays no role.
    pub c_alpha: f64,
    /// `2 c_α`; the gradient exists for `-m > grad_lower`.
    pub grad_lower: f64,
}

impl LossSpec {
    pub fn is_logistic(&self) -> bool {
        self.alpha.is_one()
    }
}

fn supported_alpha(alpha: Rational) -> bool {
    alpha.is_zero()
        || alpha.is_one()
        || (alpha > Rational::ZERO && alpha < Rational::ONE && classify_rational(alpha) == RealCategory::Re)
}

/// The scale `c = (1-α)^{1/(1-α)}` solving `c_α = -1`, for any `α < 1`
/// (`1` at α = 1).
pub fn h_bregman_scale(alpha: Rational) -> f64 {
    if alpha >= Rational::ONE {
        return 1.0;
    }
    let a = Rational::ONE - alpha;
    a.to_f64().powf(a.checked_recip().expect("alpha < 1").to_f64())
}

/// Builds a loss from α and a sub-model. `c_opt` is required (and only
/// allowed) in [`LossMode::Explicit`].
pub fn make_spec(alpha: Rational, mode: LossMode, c_opt: Option<f64>) -> Result<LossSpec, LossError> {
    if !supported_alpha(alpha) {
        return Err(LossError::UnsupportedAlpha(alpha));
    }
    let c = match (mode, c_opt) {
        (LossMode::Explicit, Some(c)) => c,
        (LossMode::Explicit, None) => return Err(LossError::InvalidScale(f64::NAN)),
        (_, Some(_)) => return Err(LossError::ScaleFixedByMode(mode)),
        (LossMode::LBregman, None) => 1.0,
        (LossMode::HBregman, None) => {
            let c = h_bregman_scale(alpha);
            if c < f64::MIN_POSITIVE {
                // (1-α)^{1/(1-α)} underflows for α within ~1/150 of one
                return Err(LossError::UnsupportedAlpha(alpha));
            }
            c
        }
    };
    if !(c > 0.0 && c.is_finite()) {
        return Err(LossError::InvalidScale(c));
    }
    let ca = c_alpha(alpha, c);
    Ok(LossSpec {
        alpha,
        c,
        mode,
        c_alpha: ca,
        grad_lower: 2.0 * ca,
    })
}

/// `2|c_α|`: the margin at which the gradient becomes singular (`∞` for the
/// logistic loss).
pub fn margin_limit(spec: &LossSpec) -> f64 {
    if spec.is_logistic() {
        f64::INFINITY
    } else {
        -spec.grad_lower
    }
}

fn softplus_neg(m: f64) -> f64 {
    // ln(1 + e^{-m}) without overflow
    (-m).max(0.0) + (-m.abs()).exp().ln_1p()
}

pub fn bt_loss(spec: &LossSpec, m: f64) -> f64 {
    if spec.is_logistic() {
        return softplus_neg(m);
    }
    let e = exp_alpha_c(spec.alpha, spec.c, -m).expect("exp_{α,c} is total for supported α");
    ln_alpha_c(spec.alpha, spec.c, spec.c + e).expect("ln_{α,c} is total for supported α")
}

pub fn bt_loss_grad(spec: &LossSpec, m: f64) -> Result<f64, LossError> {
    if spec.is_logistic() {
        return Ok(if m >= 0.0 {
            let t = (-m).exp();
            -t / (1.0 + t)
        } else {
            -1.0 / (1.0 + m.exp())
        });
    }
    let limit = margin_limit(spec);
    if !(m < limit) {
        return Err(LossError::GradDomain { m, limit });
    }
    let e = exp_alpha_c(spec.alpha, spec.c, -m).expect("exp_{α,c} is total for supported α");
    let ratio = e / (spec.c + e);
    Ok(-signed_pow(ratio, spec.alpha).expect("even-numerator power is total"))
}

fn check_hinge(alpha: Rational, c: f64) -> Result<(), LossError> {
    if alpha < Rational::ZERO || alpha >= Rational::ONE {
        return Err(LossError::UnsupportedAlpha(alpha));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(LossError::InvalidScale(c));
    }
    Ok(())
}

fn hinge_base(alpha: Rational, c: f64, m: f64) -> f64 {
    let a = (Rational::ONE - alpha).to_f64();
    (c.powf(a) - a * m).max(0.0)
}

/// `max(0, c^{1-α} - (1-α)m)^{1/(1-α)}`: hinge at `(0, 1)`, squared hinge
/// `(1/4)max(0, 1-m)²` at `(1/2, 1/4)`.
pub fn higher_order_hinge(alpha: Rational, c: f64, m: f64) -> Result<f64, LossError> {
    check_hinge(alpha, c)?;
    let p = (Rational::ONE - alpha).checked_recip().expect("alpha < 1");
    Ok(signed_pow(hinge_base(alpha, c, m), p).expect("non-negative base"))
}

/// Right derivative in `m` of [`higher_order_hinge`] (slope `0` at the kink
/// of the plain hinge).
pub fn higher_order_hinge_slope(alpha: Rational, c: f64, m: f64) -> Result<f64, LossError> {
    check_hinge(alpha, c)?;
    let base = hinge_base(alpha, c, m);
    if base <= 0.0 {
        return Ok(0.0);
    }
    let p = alpha.checked_div(Rational::ONE - alpha).expect("alpha < 1");
    Ok(-signed_pow(base, p).expect("positive base"))
}

/// A margin loss usable by the trainer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginLoss {
    BregmanTweedie(LossSpec),
    HigherOrderHinge { alpha: Rational, c: f64 },
}

impl From<LossSpec> for MarginLoss {
    fn from(spec: LossSpec) -> Self {
        MarginLoss::BregmanTweedie(spec)
    }
}

impl MarginLoss {
    pub fn hinge(alpha: Rational, c: f64) -> Result<Self, LossError> {
        check_hinge(alpha, c)?;
        Ok(MarginLoss::HigherOrderHinge { alpha, c })
    }

    pub fn alpha(&self) -> Rational {
        match self {
            MarginLoss::BregmanTweedie(s) => s.alpha,
            MarginLoss::HigherOrderHinge { alpha, .. } => *alpha,
        }
    }

    pub fn c(&self) -> f64 {
        match self {
            MarginLoss::BregmanTweedie(s) => s.c,
            MarginLoss::HigherOrderHinge { c, .. } => *c,
        }
    }

    /// `|c_α|`, or `∞` for the logistic loss.
    pub fn abs_c_alpha(&self) -> f64 {
        match self {
            MarginLoss::BregmanTweedie(s) if s.is_logistic() => f64::INFINITY,
            MarginLoss::BregmanTweedie(s) => s.c_alpha.abs(),
            MarginLoss::HigherOrderHinge { alpha, c } => c_alpha(*alpha, *c).abs(),
        }
    }

    /// Per-coordinate bound `ρ|c_α|` on `(w, b)`. The hinge family is
    /// defined for every margin, so it trains unconstrained.
    pub fn box_radius(&self, rho: f64) -> f64 {
        match self {
            MarginLoss::BregmanTweedie(_) => rho * self.abs_c_alpha(),
            MarginLoss::HigherOrderHinge { .. } => f64::INFINITY,
        }
    }

    /// Whether training expects ℓ1-rescaled data.
    pub fn needs_rescaling(&self) -> bool {
        !matches!(self, MarginLoss::BregmanTweedie(s) if s.is_logistic())
    }

    /// Largest margin at which the Bregman-Tweedie value is followed; beyond
    /// it the loss is held constant.
    pub fn clamp_margin(&self) -> f64 {
        match self {
            MarginLoss::BregmanTweedie(s) => margin_limit(s) * (1.0 - EPS_DOM),
            MarginLoss::HigherOrderHinge { .. } => f64::INFINITY,
        }
    }

    /// Loss value with the margin clamp applied.
    pub fn value(&self, m: f64) -> f64 {
        match self {
            MarginLoss::BregmanTweedie(s) => bt_loss(s, m.min(self.clamp_margin())),
            MarginLoss::HigherOrderHinge { alpha, c } => {
                higher_order_hinge(*alpha, *c, m).expect("validated hinge")
            }
        }
    }

    /// Slope of [`MarginLoss::value`]: zero past the clamp.
    pub fn slope(&self, m: f64) -> f64 {
        match self {
            MarginLoss::BregmanTweedie(s) => {
                if m > self.clamp_margin() {
                    0.0
                } else {
                    bt_loss_grad(s, m).expect("margin below the clamp")
                }
            }
            MarginLoss::HigherOrderHinge { alpha, c } => {
                higher_order_hinge_slope(*alpha, *c, m).expect("validated hinge")
            }
        }
    }

    /// Raw value and slope without the clamp.
    pub fn value_and_slope_strict(&self, m: f64) -> Result<(f64, f64), LossError> {
        match self {
            MarginLoss::BregmanTweedie(s) => Ok((bt_loss(s, m), bt_loss_grad(s, m)?)),
            MarginLoss::HigherOrderHinge { alpha, c } => Ok((
                higher_order_hinge(*alpha, *c, m)?,
                higher_order_hinge_slope(*alpha, *c, m)?,
            )),
        }
    }
}

/// Regularized empirical risk `Σ L(m_i) + λ‖w‖²` and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub value: f64,
    pub grad_w: Vec<f64>,
    pub grad_b: f64,
}

fn accumulate(
    data: &Dataset,
    lambda: f64,
    w: &[f64],
    b: f64,
    mut loss: impl FnMut(f64) -> Result<(f64, f64), LossError>,
) -> Result<Objective, LossError> {
    assert_eq!(w.len(), data.n_features(), "weight arity");
    let mut value = 0.0;
    let mut grad_w = vec![0.0; w.len()];
    let mut grad_b = 0.0;
    for (x, &y) in data.rows().zip(data.labels()) {
        let m = y * (dot(w, x) + b);
        let (l, g) = loss(m)?;
        value += l;
        let gy = g * y;
        for (gw, xj) in grad_w.iter_mut().zip(x) {
            *gw += gy * xj;
        }
        grad_b += gy;
    }
    value += lambda * dot(w, w);
    for (gw, wj) in grad_w.iter_mut().zip(w) {
        *gw += 2.0 * lambda * wj;
    }
    Ok(Objective { value, grad_w, grad_b })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Objective with margins clamped below the gradient singularity. The
/// reduction is sequential, so results are reproducible bit-for-bit.
pub fn objective_and_grad(loss: &MarginLoss, lambda: f64, data: &Dataset, w: &[f64], b: f64) -> Objective {
    accumulate(data, lambda, w, b, |m| Ok((loss.value(m), loss.slope(m)))).expect("clamped loss is total")
}

/// Objective without the clamp; fails on the first margin outside the
/// gradient domain.
pub fn objective_and_grad_strict(
    loss: &MarginLoss,
    lambda: f64,
    data: &Dataset,
    w: &[f64],
    b: f64,
) -> Result<Objective, LossError> {
    accumulate(data, lambda, w, b, |m| loss.value_and_slope_strict(m))
}
