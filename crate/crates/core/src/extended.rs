//! Extended exponential and logarithmic functions.
//!
//! Two forms are provided. The scaled form carries the scale `c > 0`:
//!
//! ```text
//! exp_{α,c}(x) = (c^(1-α) + (1-α) x)^(1/(1-α))      exp_{1,c}(x) = c e^x
//! ln_{α,c}(x)  = (x^(1-α) - c^(1-α)) / (1-α)          ln_{1,c}(x)  = ln x - ln c
//! ```
//!
//! The equivalence-class form drops the scale by shifting the argument by
//! `c_α = c^(1-α)/(α-1)`:
//!
//! ```text
//! exp_α(x) = ((1-α) x)^(1/(1-α))      ln_α(x) = x^(1-α)/(1-α)
//! ```
//!
//! Powers follow [`signed_pow`], so the real domain of each function depends
//! on the parity category of `α` or `1-α`. The raw domains (where the formula
//! is real-valued) and the reduced domains (on which `exp_α` and `ln_α` are
//! mutually inverse) are available as [`DomainSpec`] values from
//! [`domain_exp`] and [`domain_ln`].

use std::fmt;

use crate::alpha_domain::{classify_rational, signed_pow, DomainError, Rational, RealCategory};

/// Interval over the extended reals. Infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl DomainSpec {
    pub const REALS: DomainSpec = DomainSpec {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        lower_closed: false,
        upper_closed: false,
    };
    /// `[0, ∞)`
    pub const NONNEG: DomainSpec = DomainSpec {
        lower: 0.0,
        upper: f64::INFINITY,
        lower_closed: true,
        upper_closed: false,
    };
    /// `(0, ∞)`
    pub const POS: DomainSpec = DomainSpec {
        lower: 0.0,
        upper: f64::INFINITY,
        lower_closed: false,
        upper_closed: false,
    };
    /// `(-∞, 0]`
    pub const NONPOS: DomainSpec = DomainSpec {
        lower: f64::NEG_INFINITY,
        upper: 0.0,
        lower_closed: false,
        upper_closed: true,
    };
    /// `(-∞, 0)`
    pub const NEG: DomainSpec = DomainSpec {
        lower: f64::NEG_INFINITY,
        upper: 0.0,
        lower_closed: false,
        upper_closed: false,
    };

    /// Panics if `lower > upper` or an infinite endpoint is marked closed.
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Self {
        assert!(lower <= upper, "empty interval [{lower}, {upper}]");
        assert!(!(lower_closed && lower.is_infinite()), "infinite endpoint must be open");
        assert!(!(upper_closed && upper.is_infinite()), "infinite endpoint must be open");
        Self {
            lower,
            upper,
            lower_closed,
            upper_closed,
        }
    }

    /// Exact membership test.
    pub fn contains(&self, x: f64) -> bool {
        self.contains_with_tol(x, 0.0)
    }

    /// Membership with the interval shrunk by `eps` at every finite endpoint,
    /// open or closed. `eps = 0` is exact membership.
    pub fn contains_with_tol(&self, x: f64, eps: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let lo_ok = if self.lower.is_infinite() {
            true
        } else if eps > 0.0 {
            x >= self.lower + eps
        } else if self.lower_closed {
            x >= self.lower
        } else {
            x > self.lower
        };
        let hi_ok = if self.upper.is_infinite() {
            true
        } else if eps > 0.0 {
            x <= self.upper - eps
        } else if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        lo_ok && hi_ok && x.is_finite()
    }

    /// Membership in the interior.
    pub fn contains_interior(&self, x: f64) -> bool {
        self.interior().contains(x)
    }

    pub fn interior(&self) -> DomainSpec {
        DomainSpec {
            lower_closed: false,
            upper_closed: false,
            ..*self
        }
    }

    pub fn is_open(&self) -> bool {
        !self.lower_closed && !self.upper_closed
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let named = [
            (DomainSpec::REALS, "R"),
            (DomainSpec::NONNEG, "R+"),
            (DomainSpec::POS, "R++"),
            (DomainSpec::NONPOS, "R-"),
            (DomainSpec::NEG, "R--"),
        ];
        if let Some((_, name)) = named.iter().find(|(d, _)| d == self) {
            return f.write_str(name);
        }
        let lb = if self.lower_closed { '[' } else { '(' };
        let ub = if self.upper_closed { ']' } else { ')' };
        write!(f, "{lb}{}, {}{ub}", self.lower, self.upper)
    }
}

/// Which half-line to use where a domain table offers `R++ / R--`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchChoice {
    Positive,
    Negative,
}

impl BranchChoice {
    pub fn flip(self) -> Self {
        match self {
            BranchChoice::Positive => BranchChoice::Negative,
            BranchChoice::Negative => BranchChoice::Positive,
        }
    }

    /// The branch containing `x`; zero is taken as positive.
    pub fn of_sign(x: f64) -> Self {
        if x < 0.0 {
            BranchChoice::Negative
        } else {
            BranchChoice::Positive
        }
    }

    fn open_half_line(self) -> DomainSpec {
        match self {
            BranchChoice::Positive => DomainSpec::POS,
            BranchChoice::Negative => DomainSpec::NEG,
        }
    }
}

fn one_minus(alpha: Rational) -> Rational {
    Rational::ONE - alpha
}

fn is_even(q: Rational) -> bool {
    classify_rational(q) == RealCategory::Re
}

/// Domain of `exp_α`.
///
/// `reduced = false` gives the natural real domain keyed by the category of
/// `1-α`; `reduced = true` gives the sub-domain on which `exp_α` is a bijection
/// onto the reduced domain of `ln_α`, keyed by the category of `α`. When the
/// reduced bijection offers two half-lines, the exponential's negative branch
/// pairs with the logarithm's positive branch and vice versa.
pub fn domain_exp(alpha: Rational, reduced: bool, branch: BranchChoice) -> DomainSpec {
    if alpha.is_one() {
        return DomainSpec::REALS;
    }
    let below_one = alpha < Rational::ONE;
    if reduced {
        match (below_one, is_even(alpha)) {
            (true, true) => DomainSpec::REALS,
            (true, false) => DomainSpec::NONNEG,
            (false, true) => branch.open_half_line(),
            (false, false) => DomainSpec::NEG,
        }
    } else {
        match (below_one, classify_rational(one_minus(alpha))) {
            (true, RealCategory::Rxe | RealCategory::Ro) => DomainSpec::REALS,
            (true, RealCategory::Re | RealCategory::Rxx) => DomainSpec::NONNEG,
            (false, RealCategory::Rxe | RealCategory::Ro) => branch.open_half_line(),
            (false, RealCategory::Re | RealCategory::Rxx) => DomainSpec::NEG,
        }
    }
}

/// Domain of `ln_α`, raw or reduced; see [`domain_exp`].
pub fn domain_ln(alpha: Rational, reduced: bool, branch: BranchChoice) -> DomainSpec {
    if alpha.is_one() {
        return DomainSpec::POS;
    }
    let below_one = alpha < Rational::ONE;
    if reduced {
        match (below_one, is_even(alpha)) {
            (true, true) => DomainSpec::REALS,
            (true, false) => DomainSpec::NONNEG,
            (false, true) => branch.open_half_line(),
            (false, false) => DomainSpec::POS,
        }
    } else {
        match (below_one, classify_rational(one_minus(alpha))) {
            (true, RealCategory::Re | RealCategory::Ro) => DomainSpec::REALS,
            (true, RealCategory::Rxe | RealCategory::Rxx) => DomainSpec::NONNEG,
            (false, RealCategory::Re | RealCategory::Ro) => branch.open_half_line(),
            (false, RealCategory::Rxe | RealCategory::Rxx) => DomainSpec::POS,
        }
    }
}

/// `exp_α(x)` without a domain check. Used where the caller has already
/// validated `x` against a (possibly narrower) domain.
pub(crate) fn exp_alpha_unchecked(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if alpha.is_one() {
        return Ok(x.exp());
    }
    let a = one_minus(alpha);
    signed_pow(a.to_f64() * x, a.checked_recip().expect("alpha != 1"))
        .map_err(|_| DomainError::new("exp_alpha", x))
}

pub(crate) fn ln_alpha_unchecked(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if alpha.is_one() {
        return if x > 0.0 {
            Ok(x.ln())
        } else {
            Err(DomainError::new("ln_alpha", x))
        };
    }
    let a = one_minus(alpha);
    signed_pow(x, a)
        .map(|v| v / a.to_f64())
        .map_err(|_| DomainError::new("ln_alpha", x))
}

/// Extended exponential in equivalence-class form. `x` must lie in the raw
/// domain of [`domain_exp`], with the half-line picked by the sign of `x`.
pub fn exp_alpha(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if !domain_exp(alpha, false, BranchChoice::of_sign(x)).contains(x) {
        return Err(DomainError::new("exp_alpha", x));
    }
    exp_alpha_unchecked(alpha, x)
}

/// Extended logarithm in equivalence-class form, on the raw domain of
/// [`domain_ln`].
pub fn ln_alpha(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if !domain_ln(alpha, false, BranchChoice::of_sign(x)).contains(x) {
        return Err(DomainError::new("ln_alpha", x));
    }
    ln_alpha_unchecked(alpha, x)
}

fn check_scale(what: &'static str, c: f64) -> Result<(), DomainError> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(DomainError::new(what, c))
    }
}

/// Extended exponential with scale `c > 0`.
pub fn exp_alpha_c(alpha: Rational, c: f64, x: f64) -> Result<f64, DomainError> {
    check_scale("exp_alpha_c scale", c)?;
    if alpha.is_one() {
        return Ok(c * x.exp());
    }
    let a = one_minus(alpha);
    let af = a.to_f64();
    let base = c.powf(af) + af * x;
    signed_pow(base, a.checked_recip().expect("alpha != 1"))
        .map_err(|_| DomainError::new("exp_alpha_c", x))
}

/// Extended logarithm with scale `c > 0`; `ln_{α,c}(c) = 0`.
pub fn ln_alpha_c(alpha: Rational, c: f64, x: f64) -> Result<f64, DomainError> {
    check_scale("ln_alpha_c scale", c)?;
    if alpha.is_one() {
        return if x > 0.0 {
            Ok(x.ln() - c.ln())
        } else {
            Err(DomainError::new("ln_alpha_c", x))
        };
    }
    let a = one_minus(alpha);
    let af = a.to_f64();
    let xp = signed_pow(x, a).map_err(|_| DomainError::new("ln_alpha_c", x))?;
    Ok((xp - c.powf(af)) / af)
}

/// The shift `c_α = c^(1-α)/(α-1)` linking the scaled and class forms:
/// `exp_{α,c}(x) = exp_α(x - c_α)` and `ln_{α,c}(x) = ln_α(x) + c_α`.
///
/// At `α = 1` the class form shifts by `ln c` instead; this returns `-∞`,
/// the limit of `c_α` as `α → 1` from below.
pub fn c_alpha(alpha: Rational, c: f64) -> f64 {
    if alpha.is_one() {
        return f64::NEG_INFINITY;
    }
    let a = one_minus(alpha).to_f64();
    -c.powf(a) / a
}
