//! Convex base functions of Legendre type built from the extended exponential
//! and logarithm, their Bregman divergences, and the regular Legendre
//! transformation.
//!
//! `Ψ` integrates `exp_α` and `Φ` integrates `ln_α`; the two are a conjugate
//! pair (`Ψ* = Φ`), so `(Ψ')⁻¹ = ln_α` and `(Φ')⁻¹ = exp_α`. Constants of
//! integration are dropped everywhere: only derivatives and divergences are
//! meaningful, and both are invariant to affine terms.
//!
//! | α                  | dom Ψ            | dom Φ             |
//! |--------------------|------------------|-------------------|
//! | α < 1, α ∈ Re      | R                | R                 |
//! | α = 1              | R                | R+                |
//! | 1 < α < 2, α ∈ Re  | R++ / R--        | R- / R+           |
//! | 1 < α < 2, α ∉ Re  | R--              | R+                |
//! | α = 2              | R--              | R++               |
//! | α > 2, α ∈ Re      | R+ / R-          | R-- / R++         |
//! | α > 2, α ∉ Re      | R-               | R++               |
//!
//! For `α < 1` outside Re, `Ψ'(0) = 0` on `dom Ψ = R+` and steepness fails,
//! so no [`BaseFunction`] is built for those α. The free functions [`psi`],
//! [`psi_prime`] and [`psi_second`] still evaluate there.

use thiserror::Error;

use crate::alpha_domain::{classify_rational, signed_pow, DomainError, Rational, RealCategory};
use crate::extended::{exp_alpha_unchecked, ln_alpha_unchecked, BranchChoice, DomainSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegendreError {
    #[error("alpha = {0} does not give a convex function of Legendre type")]
    NotLegendreType(Rational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseKind {
    /// Integral of `exp_α`.
    Psi,
    /// Integral of `ln_α`.
    Phi,
}

fn is_even(alpha: Rational) -> bool {
    classify_rational(alpha) == RealCategory::Re
}

fn half_line(branch: BranchChoice, closed: bool) -> DomainSpec {
    match (branch, closed) {
        (BranchChoice::Positive, true) => DomainSpec::NONNEG,
        (BranchChoice::Positive, false) => DomainSpec::POS,
        (BranchChoice::Negative, true) => DomainSpec::NONPOS,
        (BranchChoice::Negative, false) => DomainSpec::NEG,
    }
}

/// `dom Ψ` for any rational α. `branch` is consulted only where two
/// half-lines are admissible.
pub fn psi_domain(alpha: Rational, branch: BranchChoice) -> DomainSpec {
    let one = Rational::ONE;
    let two = Rational::TWO;
    if alpha.is_one() {
        DomainSpec::REALS
    } else if alpha == two {
        DomainSpec::NEG
    } else if alpha < one {
        if is_even(alpha) {
            DomainSpec::REALS
        } else {
            DomainSpec::NONNEG
        }
    } else if alpha < two {
        if is_even(alpha) {
            half_line(branch, false)
        } else {
            DomainSpec::NEG
        }
    } else if is_even(alpha) {
        half_line(branch, true)
    } else {
        DomainSpec::NONPOS
    }
}

/// `dom Φ` for any rational α. For `α < 1` outside Re (not of Legendre
/// type) this returns `R+`, the reduced domain of `ln_α`.
pub fn phi_domain(alpha: Rational, branch: BranchChoice) -> DomainSpec {
    let one = Rational::ONE;
    let two = Rational::TWO;
    if alpha < one {
        if is_even(alpha) {
            DomainSpec::REALS
        } else {
            DomainSpec::NONNEG
        }
    } else if alpha < two {
        if alpha > one && is_even(alpha) && branch == BranchChoice::Negative {
            DomainSpec::NONPOS
        } else {
            DomainSpec::NONNEG
        }
    } else if alpha > two && is_even(alpha) && branch == BranchChoice::Negative {
        DomainSpec::NEG
    } else {
        DomainSpec::POS
    }
}

/// Whether `Ψ` (equivalently `Φ`) is of Legendre type for this α.
pub fn is_legendre_type(alpha: Rational) -> bool {
    !(alpha < Rational::ONE && !is_even(alpha))
}

fn psi_raw(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if alpha.is_one() {
        return Ok(x.exp());
    }
    if alpha == Rational::TWO {
        return if x < 0.0 {
            Ok(-(-x).ln())
        } else {
            Err(DomainError::new("psi", x))
        };
    }
    let a = Rational::ONE - alpha;
    let b = Rational::TWO - alpha;
    signed_pow(a.to_f64() * x, b / a)
        .map(|v| v / b.to_f64())
        .map_err(|_| DomainError::new("psi", x))
}

fn psi_second_raw(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if alpha.is_one() {
        return Ok(x.exp());
    }
    if alpha == Rational::TWO {
        return if x != 0.0 {
            Ok(1.0 / (x * x))
        } else {
            Err(DomainError::new("psi_second", x))
        };
    }
    let a = Rational::ONE - alpha;
    signed_pow(a.to_f64() * x, alpha / a).map_err(|_| DomainError::new("psi_second", x))
}

fn phi_raw(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if alpha == Rational::TWO {
        return if x > 0.0 {
            Ok(-x.ln())
        } else {
            Err(DomainError::new("phi", x))
        };
    }
    if alpha.is_one() {
        return if x == 0.0 {
            Ok(0.0)
        } else if x > 0.0 {
            Ok(x * x.ln() - x)
        } else {
            Err(DomainError::new("phi", x))
        };
    }
    let a = Rational::ONE - alpha;
    let b = Rational::TWO - alpha;
    signed_pow(x, b)
        .map(|v| v / (a.to_f64() * b.to_f64()))
        .map_err(|_| DomainError::new("phi", x))
}

fn phi_second_raw(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    signed_pow(x, -alpha).map_err(|_| DomainError::new("phi_second", x))
}

fn in_psi_domain(alpha: Rational, x: f64, what: &'static str) -> Result<(), DomainError> {
    if psi_domain(alpha, BranchChoice::of_sign(x)).contains(x) {
        Ok(())
    } else {
        Err(DomainError::new(what, x))
    }
}

/// `Ψ(x)`; `e^x` at α = 1, `-ln(-x)` at α = 2, otherwise
/// `[(1-α)x]^((2-α)/(1-α)) / (2-α)`.
pub fn psi(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    in_psi_domain(alpha, x, "psi")?;
    psi_raw(alpha, x)
}

/// `Ψ'(x) = exp_α(x)`.
pub fn psi_prime(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    in_psi_domain(alpha, x, "psi_prime")?;
    exp_alpha_unchecked(alpha, x).map_err(|_| DomainError::new("psi_prime", x))
}

/// `Ψ''(x) = ((1-α)x)^(α/(1-α))`.
pub fn psi_second(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    in_psi_domain(alpha, x, "psi_second")?;
    psi_second_raw(alpha, x)
}

/// `Φ(x)`; `-ln x` at α = 2, `x ln x - x` at α = 1, otherwise
/// `x^(2-α) / ((2-α)(1-α))`.
pub fn phi(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if !phi_domain(alpha, BranchChoice::of_sign(x)).contains(x) {
        return Err(DomainError::new("phi", x));
    }
    phi_raw(alpha, x)
}

/// `Φ'(Ψ'(x))`, which equals `x` on the interior of `dom Ψ`.
pub fn conjugate_check(alpha: Rational, x: f64) -> Result<f64, DomainError> {
    if !psi_domain(alpha, BranchChoice::of_sign(x)).contains_interior(x) {
        return Err(DomainError::new("conjugate_check", x));
    }
    let g = exp_alpha_unchecked(alpha, x)?;
    ln_alpha_unchecked(alpha, g).map_err(|_| DomainError::new("conjugate_check", x))
}

/// A Legendre-type base function with a fixed domain branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseFunction {
    kind: BaseKind,
    alpha: Rational,
    domain: DomainSpec,
    branch: BranchChoice,
}

impl BaseFunction {
    pub fn new(kind: BaseKind, alpha: Rational, branch: BranchChoice) -> Result<Self, LegendreError> {
        if !is_legendre_type(alpha) {
            return Err(LegendreError::NotLegendreType(alpha));
        }
        let domain = match kind {
            BaseKind::Psi => psi_domain(alpha, branch),
            BaseKind::Phi => phi_domain(alpha, branch),
        };
        Ok(Self {
            kind,
            alpha,
            domain,
            branch,
        })
    }

    pub fn psi(alpha: Rational, branch: BranchChoice) -> Result<Self, LegendreError> {
        Self::new(BaseKind::Psi, alpha, branch)
    }

    pub fn phi(alpha: Rational, branch: BranchChoice) -> Result<Self, LegendreError> {
        Self::new(BaseKind::Phi, alpha, branch)
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn branch(&self) -> BranchChoice {
        self.branch
    }

    /// The conjugate base function: `Ψ ↔ Φ`, on the half-line that the
    /// derivative maps this domain onto.
    pub fn conjugate(&self) -> BaseFunction {
        let kind = match self.kind {
            BaseKind::Psi => BaseKind::Phi,
            BaseKind::Phi => BaseKind::Psi,
        };
        let branch = if self.domain.lower >= 0.0 {
            BranchChoice::Negative
        } else if self.domain.upper <= 0.0 {
            BranchChoice::Positive
        } else {
            self.branch
        };
        BaseFunction::new(kind, self.alpha, branch).expect("conjugate of a Legendre function")
    }

    fn check(&self, x: f64, what: &'static str) -> Result<(), DomainError> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(DomainError::new(what, x))
        }
    }

    fn check_interior(&self, x: f64, what: &'static str) -> Result<(), DomainError> {
        if self.domain.contains_interior(x) {
            Ok(())
        } else {
            Err(DomainError::new(what, x))
        }
    }

    pub fn value(&self, x: f64) -> Result<f64, DomainError> {
        self.check(x, "base value")?;
        match self.kind {
            BaseKind::Psi => psi_raw(self.alpha, x),
            BaseKind::Phi => phi_raw(self.alpha, x),
        }
    }

    /// `exp_α` for Ψ, `ln_α` for Φ.
    pub fn derivative(&self, x: f64) -> Result<f64, DomainError> {
        self.check(x, "base derivative")?;
        match self.kind {
            BaseKind::Psi => exp_alpha_unchecked(self.alpha, x),
            BaseKind::Phi => ln_alpha_unchecked(self.alpha, x),
        }
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64, DomainError> {
        self.check(x, "base second derivative")?;
        match self.kind {
            BaseKind::Psi => psi_second_raw(self.alpha, x),
            BaseKind::Phi => phi_second_raw(self.alpha, x),
        }
    }
}

/// Bregman divergence `f(x) - f(y) - f'(y)(x - y)` with `x ∈ dom f` and
/// `y ∈ int(dom f)`.
pub fn bregman_div(base: &BaseFunction, x: f64, y: f64) -> Result<f64, DomainError> {
    base.check(x, "bregman_div")?;
    base.check_interior(y, "bregman_div")?;
    let fx = base.value(x)?;
    let fy = base.value(y)?;
    let gy = base.derivative(y)?;
    Ok(fx - fy - gy * (x - y))
}

/// Regular Legendre transformation `argsup_z ηz - D_f(z|x)`, in closed form
/// `(f*)'(η + f'(x))`.
pub fn legendre_transform(base: &BaseFunction, eta: f64, x: f64) -> Result<f64, DomainError> {
    base.check_interior(x, "legendre_transform")?;
    let u = eta + base.derivative(x)?;
    let conj = base.conjugate();
    conj.check_interior(u, "legendre_transform")?;
    conj.derivative(u)
}
