//! Exact rationals and the parity-based categorization of the real line.
//!
//! Every α-parameterized function in this crate takes its parameter as a
//! [`Rational`]. Whether a rational power `x^(p/q)` is real-valued for
//! negative `x` depends only on the parity of `p` and `q`, which is what
//! [`RealCategory`] captures:
//!
//! - [`RealCategory::Re`]: `2k/(2l+1)`, even numerator over odd denominator
//! - [`RealCategory::Ro`]: `(2k+1)/(2l+1)`, odd over odd
//! - [`RealCategory::Rxe`]: `(2k+1)/(2l)`, odd over even
//! - [`RealCategory::Rxx`]: everything else (irrationals), never produced here

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

/// Argument outside the domain of a real-valued function.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{what}: argument {x} is outside the domain")]
pub struct DomainError {
    pub what: &'static str,
    pub x: f64,
}

impl DomainError {
    pub fn new(what: &'static str, x: f64) -> Self {
        Self { what, x }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("malformed rational {0:?}, expected \"p/q\" or \"p\"")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("rational {0:?} overflows 64-bit integers")]
    Overflow(String),
}

/// An exact rational in lowest terms with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };
    pub const TWO: Rational = Rational { num: 2, den: 1 };

    /// Builds the canonical form of `num/den`. Returns `None` when `den == 0`
    /// or the sign normalization overflows.
    pub fn checked_new(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        if num == 0 {
            return Some(Self::ZERO);
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs());
        // g >= 1 and divides both magnitudes, so the quotients fit unless
        // the magnitude is 2^63 with g == 1.
        let (mut n, mut d) = if g == 1 {
            (num, den)
        } else {
            let g = g as i64;
            (num / g, den / g)
        };
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        Some(Self { num: n, den: d })
    }

    /// Panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        Self::checked_new(num, den).expect("rational with zero denominator or overflow")
    }

    pub const fn integer(n: i64) -> Self {
        Self { num: n, den: 1 }
    }

    pub const fn num(self) -> i64 {
        self.num
    }

    pub const fn den(self) -> i64 {
        self.den
    }

    pub const fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_one(self) -> bool {
        self == Self::ONE
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn signum(self) -> i64 {
        self.num.signum()
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        let l = lcm_den(self.den, rhs.den)?;
        let a = self.num.checked_mul(l / self.den)?;
        let b = rhs.num.checked_mul(l / rhs.den)?;
        Self::checked_new(a.checked_add(b)?, l)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.checked_add(rhs.checked_neg()?)
    }

    pub fn checked_mul(self, rhs: Self) -> Option<Self> {
        // cross-reduce first to keep intermediates small
        let g1 = gcd(self.num.unsigned_abs(), rhs.den.unsigned_abs()).max(1) as i64;
        let g2 = gcd(rhs.num.unsigned_abs(), self.den.unsigned_abs()).max(1) as i64;
        let n = (self.num / g1).checked_mul(rhs.num / g2)?;
        let d = (self.den / g2).checked_mul(rhs.den / g1)?;
        Self::checked_new(n, d)
    }

    pub fn checked_div(self, rhs: Self) -> Option<Self> {
        self.checked_mul(rhs.checked_recip()?)
    }

    pub fn checked_neg(self) -> Option<Self> {
        Some(Self {
            num: self.num.checked_neg()?,
            den: self.den,
        })
    }

    /// `None` for zero.
    pub fn checked_recip(self) -> Option<Self> {
        Self::checked_new(self.den, self.num)
    }

    pub fn category(self) -> RealCategory {
        classify_rational(self)
    }
}

fn lcm_den(a: i64, b: i64) -> Option<i64> {
    let g = gcd(a.unsigned_abs(), b.unsigned_abs()) as i64;
    (a / g).checked_mul(b)
}

macro_rules! checked_op {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                self.$checked(rhs).expect("rational arithmetic overflow")
            }
        }
    };
}

checked_op!(Add, add, checked_add);
checked_op!(Sub, sub, checked_sub);
checked_op!(Mul, mul, checked_mul);
checked_op!(Div, div, checked_div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.checked_neg().expect("rational negation overflow")
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // denominators are positive, so cross-multiplication preserves order
        let l = self.num as i128 * other.den as i128;
        let r = other.num as i128 * self.den as i128;
        l.cmp(&r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        rational_of_string(s)
    }
}

fn parse_int(tok: &str, whole: &str) -> Result<i64, ParseRationalError> {
    let t = tok.trim();
    let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Malformed(whole.to_string()));
    }
    t.parse::<i64>()
        .map_err(|_| ParseRationalError::Overflow(whole.to_string()))
}

/// Parses `"p/q"` or `"p"` with decimal integers into canonical form.
pub fn rational_of_string(s: &str) -> Result<Rational, ParseRationalError> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (parse_int(p, s)?, parse_int(q, s)?),
        None => (parse_int(s, s)?, 1),
    };
    if q == 0 {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Rational::checked_new(p, q).ok_or_else(|| ParseRationalError::Overflow(s.to_string()))
}

/// Parity category of a real number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RealCategory {
    /// even / odd
    Re,
    /// odd / odd
    Ro,
    /// odd / even
    Rxe,
    /// not a rational of the above forms
    Rxx,
}

impl RealCategory {
    pub fn symbol(self) -> &'static str {
        match self {
            RealCategory::Re => "Re",
            RealCategory::Ro => "Ro",
            RealCategory::Rxe => "Rxe",
            RealCategory::Rxx => "Rxx",
        }
    }
}

impl fmt::Display for RealCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Category of a canonical rational. Never returns [`RealCategory::Rxx`].
pub fn classify_rational(q: Rational) -> RealCategory {
    let num_even = q.num % 2 == 0;
    let den_even = q.den % 2 == 0;
    match (num_even, den_even) {
        // lowest terms: an even numerator forces an odd denominator
        (true, _) => RealCategory::Re,
        (false, false) => RealCategory::Ro,
        (false, true) => RealCategory::Rxe,
    }
}

/// Category of `1/q` given the category of a nonzero `q`.
pub fn reciprocal_category(cat: RealCategory) -> RealCategory {
    match cat {
        RealCategory::Ro => RealCategory::Ro,
        RealCategory::Re => RealCategory::Rxe,
        RealCategory::Rxe => RealCategory::Re,
        RealCategory::Rxx => RealCategory::Rxx,
    }
}

/// Real power `x^r` with the parity semantics of the rational exponent.
///
/// An odd denominator admits negative bases: the result is
/// `sign(x)^num * |x|^(num/den)`. An even denominator is an even root and
/// needs `x >= 0`. Zero to a negative power is rejected.
pub fn signed_pow(x: f64, r: Rational) -> Result<f64, DomainError> {
    if x.is_nan() {
        return Err(DomainError::new("signed_pow", x));
    }
    let (p, q) = (r.num(), r.den());
    if p == 0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return if p > 0 {
            Ok(0.0)
        } else {
            Err(DomainError::new("signed_pow", x))
        };
    }
    let odd_den = q % 2 != 0;
    if !odd_den && x < 0.0 {
        return Err(DomainError::new("signed_pow", x));
    }
    let mag = if q == 1 {
        match i32::try_from(p) {
            Ok(k) => x.abs().powi(k),
            Err(_) => x.abs().powf(p as f64),
        }
    } else {
        x.abs().powf(r.to_f64())
    };
    let negate = x < 0.0 && p % 2 != 0;
    Ok(if negate { -mag } else { mag })
}
