//! Model configuration: arrival probability, light-cycle half-length and
//! arithmetic mode.
//!
//! The queue evolves in cycles of `2ℓ` steps. The first `ℓ` steps of every
//! cycle are red (a car arrives with probability `p`), the last `ℓ` are green
//! (the head car leaves with probability `q = 1 - p`, otherwise nothing
//! happens). Step indices are 1-based.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("denominator must be positive, got {0}")]
    NonPositiveDenominator(BigInt),
    #[error("p={0} violates p>0")]
    NonPositiveP(BigRational),
    #[error("p>q violates p≤q (p={0})")]
    PAboveHalf(BigRational),
    #[error("ell={0} violates ell≥1")]
    ZeroEll(usize),
    #[error("cannot parse probability {0:?}: expected \"a/b\" or a decimal")]
    Unparseable(String),
}

/// Arithmetic used by the dynamic program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode {other:?} (expected exact|float)")),
        }
    }
}

/// Validated model parameters. `q` is always exactly `1 - p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    p: BigRational,
    q: BigRational,
    ell: usize,
    mode: Mode,
}

impl Params {
    /// Accepts `0 < p ≤ 1/2` and `ell ≥ 1`.
    pub fn new(p: BigRational, ell: usize, mode: Mode) -> Result<Self, ParamError> {
        if p <= BigRational::zero() {
            return Err(ParamError::NonPositiveP(p));
        }
        let q = BigRational::one() - &p;
        if p > q {
            return Err(ParamError::PAboveHalf(p));
        }
        if ell == 0 {
            return Err(ParamError::ZeroEll(ell));
        }
        Ok(Self { p, q, ell, mode })
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn p_f64(&self) -> f64 {
        self.p.to_f64().expect("p lies in (0, 1/2]")
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn with_ell(&self, ell: usize) -> Result<Self, ParamError> {
        Self::new(self.p.clone(), ell, self.mode)
    }

    /// Number of arrival phases among steps `1..=n`; an upper bound on `M_n`.
    pub fn arrival_count(&self, n: usize) -> usize {
        arrival_count(self.ell, n)
    }
}

pub fn arrival_count(ell: usize, n: usize) -> usize {
    let cycle = 2 * ell;
    ell * (n / cycle) + (n % cycle).min(ell)
}

pub fn validate_params(
    p_numerator: impl Into<BigInt>,
    p_denominator: impl Into<BigInt>,
    ell: usize,
    mode: Mode,
) -> Result<Params, ParamError> {
    let den = p_denominator.into();
    if den <= BigInt::zero() {
        return Err(ParamError::NonPositiveDenominator(den));
    }
    Params::new(BigRational::new(p_numerator.into(), den), ell, mode)
}

/// Parses `"a/b"`, an integer, or a plain decimal such as `"0.35"`.
/// Decimals map to the exact rational with denominator `10^k`.
pub fn parse_probability(text: &str) -> Result<BigRational, ParamError> {
    let bad = || ParamError::Unparseable(text.to_string());
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Ok(BigRational::new(num, den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseKind {
    Arrival,
    Departure,
}

/// Phase of step `i` (1-based) in a light cycle of half-length `ell`.
pub fn phase_of(i: usize, ell: usize) -> PhaseKind {
    debug_assert!(i >= 1 && ell >= 1);
    if (i - 1) % (2 * ell) < ell {
        PhaseKind::Arrival
    } else {
        PhaseKind::Departure
    }
}
