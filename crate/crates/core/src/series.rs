//! Truncated power series in `λ` with exact rational coefficients, and the
//! `ℓ = 1` generating functions for the running maximum built on top of it.
//!
//! Every generating function here is a rational expression in `λ` and
//! `θ(λ) = (1 - 2pqλ - √(1 - 4pqλ)) / λ`. Because `θ` has zero constant term
//! and every denominator that appears has a nonzero constant term, all
//! arithmetic is exact through the truncation order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Order used by verification runs unless a caller asks otherwise.
pub const DEFAULT_ORDER: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("coefficient {requested} requested from a series truncated at order {order}")]
    BeyondOrder { requested: usize, order: usize },
    #[error("division by a series with zero constant term")]
    ZeroConstantTerm,
    #[error("a={a} must be at least 1")]
    LevelTooSmall { a: usize },
    #[error("p={0} must lie strictly between 0 and 1")]
    InvalidProbability(BigRational),
    #[error("generating-function paths disagree for a={a} at λ^{degree}: {left} ({left_name}) vs {right} ({right_name})")]
    PathMismatch {
        a: usize,
        degree: usize,
        left_name: &'static str,
        left: BigRational,
        right_name: &'static str,
        right: BigRational,
    },
}

/// `c_0 + c_1 λ + … + c_N λ^N`, exact through degree `N`.
#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Series[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "; O(λ^{})]", self.order() + 1)
    }
}

impl Series {
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least the constant term"
        );
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn constant(value: BigRational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    /// `value · λ^degree`.
    pub fn monomial(value: BigRational, degree: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if degree <= order {
            s.coeffs[degree] = value;
        }
        s
    }

    /// The formal variable `λ` itself.
    pub fn lambda(order: usize) -> Self {
        Self::monomial(BigRational::one(), 1, order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Result<&BigRational, SeriesError> {
        self.coeffs.get(n).ok_or(SeriesError::BeyondOrder {
            requested: n,
            order: self.order(),
        })
    }

    /// Index of the first nonzero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_constant(&self, value: &BigRational) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += value;
        s
    }

    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let head = &self.coeffs[0];
        if head.is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let inv_head = head.recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(self.coeffs.len());
        out.push(inv_head.clone());
        for n in 1..self.coeffs.len() {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &out[n - k];
                }
            }
            out.push(-(acc * &inv_head));
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, divisor: &Series) -> Result<Self, SeriesError> {
        Ok(self * &divisor.reciprocal()?)
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut result = Series::one(self.order());
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    fn check_order(&self, other: &Series) {
        assert_eq!(
            self.order(),
            other.order(),
            "series orders differ; truncation must be chosen up front"
        );
    }
}

impl Add for &Series {
    type Output = Series;

    fn add(self, rhs: &Series) -> Series {
        self.check_order(rhs);
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;

    fn sub(self, rhs: &Series) -> Series {
        self.check_order(rhs);
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Series {
    type Output = Series;

    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;

    fn mul(self, rhs: &Series) -> Series {
        self.check_order(rhs);
        let order = self.order();
        let mut out = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=order - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Series { coeffs: out }
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn pow2(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

fn powr(base: &BigRational, k: usize) -> BigRational {
    num_traits::pow(base.clone(), k)
}

fn check_p(p: &BigRational) -> Result<BigRational, SeriesError> {
    if *p <= BigRational::zero() || *p >= BigRational::one() {
        return Err(SeriesError::InvalidProbability(p.clone()));
    }
    Ok(BigRational::one() - p)
}

/// Catalan numbers `C_0..=C_n` from `C_{m+1} = C_m · 2(2m+1)/(m+2)`.
pub fn catalan_numbers(n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c = BigInt::one();
    for m in 0..=n {
        out.push(c.clone());
        c = c * BigInt::from(2 * (2 * m + 1)) / BigInt::from(m + 2);
    }
    out
}

/// `√(1 - 4uλ)` through degree `order` using `√(1-4x) = 1 - Σ_{m≥1} 2 C_{m-1} x^m`.
pub fn sqrt_one_minus_4u(u: &BigRational, order: usize) -> Series {
    let catalan = catalan_numbers(order);
    let mut coeffs = vec![BigRational::one()];
    let mut u_power = BigRational::one();
    for m in 1..=order {
        u_power *= u;
        let c = BigRational::from_integer(catalan[m - 1].clone());
        coeffs.push(-(int(2) * c * &u_power));
    }
    Series::from_coeffs(coeffs)
}

/// `θ(λ) = (1 - 2pqλ - √(1 - 4pqλ)) / λ` through degree `order`.
pub fn theta_series(p: &BigRational, order: usize) -> Result<Series, SeriesError> {
    let q = check_p(p)?;
    let u = p * &q;
    let root = sqrt_one_minus_4u(&u, order + 1);
    let mut numerator = -&root;
    numerator.coeffs[0] += BigRational::one();
    numerator.coeffs[1] -= int(2) * &u;
    debug_assert!(numerator.coeffs[0].is_zero() && numerator.coeffs[1].is_zero());
    // Divide by λ: shift down one degree.
    Ok(Series::from_coeffs(numerator.coeffs[1..].to_vec()))
}

/// `1 / (1 - cλ)`.
fn geometric(c: &BigRational, order: usize) -> Series {
    Series::from_coeffs((0..=order).map(|n| powr(c, n)).collect())
}

/// `G(λ,0,0) = qλ / (1 - qλ)`: `P{S_2n = 0, M_2n = 0} = q^n` for `n ≥ 1`.
pub fn g00_series(p: &BigRational, order: usize) -> Result<Series, SeriesError> {
    let q = check_p(p)?;
    let mut s = geometric(&q, order);
    s.coeffs[0] = BigRational::zero();
    Ok(s)
}

/// Shared pieces of the `ℓ = 1` closed forms at a fixed `(p, N)`.
struct Kernel {
    p: BigRational,
    q: BigRational,
    theta: Series,
    order: usize,
}

impl Kernel {
    fn new(p: &BigRational, order: usize) -> Result<Self, SeriesError> {
        let q = check_p(p)?;
        Ok(Self {
            p: p.clone(),
            q,
            theta: theta_series(p, order)?,
            order,
        })
    }

    /// `D_k = 2^{2k} p^{2k-1} q^{2k+1} (θ - 2p²) + θ^{2k} (θ - 2q²)`, `k ≥ 1`.
    fn d(&self, k: usize) -> Series {
        let two_p2 = int(2) * &self.p * &self.p;
        let two_q2 = int(2) * &self.q * &self.q;
        let factor = pow2(2 * k) * powr(&self.p, 2 * k - 1) * powr(&self.q, 2 * k + 1);
        let left = self.theta.add_constant(&-two_p2).scale(&factor);
        let right = &self.theta.pow(2 * k as u32) * &self.theta.add_constant(&-two_q2);
        &left + &right
    }

    /// `θ² - 2(1-2p)qθ + 4p²q²`, which equals `2pθ(1-qλ)/(pλ)`.
    fn quadratic(&self) -> Series {
        let one_minus_2p = BigRational::one() - int(2) * &self.p;
        let linear = self.theta.scale(&(int(-2) * one_minus_2p * &self.q));
        let constant = int(4) * &self.p * &self.p * &self.q * &self.q;
        (&self.theta.pow(2) + &linear).add_constant(&constant)
    }

    fn theta_minus_2pq(&self) -> Series {
        self.theta.add_constant(&-(int(2) * &self.p * &self.q))
    }

    fn g_aa(&self, a: usize) -> Result<Series, SeriesError> {
        let prefactor = pow2(a) * powr(&self.p, 2 * a);
        let numerator = &(&self.quadratic() * &self.theta_minus_2pq()) * &self.theta.pow(a as u32);
        let value = numerator.scale(&prefactor).div(&self.d(a + 1))?;
        Ok(&value * &geometric(&self.q, self.order))
    }

    fn bracket(&self, a: usize) -> Result<Series, SeriesError> {
        let first = self
            .theta
            .pow(a as u32)
            .scale(&(pow2(a) * powr(&self.p, 2 * a - 1)))
            .div(&self.d(a))?;
        let second = self
            .theta
            .pow(a as u32 + 1)
            .scale(&(pow2(a + 1) * powr(&self.p, 2 * a + 1)))
            .div(&self.d(a + 1))?;
        let one = BigRational::one();
        Ok(&(&self.theta_minus_2pq() * &(&first - &second)) * &geometric(&one, self.order))
    }

    /// `pλ/(1-λ) · [G(λ,a-1,a-1) - G(λ,a,a)]`, where the `a = 1` case uses
    /// `1 + G(λ,0,0) = 1/(1-qλ)` (the `n = 0` term included).
    fn relation(&self, a: usize) -> Result<Series, SeriesError> {
        let previous = if a == 1 {
            geometric(&self.q, self.order)
        } else {
            self.g_aa(a - 1)?
        };
        let diff = &previous - &self.g_aa(a)?;
        let p_lambda = Series::monomial(self.p.clone(), 1, self.order);
        Ok(&(&p_lambda * &diff) * &geometric(&BigRational::one(), self.order))
    }
}

/// `G(λ,a,a) = Σ_n λ^n P{S_2n = a, M_2n = a}` for `a ≥ 1`.
pub fn g_aa_series(p: &BigRational, a: usize, order: usize) -> Result<Series, SeriesError> {
    if a == 0 {
        return Err(SeriesError::LevelTooSmall { a });
    }
    Kernel::new(p, order)?.g_aa(a)
}

/// `G(λ,1,1)` in the form obtained by eliminating `G(λ,0,1)` from the two
/// kernel-root equations at `a = 1`.
pub fn g11_eliminated_series(p: &BigRational, order: usize) -> Result<Series, SeriesError> {
    let k = Kernel::new(p, order)?;
    let p2 = &k.p * &k.p;
    let numerator = (&(&k.quadratic() * &k.theta_minus_2pq()) * &k.theta).scale(&(int(2) * &p2));
    let two_p2 = int(2) * p2;
    let two_q2 = int(2) * &k.q * &k.q;
    let den_left = k
        .theta
        .add_constant(&-two_p2)
        .scale(&(int(16) * powr(&k.p, 3) * powr(&k.q, 5)));
    let den_right = &k.theta.pow(4) * &k.theta.add_constant(&-two_q2);
    let value = numerator.div(&(&den_left + &den_right))?;
    Ok(&value * &geometric(&k.q, order))
}

/// The separate `a = 1` closed form
/// `pλ(1 - pqλ) / ((1 - qλ)[pq²λ² - (1+2p)qλ + 1])`.
pub fn max_gf_a1_closed_form(p: &BigRational, order: usize) -> Result<Series, SeriesError> {
    let q = check_p(p)?;
    let pq = p * &q;
    let numerator =
        Series::from_coeffs(pad(vec![BigRational::zero(), p.clone(), -(p * &pq)], order));
    let quadratic = Series::from_coeffs(pad(
        vec![
            BigRational::one(),
            -((BigRational::one() + int(2) * p) * &q),
            &pq * &q,
        ],
        order,
    ));
    let value = numerator.div(&quadratic)?;
    Ok(&value * &geometric(&q, order))
}

fn pad(mut coeffs: Vec<BigRational>, order: usize) -> Vec<BigRational> {
    coeffs.resize(order + 1, BigRational::zero());
    coeffs.truncate(order + 1);
    coeffs
}

/// Every independent route to `Σ_n λ^n P{M_2n = a}` that this crate knows.
#[derive(Debug, Clone)]
pub struct MaxGfPaths {
    pub a: usize,
    /// The bracket formula in `θ` and the two denominators `D_a`, `D_{a+1}`.
    pub bracket: Series,
    /// `pλ/(1-λ)` times the difference of consecutive diagonal series.
    pub relation: Series,
    /// Only for `a = 1`.
    pub a1_closed_form: Option<Series>,
}

impl MaxGfPaths {
    /// First degree at which two paths disagree, as a [`SeriesError::PathMismatch`].
    pub fn check(&self) -> Result<(), SeriesError> {
        let mut pairs = vec![("bracket", &self.bracket, "relation", &self.relation)];
        if let Some(closed) = &self.a1_closed_form {
            pairs.push(("bracket", &self.bracket, "a=1 closed form", closed));
        }
        for (left_name, left, right_name, right) in pairs {
            for (degree, (l, r)) in left.coeffs.iter().zip(&right.coeffs).enumerate() {
                if l != r {
                    return Err(SeriesError::PathMismatch {
                        a: self.a,
                        degree,
                        left_name,
                        left: l.clone(),
                        right_name,
                        right: r.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn max_gf_paths(p: &BigRational, a: usize, order: usize) -> Result<MaxGfPaths, SeriesError> {
    if a == 0 {
        return Err(SeriesError::LevelTooSmall { a });
    }
    let k = Kernel::new(p, order)?;
    Ok(MaxGfPaths {
        a,
        bracket: k.bracket(a)?,
        relation: k.relation(a)?,
        a1_closed_form: if a == 1 {
            Some(max_gf_a1_closed_form(p, order)?)
        } else {
            None
        },
    })
}

/// `Σ_n λ^n P{M_2n = a}` for `ℓ = 1`, after checking that every path agrees.
pub fn max_gf_coeffs(p: &BigRational, a: usize, order: usize) -> Result<Series, SeriesError> {
    let paths = max_gf_paths(p, a, order)?;
    paths.check()?;
    Ok(paths.bracket)
}

/// `Σ_n λ^n E(M_2n)` at `p = q = 1/2`, i.e.
/// `1/(1-λ) · Σ_{a≥1} 2(2θ)^a / (1 + (2θ)^{2a})`. The sum is finite through
/// degree `order` because `(2θ)^a` has valuation `a`.
pub fn em2n_gf(order: usize) -> Series {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let two_theta = theta_series(&half, order)
        .expect("p = 1/2 is valid")
        .scale(&int(2));
    let mut total = Series::zero(order);
    let mut power = Series::one(order);
    for _ in 1..=order {
        power = &power * &two_theta;
        let denominator = (&power * &power).add_constant(&BigRational::one());
        let term = power
            .scale(&int(2))
            .div(&denominator)
            .expect("constant term is 1");
        total = &total + &term;
    }
    &total * &geometric(&BigRational::one(), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Binomial-coefficient Catalan numbers, independent of the recurrence.
    fn catalan_binomial(m: u64) -> BigInt {
        let mut c = BigInt::one();
        for k in 0..m {
            c = c * BigInt::from(2 * m - k) / BigInt::from(k + 1);
        }
        c / BigInt::from(m + 1)
    }

    #[test]
    fn catalan_recurrence_matches_binomials() {
        let cs = catalan_numbers(20);
        for (m, c) in cs.iter().enumerate() {
            assert_eq!(*c, catalan_binomial(m as u64), "C_{m}");
        }
        assert_eq!(&cs[..6], &[1, 1, 2, 5, 14, 42].map(BigInt::from));
    }

    #[test]
    fn sqrt_series_squares_back() {
        let u = rat(2, 9);
        let s = sqrt_one_minus_4u(&u, 12);
        let squared = &s * &s;
        let mut expected = Series::zero(12);
        expected.coeffs[0] = rat(1, 1);
        expected.coeffs[1] = -(int(4) * &u);
        assert_eq!(squared, expected);
    }

    #[test]
    fn theta_leading_coefficients() {
        for p in [rat(1, 3), rat(2, 5), rat(1, 2)] {
            let q = rat(1, 1) - &p;
            let u = &p * &q;
            let th = theta_series(&p, 3).unwrap();
            assert_eq!(th.coeffs[0], rat(0, 1));
            assert_eq!(th.coeffs[1], int(2) * powr(&u, 2));
            assert_eq!(th.coeffs[2], int(4) * powr(&u, 3));
            assert_eq!(th.coeffs[3], int(10) * powr(&u, 4));
        }
        let th = theta_series(&rat(1, 2), 3).unwrap();
        assert_eq!(
            th.coeffs(),
            &[rat(0, 1), rat(1, 8), rat(1, 16), rat(5, 128)]
        );
    }

    #[test]
    fn theta_matches_catalan_closed_form() {
        let p = rat(1, 3);
        let u = &p * (rat(1, 1) - &p);
        let th = theta_series(&p, 30).unwrap();
        for m in 1..=30 {
            let expected =
                int(2) * BigRational::from_integer(catalan_binomial(m as u64)) * powr(&u, m + 1);
            assert_eq!(th.coeffs[m], expected, "λ^{m}");
        }
    }

    #[test]
    fn theta_solves_its_quadratic() {
        // λθ² - 2(1 - 2uλ)θ + 4u²λ = 0
        let p = rat(2, 5);
        let u = &p * (rat(1, 1) - &p);
        let n = 20;
        let th = theta_series(&p, n).unwrap();
        let lam = Series::lambda(n);
        let linear_factor = Series::from_coeffs(pad(vec![int(2), -(int(4) * &u)], n));
        let lhs = &(&(&lam * &th) * &th) - &(&linear_factor * &th);
        let lhs = &lhs + &Series::monomial(int(4) * &u * &u, 1, n);
        assert_eq!(lhs, Series::zero(n));
    }

    #[test]
    fn g00_is_geometric() {
        assert_eq!(
            g00_series(&rat(1, 3), 3).unwrap().coeffs(),
            &[rat(0, 1), rat(2, 3), rat(4, 9), rat(8, 27)]
        );
        assert_eq!(
            g00_series(&rat(1, 2), 2).unwrap().coeffs(),
            &[rat(0, 1), rat(1, 2), rat(1, 4)]
        );
    }

    #[test]
    fn g00_theta_form() {
        // qλ/(1-qλ) = 2qθ / (4pq(θ+pq) + θ(θ-2q))
        let p = rat(1, 3);
        let q = rat(2, 3);
        let n = 15;
        let th = theta_series(&p, n).unwrap();
        let den = &th.add_constant(&(&p * &q)).scale(&(int(4) * &p * &q))
            + &(&th * &th.add_constant(&-(int(2) * &q)));
        let via_theta = th.scale(&(int(2) * &q)).div(&den).unwrap();
        assert_eq!(via_theta, g00_series(&p, n).unwrap());
    }

    #[test]
    fn diagonal_low_order_terms() {
        let p = rat(1, 3);
        let g11 = g_aa_series(&p, 1, 6).unwrap();
        assert_eq!(g11.coeffs[0], rat(0, 1));
        assert_eq!(g11.coeffs[1], rat(1, 9));
        let g22 = g_aa_series(&p, 2, 6).unwrap();
        assert_eq!(g22.coeffs[0], rat(0, 1));
        assert_eq!(g22.coeffs[1], rat(0, 1));
        assert_eq!(g22.coeffs[2], rat(1, 81));
        for a in 1..=5 {
            let g = g_aa_series(&p, a, 8).unwrap();
            assert_eq!(g.valuation(), Some(a), "a={a}");
        }
    }

    #[test]
    fn g11_matches_eliminated_form() {
        for p in [rat(1, 3), rat(1, 2)] {
            assert_eq!(
                g_aa_series(&p, 1, 20).unwrap(),
                g11_eliminated_series(&p, 20).unwrap()
            );
        }
    }

    #[test]
    fn max_gf_spot_values() {
        let p = rat(1, 3);
        let a1 = max_gf_coeffs(&p, 1, 6).unwrap();
        assert_eq!(a1.coeffs[0], rat(0, 1));
        assert_eq!(a1.coeffs[1], rat(1, 3));
        assert_eq!(a1.coeffs[2], rat(14, 27));
        let a2 = max_gf_coeffs(&p, 2, 6).unwrap();
        assert_eq!(a2.coeffs[2], rat(1, 27));
    }

    #[test]
    fn a1_bracket_agrees_with_separate_closed_form() {
        for p in [rat(1, 3), rat(2, 5), rat(1, 2)] {
            let paths = max_gf_paths(&p, 1, 25).unwrap();
            assert_eq!(paths.bracket, paths.a1_closed_form.clone().unwrap());
            assert_eq!(paths.bracket, paths.relation);
        }
    }

    #[test]
    fn mismatch_is_reported() {
        let mut paths = max_gf_paths(&rat(1, 3), 2, 5).unwrap();
        paths.relation.coeffs[4] += rat(1, 1000);
        match paths.check() {
            Err(SeriesError::PathMismatch {
                a: 2, degree: 4, ..
            }) => {}
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn em2n_low_order() {
        let e = em2n_gf(6);
        assert_eq!(e.coeffs[0], rat(0, 1));
        assert_eq!(e.coeffs[1], rat(1, 2));
        assert_eq!(e.coeffs[2], rat(7, 8));
    }

    #[test]
    fn errors() {
        assert_eq!(
            g_aa_series(&rat(1, 3), 0, 5).unwrap_err(),
            SeriesError::LevelTooSmall { a: 0 }
        );
        assert!(matches!(
            theta_series(&rat(0, 1), 5),
            Err(SeriesError::InvalidProbability(_))
        ));
        let s = g00_series(&rat(1, 3), 4).unwrap();
        assert_eq!(
            s.coeff(5).unwrap_err(),
            SeriesError::BeyondOrder {
                requested: 5,
                order: 4
            }
        );
        assert_eq!(s.reciprocal().unwrap_err(), SeriesError::ZeroConstantTerm);
    }

    #[test]
    #[should_panic(expected = "series orders differ")]
    fn mixing_orders_panics() {
        let _ = &Series::one(3) + &Series::one(4);
    }

    #[test]
    fn reciprocal_round_trip() {
        let s = Series::from_coeffs(vec![rat(3, 2), rat(-1, 5), rat(7, 3), rat(0, 1), rat(1, 9)]);
        assert_eq!(&s * &s.reciprocal().unwrap(), Series::one(4));
    }
}
