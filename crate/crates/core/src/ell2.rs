//! Numeric checks of the `ℓ = 2` generating functions
//! `G(λ,x,a) = Σ_{n≥1} λ^n P{S_4n = x, M_4n = a}`.
//!
//! Three independent routes are provided: closed forms in `θ, ω`, the
//! kernel-root linear-system cascade (2×2 at `a = 1`, 3×3 at `a = 2`, 4×4 for
//! `a ≥ 3`), and truncated partial sums of the exact-recurrence DP.
//!
//! With `s = √λ`, the quartic kernel
//! `p⁴μ⁴ + 4p³qμ³ + 6p²q²μ² - μ²/λ + 4pq³μ + q⁴` has zeros
//! `θ/2p², 2q²/θ, ω/2p², 2q²/ω` where
//! `θ = (1 - 2pqs - √(1 - 4pqs))/s` and `ω = (-1 - 2pqs - √(1 + 4pqs))/s`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use thiserror::Error;

use crate::linalg::{solve_equilibrated, LinalgError};
use crate::params::{phase_of, Mode, Params};
use crate::walk::{dp_step, JointTable, WalkError};

/// Systems whose equilibrated condition number exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Residual tolerance for the quartic, relative to the largest term.
pub const QUARTIC_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Ell2Error {
    #[error("p={0} must lie in (0, 1/2]")]
    InvalidProbability(f64),
    #[error("λ={0} must be positive")]
    NonPositiveLambda(f64),
    #[error("λ={0} must lie in (0, 1) for the DP partial sum")]
    LambdaOutsideUnit(f64),
    #[error("branch violated: 4pq√λ = {0} ≥ 1")]
    Branch(f64),
    #[error("1 - q²λ vanishes at λ={0}")]
    Pole(f64),
    #[error("a_max must be at least 1")]
    EmptyCascade,
    #[error("numeric degeneracy at level a={a} (unknowns {unknowns:?}): {source}")]
    Degenerate {
        a: usize,
        unknowns: Vec<(usize, usize)>,
        #[source]
        source: LinalgError,
    },
    #[error("quartic residual {residual:.3e} at zero {index} exceeds tolerance")]
    Residual { index: usize, residual: f64 },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

fn check_p(p: f64) -> Result<f64, Ell2Error> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Ell2Error::InvalidProbability(p));
    }
    Ok(1.0 - p)
}

/// `p⁴μ⁴ + 4p³qμ³ + 6p²q²μ² - μ²/λ + 4pq³μ + q⁴`.
pub fn quartic(p: f64, lambda: f64, mu: f64) -> f64 {
    let q = 1.0 - p;
    let pm = p * mu;
    (pm + q).powi(4) - mu * mu / lambda
}

fn quartic_scale(p: f64, lambda: f64, mu: f64) -> f64 {
    let q = 1.0 - p;
    let pm = (p * mu).abs();
    (pm + q).powi(4) + mu * mu / lambda
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarticZeros {
    pub p: f64,
    pub lambda: f64,
    pub theta: f64,
    pub omega: f64,
    /// `[θ/2p², 2q²/θ, ω/2p², 2q²/ω]`.
    pub zeros: [f64; 4],
}

impl QuarticZeros {
    /// `|quartic(μ)| / scale` at each zero.
    pub fn relative_residuals(&self) -> [f64; 4] {
        self.zeros.map(|mu| {
            quartic(self.p, self.lambda, mu).abs() / quartic_scale(self.p, self.lambda, mu)
        })
    }
}

pub fn quartic_zeros(p: f64, lambda: f64) -> Result<QuarticZeros, Ell2Error> {
    let q = check_p(p)?;
    if !(lambda > 0.0) {
        return Err(Ell2Error::NonPositiveLambda(lambda));
    }
    let s = lambda.sqrt();
    let branch = 4.0 * p * q * s;
    if branch >= 1.0 {
        return Err(Ell2Error::Branch(branch));
    }
    // (1 - 2us - √(1-4us))/s rationalized, u = pq; avoids cancellation as λ → 0.
    let u = p * q;
    let theta = 4.0 * u * u * s / (1.0 - 2.0 * u * s + (1.0 - branch).sqrt());
    let omega = (-1.0 - 2.0 * p * q * s - (1.0 + branch).sqrt()) / s;
    let two_p2 = 2.0 * p * p;
    let two_q2 = 2.0 * q * q;
    let zeros = QuarticZeros {
        p,
        lambda,
        theta,
        omega,
        zeros: [
            theta / two_p2,
            two_q2 / theta,
            omega / two_p2,
            two_q2 / omega,
        ],
    };
    for (index, residual) in zeros.relative_residuals().into_iter().enumerate() {
        if residual > QUARTIC_RESIDUAL_TOL {
            return Err(Ell2Error::Residual { index, residual });
        }
    }
    Ok(zeros)
}

/// Entries with a known closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormEntry {
    /// `G(λ,0,1)`
    Zero1,
    /// `G(λ,1,1)`
    One1,
    /// `G(λ,0,2)`
    Zero2,
}

impl ClosedFormEntry {
    pub const ALL: [ClosedFormEntry; 3] = [Self::Zero1, Self::One1, Self::Zero2];

    pub fn index(self) -> (usize, usize) {
        match self {
            Self::Zero1 => (0, 1),
            Self::One1 => (1, 1),
            Self::Zero2 => (0, 2),
        }
    }
}

/// `Δ₁`, a degree-8 polynomial in `θ`.
pub fn delta1(p: f64, theta: f64) -> f64 {
    let q = 1.0 - p;
    let t = theta;
    let c = 8.0 * p * p - q - 3.0 * p * q;
    let e = 22.0 * p * p - q - 3.0 * p * q;
    256.0 * p.powi(8) * q.powi(8)
        + 1024.0 * p.powi(7) * q.powi(7) * t
        + 64.0 * p.powi(4) * q.powi(6) * e * t.powi(2)
        + 128.0 * p.powi(3) * q.powi(5) * c * t.powi(3)
        + 16.0 * p * p * q.powi(4) * (35.0 * p * p - 5.0 * q - 17.0 * p * q) * t.powi(4)
        + 32.0 * p * q.powi(3) * c * t.powi(5)
        + 4.0 * q * q * e * t.powi(6)
        + 16.0 * p * q * t.powi(7)
        + t.powi(8)
}

fn quad_minus(p: f64, q: f64, t: f64) -> f64 {
    t * t + 2.0 * (2.0 * p - 1.0) * q * t + 4.0 * p * p * q * q
}

fn quad_plus(p: f64, q: f64, t: f64) -> f64 {
    t * t + 2.0 * (2.0 * p + 1.0) * q * t + 4.0 * p * p * q * q
}

/// `Γ`, a polynomial in `θ` and `ω` (cubic in `ω`).
pub fn gamma(p: f64, theta: f64, omega: f64) -> f64 {
    let q = 1.0 - p;
    let (t, w) = (theta, omega);
    let pq = p * q;
    let quartic_t = t.powi(4)
        + 8.0 * pq * t.powi(3)
        + 36.0 * pq * pq * t * t
        + 32.0 * pq.powi(3) * t
        + 16.0 * pq.powi(4);
    let w0 = 4.0 * pq * pq * (t + 2.0 * pq).powi(4);
    let w1 = 4.0 * pq * (t + pq) * (t + 4.0 * pq) * (t * t - 2.0 * q * q * t + 4.0 * pq * pq);
    let w2 = t.powi(4) + 2.0 * (3.0 * p - 1.0) * q * t.powi(3)
        - 8.0 * p * (1.0 + q) * q * q * t * t
        + 8.0 * p * p * (3.0 * p - 1.0) * q.powi(3) * t
        + 16.0 * pq.powi(4);
    let w3 = -2.0 * (1.0 + p) * q * t * t;
    quad_minus(p, q, t)
        * quad_plus(p, q, t)
        * quartic_t
        * (w0 + w1 * w + w2 * w * w + w3 * w.powi(3))
}

/// `Δ₂` as `Σ c · p^i q^j θ^k ω^l` over the terms `(c, i, j, k, l)`.
const DELTA2_TERMS: &[(i32, i32, i32, i32, i32)] = &[
    (4096, 12, 12, 0, 0),
    (8192, 11, 11, 1, 0),
    (-2048, 10, 12, 1, 0),
    (7168, 10, 10, 2, 0),
    (-4096, 9, 11, 2, 0),
    (5120, 9, 9, 3, 0),
    (-3072, 8, 10, 3, 0),
    (3072, 8, 8, 4, 0),
    (-1536, 7, 9, 4, 0),
    (1280, 7, 7, 5, 0),
    (-768, 6, 8, 5, 0),
    (448, 6, 6, 6, 0),
    (-256, 5, 7, 6, 0),
    (128, 5, 5, 7, 0),
    (-32, 4, 6, 7, 0),
    (16, 4, 4, 8, 0),
    (-2048, 10, 12, 0, 1),
    (2048, 10, 10, 1, 1),
    (1024, 8, 11, 1, 1),
    (-5120, 9, 11, 1, 1),
    (6144, 9, 9, 2, 1),
    (2048, 7, 10, 2, 1),
    (-5632, 8, 10, 2, 1),
    (7424, 8, 8, 3, 1),
    (1536, 6, 9, 3, 1),
    (-4096, 7, 9, 3, 1),
    (4864, 7, 7, 4, 1),
    (768, 5, 8, 4, 1),
    (-2304, 6, 8, 4, 1),
    (1856, 6, 6, 5, 1),
    (384, 4, 7, 5, 1),
    (-1024, 5, 7, 5, 1),
    (384, 5, 5, 6, 1),
    (128, 3, 6, 6, 1),
    (-352, 4, 6, 6, 1),
    (32, 4, 4, 7, 1),
    (16, 2, 5, 7, 1),
    (-80, 3, 5, 7, 1),
    (-8, 2, 4, 8, 1),
    (1024, 10, 10, 0, 2),
    (4096, 9, 9, 1, 2),
    (-512, 8, 10, 1, 2),
    (6144, 8, 8, 2, 2),
    (-2048, 7, 9, 2, 2),
    (5120, 7, 7, 3, 2),
    (-2944, 6, 8, 3, 2),
    (2944, 6, 6, 4, 2),
    (-2048, 5, 7, 4, 2),
    (1280, 5, 5, 5, 2),
    (-736, 4, 6, 5, 2),
    (384, 4, 4, 6, 2),
    (-128, 3, 5, 6, 2),
    (64, 3, 3, 7, 2),
    (-8, 2, 4, 7, 2),
    (4, 2, 2, 8, 2),
    (1024, 9, 9, 0, 3),
    (3328, 8, 8, 1, 3),
    (3328, 7, 7, 2, 3),
    (-256, 5, 8, 2, 3),
    (-896, 6, 8, 2, 3),
    (1984, 6, 6, 3, 3),
    (-256, 4, 7, 3, 3),
    (-1280, 5, 7, 3, 3),
    (1088, 5, 5, 4, 3),
    (-64, 3, 6, 4, 3),
    (-768, 4, 6, 4, 3),
    (496, 4, 4, 5, 3),
    (-64, 2, 5, 5, 3),
    (-320, 3, 5, 5, 3),
    (208, 3, 3, 6, 3),
    (-16, 1, 4, 6, 3),
    (-56, 2, 4, 6, 3),
    (52, 2, 2, 7, 3),
    (4, 1, 1, 8, 3),
    (256, 8, 8, 0, 4),
    (768, 7, 7, 1, 4),
    (640, 6, 6, 2, 4),
    (-64, 4, 7, 2, 4),
    (-192, 5, 7, 2, 4),
    (320, 5, 5, 3, 4),
    (-64, 3, 6, 3, 4),
    (-224, 4, 6, 3, 4),
    (176, 4, 4, 4, 4),
    (-16, 2, 5, 4, 4),
    (-112, 3, 5, 4, 4),
    (80, 3, 3, 5, 4),
    (-16, 1, 4, 5, 4),
    (-56, 2, 4, 5, 4),
    (40, 2, 2, 6, 4),
    (-4, 0, 3, 6, 4),
    (-12, 1, 3, 6, 4),
    (12, 1, 1, 7, 4),
    (1, 0, 0, 8, 4),
];

pub fn delta2(p: f64, theta: f64, omega: f64) -> f64 {
    let q = 1.0 - p;
    DELTA2_TERMS
        .iter()
        .map(|&(c, i, j, k, l)| {
            f64::from(c) * p.powi(i) * q.powi(j) * theta.powi(k) * omega.powi(l)
        })
        .sum()
}

/// Closed-form value of `G(λ, x, a)` for the entries in [`ClosedFormEntry`].
pub fn closed_form_g(p: f64, lambda: f64, which: ClosedFormEntry) -> Result<f64, Ell2Error> {
    let zeros = quartic_zeros(p, lambda)?;
    let q = 1.0 - p;
    let pole = 1.0 - q * q * lambda;
    if pole == 0.0 {
        return Err(Ell2Error::Pole(lambda));
    }
    let (t, w) = (zeros.theta, zeros.omega);
    let d1 = delta1(p, t);
    let pq = p * q;
    Ok(match which {
        ClosedFormEntry::Zero1 => {
            8.0 * p * (1.0 + p) * q * q * (t + 2.0 * pq).powi(4) * t * t / (pole * d1)
        }
        ClosedFormEntry::One1 => {
            8.0 * p.powi(3) * q * quad_minus(p, q, t) * quad_plus(p, q, t) * t * t / (pole * d1)
        }
        ClosedFormEntry::Zero2 => {
            // The transcribed Γ/Δ₂ expression comes out as -G(λ,0,2) (its
            // coefficients are probabilities, so the sign is unambiguous).
            -4.0 * pq * pq * (t + 2.0 * pq).powi(2) * t * w * gamma(p, t, w)
                / (pole * d1 * delta2(p, t, w))
        }
    })
}

/// `G(λ,0,0) = q²λ/(1 - q²λ)`.
pub fn g00(p: f64, lambda: f64) -> f64 {
    let q2l = (1.0 - p).powi(2) * lambda;
    q2l / (1.0 - q2l)
}

/// One linear solve of the cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSolve {
    pub a: usize,
    pub unknowns: Vec<(usize, usize)>,
    /// Kernel zeros used as equation rows.
    pub mus: Vec<f64>,
    pub condition: f64,
    /// Entries `(x, a)` of this level the cascade cannot determine.
    pub undetermined: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    pub p: f64,
    pub lambda: f64,
    pub values: BTreeMap<(usize, usize), f64>,
    pub levels: Vec<LevelSolve>,
}

impl CascadeResult {
    pub fn get(&self, x: usize, a: usize) -> Option<f64> {
        self.values.get(&(x, a)).copied()
    }
}

/// Coefficient rows at a fixed `μ`. Each returns `(row over unknowns, rhs)`
/// for `0 = known_part + Σ coeff·unknown`.
struct Rows {
    p: f64,
    q: f64,
}

impl Rows {
    /// `p⁴μ² + 2p³qμ + p²q²`
    fn k(&self, mu: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        p.powi(4) * mu * mu + 2.0 * p.powi(3) * q * mu + p * p * q * q
    }

    /// `2p³qμ² + 4p²q²μ + 2pq³`
    fn m(&self, mu: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        2.0 * p.powi(3) * q * mu * mu + 4.0 * p * p * q * q * mu + 2.0 * p * q.powi(3)
    }

    /// `p⁴μ³ + 4p³qμ² + 5p²q²μ + 2pq³`
    fn diag(&self, mu: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        p.powi(4) * mu.powi(3)
            + 4.0 * p.powi(3) * q * mu * mu
            + 5.0 * p * p * q * q * mu
            + 2.0 * p * q.powi(3)
    }

    /// `-[(1+3p)q³μ² - 4pq³μ - q⁴]`
    fn zero_col(&self, mu: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        -((1.0 + 3.0 * p) * q.powi(3) * mu * mu - 4.0 * p * q.powi(3) * mu - q.powi(4))
    }

    /// Unknowns `G(0,1), G(1,1)`.
    fn level1(&self, mu: f64, g00: f64) -> (Vec<f64>, f64) {
        let (p, q) = (self.p, self.q);
        let known = -(2.0 * p.powi(3) * q * mu + 2.0 * p * (1.0 + p) * q * q) * mu * mu
            - (2.0 * p.powi(3) * q * mu + 4.0 * p * p * q * q + 2.0 * p * q.powi(3))
                * mu
                * mu
                * g00;
        let c01 =
            p.powi(4) * mu.powi(4) + 2.0 * p.powi(3) * q * mu.powi(3) + p * p * q * q * mu * mu
                - (1.0 + 3.0 * p) * q.powi(3) * mu * mu
                + 4.0 * p * q.powi(3) * mu
                + q.powi(4);
        let c11 = (p.powi(4) * mu.powi(4)
            + 4.0 * p.powi(3) * q * mu.powi(3)
            + 5.0 * p * p * q * q * mu * mu
            + 2.0 * p * q.powi(3) * mu
            - q.powi(4) * mu
            + q.powi(4))
            * mu;
        (vec![c01, c11], -known)
    }

    /// Unknowns `G(0,2), G(1,2), G(2,2)`.
    fn level2(&self, mu: f64, g: &BTreeMap<(usize, usize), f64>) -> (Vec<f64>, f64) {
        let (p, q) = (self.p, self.q);
        let k = self.k(mu);
        let mu2 = mu * mu;
        let known =
            -k * mu2 - k * mu2 * g[&(0, 0)] - k * mu2 * g[&(0, 1)] - self.m(mu) * mu2 * g[&(1, 1)];
        let c12 = (p.powi(4) * mu.powi(4) + 2.0 * p.powi(3) * q * mu.powi(3) + p * p * q * q * mu2
            - q.powi(4) * mu
            + q.powi(4))
            * mu;
        let c22 = self.diag(mu) * mu.powi(3);
        (vec![self.zero_col(mu), c12, c22], -known)
    }

    /// Unknowns `G(0,a), G(1,a), G(a-1,a), G(a,a)` for `a ≥ 3`.
    fn level(&self, a: usize, mu: f64, g: &BTreeMap<(usize, usize), f64>) -> (Vec<f64>, f64) {
        let q = self.q;
        let k = self.k(mu);
        let mu_a = mu.powi(a as i32);
        let known = -k * mu_a * g[&(a - 2, a - 2)]
            - k * mu_a * g[&(a - 2, a - 1)]
            - self.m(mu) * mu_a * g[&(a - 1, a - 1)];
        let row = vec![
            self.zero_col(mu),
            -q.powi(4) * (mu - 1.0) * mu,
            k * mu_a * mu,
            self.diag(mu) * mu_a * mu,
        ];
        (row, -known)
    }
}

/// Unknowns solved at level `a`.
pub fn level_unknowns(a: usize) -> Vec<(usize, usize)> {
    match a {
        0 => vec![],
        1 => vec![(0, 1), (1, 1)],
        2 => vec![(0, 2), (1, 2), (2, 2)],
        _ => vec![(0, a), (1, a), (a - 1, a), (a, a)],
    }
}

/// Solves the cascade for levels `1..=a_max`, feeding each level's results
/// into the next.
pub fn appendix_cascade(p: f64, lambda: f64, a_max: usize) -> Result<CascadeResult, Ell2Error> {
    if a_max == 0 {
        return Err(Ell2Error::EmptyCascade);
    }
    let zeros = quartic_zeros(p, lambda)?;
    let rows = Rows { p, q: 1.0 - p };
    let mut values = BTreeMap::new();
    values.insert((0, 0), g00(p, lambda));
    let mut levels = Vec::with_capacity(a_max);
    for a in 1..=a_max {
        let unknowns = level_unknowns(a);
        let mus = zeros.zeros[..unknowns.len()].to_vec();
        let mut matrix = DMatrix::<f64>::zeros(mus.len(), unknowns.len());
        let mut rhs = DVector::<f64>::zeros(mus.len());
        for (i, &mu) in mus.iter().enumerate() {
            let (row, b) = match a {
                1 => rows.level1(mu, values[&(0, 0)]),
                2 => rows.level2(mu, &values),
                _ => rows.level(a, mu, &values),
            };
            matrix.row_mut(i).copy_from_slice(&row);
            rhs[i] = b;
        }
        let solved = solve_equilibrated(matrix, rhs, CONDITION_LIMIT).map_err(|source| {
            Ell2Error::Degenerate {
                a,
                unknowns: unknowns.clone(),
                source,
            }
        })?;
        for (slot, value) in unknowns.iter().zip(solved.solution.iter()) {
            values.insert(*slot, *value);
        }
        let undetermined = (0..=a)
            .map(|x| (x, a))
            .filter(|e| !unknowns.contains(e))
            .collect();
        levels.push(LevelSolve {
            a,
            unknowns,
            mus,
            condition: solved.condition,
            undetermined,
        });
    }
    Ok(CascadeResult {
        p,
        lambda,
        values,
        levels,
    })
}

/// `Σ_{n=1..N} λ^n F_{4n}(x, a)` from the `ℓ = 2` DP and the tail bound
/// `λ^{N+1}/(1 - λ)`.
pub fn dp_partial_sum(
    p: f64,
    lambda: f64,
    x: usize,
    a: usize,
    terms: usize,
) -> Result<(f64, f64), Ell2Error> {
    let sums = dp_partial_sums(p, lambda, &[(x, a)], terms)?;
    Ok((sums.values[0], sums.tail_bound))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialSums {
    pub entries: Vec<(usize, usize)>,
    pub values: Vec<f64>,
    pub tail_bound: f64,
}

/// [`dp_partial_sum`] for several entries from one DP pass.
pub fn dp_partial_sums(
    p: f64,
    lambda: f64,
    entries: &[(usize, usize)],
    terms: usize,
) -> Result<PartialSums, Ell2Error> {
    check_p(p)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Ell2Error::LambdaOutsideUnit(lambda));
    }
    let p_exact = BigRational::from_float(p).ok_or(Ell2Error::InvalidProbability(p))?;
    let params =
        Params::new(p_exact, 2, Mode::Float).map_err(|_| Ell2Error::InvalidProbability(p))?;
    let mut table = JointTable::<f64>::initial(None);
    let mut values = vec![0.0; entries.len()];
    let mut weight = 1.0;
    for n in 1..=terms {
        for i in 4 * (n - 1) + 1..=4 * n {
            table = dp_step(&table, phase_of(i, 2), &params)?;
        }
        weight *= lambda;
        for (value, &(x, a)) in values.iter_mut().zip(entries) {
            *value += weight * table.get(x, a);
        }
    }
    let tail_bound = lambda.powi(terms as i32 + 1) / (1.0 - lambda);
    Ok(PartialSums {
        entries: entries.to_vec(),
        values,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: [(f64, f64); 3] = [(0.3, 0.25), (0.5, 0.5), (0.4, 0.1)];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs())
    }

    #[test]
    fn theta_omega_values() {
        let z = quartic_zeros(0.3, 0.25).unwrap();
        assert!((z.theta - 0.056846).abs() < 1e-6, "{}", z.theta);
        assert!((z.omega + 4.803276).abs() < 1e-6, "{}", z.omega);
        let z = quartic_zeros(0.5, 0.25).unwrap();
        assert!((z.theta - (1.0 - 0.25 - 0.5f64.sqrt()) / 0.5).abs() < 1e-15);
        assert!((z.theta - 0.085786).abs() < 1e-6);
    }

    #[test]
    fn zeros_annihilate_and_factor_the_quartic() {
        for (p, lambda) in GRID.into_iter().chain([(0.2, 0.9), (0.45, 0.01)]) {
            let z = quartic_zeros(p, lambda).unwrap();
            for r in z.relative_residuals() {
                assert!(r < 1e-10);
            }
            let q = 1.0 - p;
            let sum: f64 = z.zeros.iter().sum();
            let product: f64 = z.zeros.iter().product();
            assert!(rel(sum, -4.0 * q / p) < 1e-10, "sum of zeros at p={p}");
            assert!(
                rel(product, (q / p).powi(4)) < 1e-10,
                "product of zeros at p={p}"
            );
            // e₂ = (6p²q² - 1/λ)/p⁴
            let zs = z.zeros;
            let mut e2 = 0.0;
            for i in 0..4 {
                for j in i + 1..4 {
                    e2 += zs[i] * zs[j];
                }
            }
            assert!(rel(e2, (6.0 * p * p * q * q - 1.0 / lambda) / p.powi(4)) < 1e-10);
        }
    }

    #[test]
    fn branch_and_domain_errors() {
        assert!(matches!(quartic_zeros(0.5, 1.0), Err(Ell2Error::Branch(_))));
        assert!(matches!(
            quartic_zeros(0.5, 0.0),
            Err(Ell2Error::NonPositiveLambda(_))
        ));
        assert!(matches!(
            quartic_zeros(0.6, 0.1),
            Err(Ell2Error::InvalidProbability(_))
        ));
        assert!(matches!(
            closed_form_g(0.5, 1.5, ClosedFormEntry::Zero1),
            Err(Ell2Error::Branch(_))
        ));
        assert!(matches!(
            appendix_cascade(0.3, 0.25, 0),
            Err(Ell2Error::EmptyCascade)
        ));
        assert!(matches!(
            dp_partial_sum(0.3, 1.0, 0, 1, 5),
            Err(Ell2Error::LambdaOutsideUnit(_))
        ));
    }

    #[test]
    fn closed_form_leading_behaviour() {
        let v = closed_form_g(0.3, 0.25, ClosedFormEntry::Zero1).unwrap();
        assert!(v > 0.09555);
        for which in ClosedFormEntry::ALL {
            let tiny = closed_form_g(0.3, 1e-10, which).unwrap();
            assert!(tiny.abs() < 1e-9, "{which:?} at λ→0: {tiny}");
        }
    }

    #[test]
    fn partial_sum_first_term_and_support() {
        let (v, tail) = dp_partial_sum(0.3, 0.25, 0, 1, 1).unwrap();
        assert!((v - 0.25 * 2.0 * 0.3 * 1.3 * 0.49).abs() < 1e-15);
        assert!((tail - 0.25f64.powi(2) / 0.75).abs() < 1e-15);
        // Level 2N+1 is unreachable within 4N steps.
        let (v, _) = dp_partial_sum(0.3, 0.25, 0, 7, 3).unwrap();
        assert_eq!(v, 0.0);
        let (_, tail) = dp_partial_sum(0.3, 0.25, 0, 1, 60).unwrap();
        assert!((tail - 2.0f64.powi(-122) / 0.75).abs() < 1e-50);
        assert!(tail < 3e-37);
    }

    #[test]
    fn closed_forms_match_dp_and_cascade() {
        for (p, lambda) in GRID {
            let entries: Vec<_> = ClosedFormEntry::ALL.iter().map(|e| e.index()).collect();
            let sums = dp_partial_sums(p, lambda, &entries, 60).unwrap();
            let cascade = appendix_cascade(p, lambda, 2).unwrap();
            for (which, dp) in ClosedFormEntry::ALL.into_iter().zip(&sums.values) {
                let closed = closed_form_g(p, lambda, which).unwrap();
                let (x, a) = which.index();
                assert!(
                    (closed - dp).abs() <= sums.tail_bound + 1e-8,
                    "{which:?} at ({p},{lambda})"
                );
                assert!(
                    rel(closed, cascade.get(x, a).unwrap()) < 1e-8,
                    "{which:?} at ({p},{lambda})"
                );
            }
        }
    }

    #[test]
    fn cascade_matches_dp_through_level_five() {
        for (p, lambda) in GRID {
            let cascade = appendix_cascade(p, lambda, 5).unwrap();
            let entries: Vec<_> = cascade.values.keys().copied().collect();
            let sums = dp_partial_sums(p, lambda, &entries, 60).unwrap();
            for (&(x, a), dp) in entries.iter().zip(&sums.values) {
                let value = cascade.get(x, a).unwrap();
                assert!(
                    (value - dp).abs() <= sums.tail_bound + 1e-8,
                    "({x},{a}) at ({p},{lambda})"
                );
                assert!((0.0..=lambda / (1.0 - lambda)).contains(&value) || value.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cascade_bookkeeping() {
        let c = appendix_cascade(0.3, 0.25, 6).unwrap();
        assert!(c.get(2, 4).is_none());
        assert!(c.get(3, 4).is_some());
        assert_eq!(c.levels[3].undetermined, vec![(2, 4)]);
        assert_eq!(c.levels[4].undetermined, vec![(2, 5), (3, 5)]);
        assert_eq!(c.levels[5].undetermined, vec![(2, 6), (3, 6), (4, 6)]);
        assert!(c.levels[..3].iter().all(|l| l.undetermined.is_empty()));
        // Every known needed at level a was produced by an earlier level.
        for level in &c.levels[2..] {
            let a = level.a;
            for need in [(a - 2, a - 2), (a - 2, a - 1), (a - 1, a - 1)] {
                assert!(
                    c.levels
                        .iter()
                        .take(a - 1)
                        .any(|l| l.unknowns.contains(&need)),
                    "{need:?}"
                );
            }
        }
        for level in &c.levels {
            assert!(level.condition >= 1.0 && level.condition < CONDITION_LIMIT);
            assert_eq!(level.mus.len(), level.unknowns.len());
        }
    }
}
