//! Limiting distribution of the queue length `S_n` for `p < q`.
//!
//! The `ℓ` roots of `z^ℓ = (q + pz)^{2ℓ}` in the closed unit disk (one of
//! them is `z = 1`) determine weights `w_k` through a Vandermonde system in
//! `r_k = z_k/(q + p z_k)`. The probability generating function is
//!
//! ```text
//! H(z) = q(z - 1) Σ_k w_k z^k (q + pz)^{ℓ-1-k} / (z^ℓ - (q + pz)^{2ℓ})
//! ```
//!
//! Numerator and denominator share the disk roots; both are deflated by them
//! so the stored ratio has poles only outside the disk and its Taylor
//! coefficients (the pmf) can be read off by series division.
//!
//! The limit is taken along `n ≡ 0 (mod 2ℓ)`, i.e. at the end of a cycle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{solve_equilibrated, LinalgError};
use crate::params::{Mode, Params};
use crate::walk::{joint_dist, s_marginal, DistVector, Marginal, WalkError};

pub const DISK_TOL: f64 = 1e-9;
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
pub const NORMALIZATION_TOL: f64 = 1e-8;
pub const IMAGINARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationaryError {
    #[error("stationary distribution requires p<q (got p={0})")]
    NotStable(f64),
    #[error("p={0} must be positive")]
    InvalidProbability(f64),
    #[error("ell must be at least 1")]
    ZeroEll,
    #[error("expected {expected} roots in the closed unit disk, found {found}")]
    RootCount { expected: usize, found: usize },
    #[error("root {root} has residual {residual:.3e}")]
    RootResidual { root: Complex64, residual: f64 },
    #[error("roots {0} and {1} nearly coincide")]
    CoincidentRoots(Complex64, Complex64),
    #[error("weight system: {0}")]
    Weights(#[from] LinalgError),
    #[error("deflation by disk root {root} left remainder {remainder:.3e}")]
    Deflation { root: Complex64, remainder: f64 },
    #[error("H(1) = {0} is not 1")]
    Normalization(Complex64),
    #[error("pmf coefficient {index} has imaginary part {imag:.3e}")]
    ImaginaryResidue { index: usize, imag: f64 },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

fn check(p: f64, ell: usize) -> Result<f64, StationaryError> {
    if ell == 0 {
        return Err(StationaryError::ZeroEll);
    }
    if !(p > 0.0) {
        return Err(StationaryError::InvalidProbability(p));
    }
    let q = 1.0 - p;
    if !(p < q) {
        return Err(StationaryError::NotStable(p));
    }
    Ok(q)
}

/// Polynomials are coefficient vectors in ascending powers.
fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(base: &[Complex64], k: usize) -> Vec<Complex64> {
    (0..k).fold(vec![Complex64::new(1.0, 0.0)], |acc, _| {
        poly_mul(&acc, base)
    })
}

fn poly_eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, v| acc * z + v)
}

fn poly_derivative(c: &[Complex64]) -> Vec<Complex64> {
    if c.len() <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| v * i as f64)
        .collect()
}

/// Divides by `(z - root)`; returns the quotient and the remainder.
fn deflate(c: &[Complex64], root: Complex64) -> (Vec<Complex64>, Complex64) {
    let n = c.len() - 1;
    let mut quotient = vec![Complex64::new(0.0, 0.0); n];
    let mut carry = c[n];
    for k in (0..n).rev() {
        quotient[k] = carry;
        carry = c[k] + root * carry;
    }
    (quotient, carry)
}

/// `z^ℓ - (q + pz)^{2ℓ}` in ascending coefficients.
fn kernel_poly(p: f64, ell: usize) -> Vec<Complex64> {
    let q = 1.0 - p;
    let linear = [Complex64::new(q, 0.0), Complex64::new(p, 0.0)];
    let mut c: Vec<Complex64> = poly_pow(&linear, 2 * ell).into_iter().map(|v| -v).collect();
    c[ell] += 1.0;
    c
}

fn residual(p: f64, ell: usize, z: Complex64) -> f64 {
    let q = 1.0 - p;
    (z.powu(ell as u32) - (q + p * z).powu(2 * ell as u32)).norm()
}

/// All `2ℓ` roots of `(q + pz)^{2ℓ} - z^ℓ`, from companion-matrix
/// eigenvalues polished by Newton's method.
pub fn all_kernel_roots(p: f64, ell: usize) -> Result<Vec<Complex64>, StationaryError> {
    check(p, ell)?;
    let coeffs = kernel_poly(p, ell);
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -(coeffs[i] / lead).re;
    }
    let derivative = poly_derivative(&coeffs);
    let roots = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| {
            let mut z = *z;
            for _ in 0..50 {
                let slope = poly_eval(&derivative, z);
                if slope.norm() == 0.0 {
                    break;
                }
                let step = poly_eval(&coeffs, z) / slope;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect();
    Ok(roots)
}

/// The `ℓ` roots in the closed unit disk, `z_0 = 1` first, the rest by
/// increasing modulus.
pub fn char_roots(p: f64, ell: usize) -> Result<Vec<Complex64>, StationaryError> {
    let mut candidates = all_kernel_roots(p, ell)?;
    // z = 1 is always a simple root; replace its numeric copy by the exact value.
    let one = Complex64::new(1.0, 0.0);
    let nearest = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - one).norm().total_cmp(&(b.1 - one).norm()))
        .map(|(i, _)| i)
        .expect("degree 2ℓ ≥ 2");
    candidates.remove(nearest);
    let mut inside: Vec<Complex64> = candidates
        .into_iter()
        .filter(|z| z.norm() <= 1.0 + DISK_TOL)
        .collect();
    inside.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.im.total_cmp(&b.im)));
    let mut roots = vec![one];
    roots.extend(inside);
    if roots.len() != ell {
        return Err(StationaryError::RootCount {
            expected: ell,
            found: roots.len(),
        });
    }
    for &z in &roots {
        let r = residual(p, ell, z);
        if r > ROOT_RESIDUAL_TOL {
            return Err(StationaryError::RootResidual {
                root: z,
                residual: r,
            });
        }
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() < 1e-8 {
                return Err(StationaryError::CoincidentRoots(roots[i], roots[j]));
            }
        }
    }
    Ok(roots)
}

/// Solves `Σ_j w_j r_k^j = ((q-p)ℓ/q)·[k = 0]` with `r_k = z_k/(q + p z_k)`.
pub fn solve_weights(
    p: f64,
    ell: usize,
    roots: &[Complex64],
) -> Result<Vec<Complex64>, StationaryError> {
    let q = check(p, ell)?;
    if roots.len() != ell {
        return Err(StationaryError::RootCount {
            expected: ell,
            found: roots.len(),
        });
    }
    let ratios: Vec<Complex64> = roots.iter().map(|z| z / (q + p * z)).collect();
    let matrix = DMatrix::from_fn(ell, ell, |k, j| ratios[k].powu(j as u32));
    let mut rhs = DVector::from_element(ell, Complex64::new(0.0, 0.0));
    rhs[0] = Complex64::new((q - p) * ell as f64 / q, 0.0);
    let solved = solve_equilibrated(matrix, rhs, 1e12)?;
    Ok(solved.solution.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryModel {
    pub p: f64,
    pub ell: usize,
    pub roots: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Numerator of `H` after removing the disk roots (ascending powers).
    pub pgf_num: Vec<Complex64>,
    /// Denominator of `H` after removing the disk roots (ascending powers).
    pub pgf_den: Vec<Complex64>,
}

impl StationaryModel {
    pub fn pgf(&self, z: Complex64) -> Complex64 {
        poly_eval(&self.pgf_num, z) / poly_eval(&self.pgf_den, z)
    }
}

/// `H(z)` as a ratio of polynomials with the common disk roots removed.
pub fn build_pgf(
    p: f64,
    ell: usize,
    roots: &[Complex64],
    weights: &[Complex64],
) -> Result<StationaryModel, StationaryError> {
    let q = check(p, ell)?;
    let linear = [Complex64::new(q, 0.0), Complex64::new(p, 0.0)];
    let mut sum = vec![Complex64::new(0.0, 0.0); ell];
    for (k, w) in weights.iter().enumerate() {
        let mut shift = vec![Complex64::new(0.0, 0.0); k];
        shift.push(*w);
        let term = poly_mul(&shift, &poly_pow(&linear, ell - 1 - k));
        for (slot, v) in sum.iter_mut().zip(term) {
            *slot += v;
        }
    }
    let mut numerator = poly_mul(&[Complex64::new(-q, 0.0), Complex64::new(q, 0.0)], &sum);
    let mut denominator = kernel_poly(p, ell);
    // Forward deflation is stable for the smallest roots; do them first.
    let mut order: Vec<&Complex64> = roots.iter().collect();
    order.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    for &root in order {
        for poly in [&mut numerator, &mut denominator] {
            let scale = poly.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
            let (quotient, remainder) = deflate(poly, root);
            if remainder.norm() > 1e-9 * scale {
                return Err(StationaryError::Deflation {
                    root,
                    remainder: remainder.norm(),
                });
            }
            *poly = quotient;
        }
    }
    let model = StationaryModel {
        p,
        ell,
        roots: roots.to_vec(),
        weights: weights.to_vec(),
        pgf_num: numerator,
        pgf_den: denominator,
    };
    let at_one = model.pgf(Complex64::new(1.0, 0.0));
    if (at_one - 1.0).norm() > NORMALIZATION_TOL {
        return Err(StationaryError::Normalization(at_one));
    }
    Ok(model)
}

/// Roots, weights and `H` in one call.
pub fn stationary_model(p: f64, ell: usize) -> Result<StationaryModel, StationaryError> {
    let roots = char_roots(p, ell)?;
    let weights = solve_weights(p, ell, &roots)?;
    build_pgf(p, ell, &roots, &weights)
}

/// `P{S = x}` for `x = 0..=x_max`; `lost_mass` holds the tail beyond `x_max`.
pub fn stationary_pmf(
    model: &StationaryModel,
    x_max: usize,
) -> Result<DistVector<f64>, StationaryError> {
    let den = &model.pgf_den;
    let inv_head = 1.0 / den[0];
    let mut coeffs: Vec<Complex64> = Vec::with_capacity(x_max + 1);
    for n in 0..=x_max {
        let mut acc = model.pgf_num.get(n).copied().unwrap_or_default();
        for k in 1..den.len().min(n + 1) {
            acc -= den[k] * coeffs[n - k];
        }
        coeffs.push(acc * inv_head);
    }
    let mut values = Vec::with_capacity(coeffs.len());
    for (index, c) in coeffs.iter().enumerate() {
        if c.im.abs() > IMAGINARY_TOL {
            return Err(StationaryError::ImaginaryResidue { index, imag: c.im });
        }
        values.push(c.re);
    }
    let total: f64 = values.iter().sum();
    Ok(DistVector {
        values,
        label: Marginal::State,
        lost_mass: (1.0 - total).max(0.0),
    })
}

/// `(H'(1), H''(1))`: the limiting mean and `E[S(S-1)]`.
pub fn stationary_moments(model: &StationaryModel) -> (f64, f64) {
    let one = Complex64::new(1.0, 0.0);
    let n0 = poly_eval(&model.pgf_num, one);
    let d0 = poly_eval(&model.pgf_den, one);
    let num1 = poly_derivative(&model.pgf_num);
    let den1 = poly_derivative(&model.pgf_den);
    let n1 = poly_eval(&num1, one);
    let d1 = poly_eval(&den1, one);
    let n2 = poly_eval(&poly_derivative(&num1), one);
    let d2 = poly_eval(&poly_derivative(&den1), one);
    let first = (n1 * d0 - n0 * d1) / (d0 * d0);
    let second = (n2 * d0 - n0 * d2) / (d0 * d0) - 2.0 * d1 * (n1 * d0 - n0 * d1) / (d0 * d0 * d0);
    (first.re, second.re)
}

/// Total-variation distance between the DP marginal at `n_base + offset`
/// and the limiting law, for every offset within one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistance {
    pub n: usize,
    pub offset: usize,
    pub total_variation: f64,
}

pub fn phase_distances(
    model: &StationaryModel,
    params: &Params,
    n_base: usize,
) -> Result<Vec<PhaseDistance>, StationaryError> {
    let params = params.with_mode(Mode::Float);
    let cycle = 2 * model.ell;
    (0..cycle)
        .map(|offset| {
            let n = n_base + offset;
            let dp = s_marginal(&joint_dist::<f64>(&params, n, None)?);
            let total_variation = total_variation(&dp, model)?;
            Ok(PhaseDistance {
                n,
                offset,
                total_variation,
            })
        })
        .collect()
}

/// `½ Σ_x |P_dp(x) - P_∞(x)|`, with both truncated tails counted in full.
pub fn total_variation(
    dp: &DistVector<f64>,
    model: &StationaryModel,
) -> Result<f64, StationaryError> {
    let limit = stationary_pmf(model, dp.values.len().saturating_sub(1))?;
    let body: f64 = dp
        .values
        .iter()
        .zip(&limit.values)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * (body + dp.lost_mass + limit.lost_mass))
}

/// Closed forms for `ℓ = 1` and `ℓ = 2`, kept separate from the general
/// pipeline so they can serve as checks on it.
pub mod closed_form {
    fn root(p: f64) -> f64 {
        (1.0 + 4.0 * p * (1.0 - p)).sqrt()
    }

    /// `(q-p) p^{2x} / q^{2x+2}`.
    pub fn ell1_pmf(p: f64, x: usize) -> f64 {
        let q = 1.0 - p;
        (q - p) * (p / q).powi(2 * x as i32) / (q * q)
    }

    /// `(q-p) / (q² - p²z)`.
    pub fn ell1_pgf(p: f64, z: f64) -> f64 {
        let q = 1.0 - p;
        (q - p) / (q * q - p * p * z)
    }

    pub fn ell1_weight(p: f64) -> f64 {
        let q = 1.0 - p;
        (q - p) / q
    }

    pub fn ell1_mean(p: f64) -> f64 {
        p * p / (1.0 - 2.0 * p)
    }

    pub fn ell1_second_factorial(p: f64) -> f64 {
        let d = 1.0 - 2.0 * p;
        2.0 * p.powi(4) / (d * d)
    }

    /// `(w_0, w_1)` for `ℓ = 2`.
    pub fn ell2_weights(p: f64) -> (f64, f64) {
        let q = 1.0 - p;
        let d = q - p;
        let w0 = 4.0 * d / (2.0 + d + root(p));
        let w1 = 4.0 * p * d / (q * (-d + root(p)));
        (w0, w1)
    }

    /// The nonunit disk root for `ℓ = 2`, from the quadratic factor
    /// `q² + (1+2pq)z + p²z²`.
    pub fn ell2_root(p: f64) -> f64 {
        let q = 1.0 - p;
        (-(1.0 + 2.0 * p * q) + root(p)) / (2.0 * p * p)
    }

    pub fn ell2_pgf(p: f64, z: f64) -> f64 {
        let q = 1.0 - p;
        let d = q - p;
        let s = root(p);
        let lead = 4.0 * q * d * (q + p * z)
            / ((q * q - p * p * z) * (q * q + (1.0 + 2.0 * p * q) * z + p * p * z * z));
        lead * (1.0 / (2.0 + d + s) + p * z / (q * (q + p * z) * (-d + s)))
    }

    pub fn ell2_p0(p: f64) -> f64 {
        let q = 1.0 - p;
        4.0 * (q - p) / (q * q * (1.0 + 2.0 * q + root(p)))
    }

    pub fn ell2_p1(p: f64) -> f64 {
        let q = 1.0 - p;
        let d = q - p;
        let s = root(p);
        4.0 * d * (1.0 + 2.0 * p * q * d - (d + 2.0 * p * q) * s)
            / (q.powi(4) * (-d + s) * (1.0 + 2.0 * q + s))
    }

    pub fn ell2_mean(p: f64) -> f64 {
        let q = 1.0 - p;
        let d = q - p;
        0.25 * (-4.0 + 2.0 * d + 1.0 / d + root(p))
    }
}

#[cfg(test)]
mod tests {
    use super::closed_form::*;
    use super::*;
    use crate::params::validate_params;

    const THIRD: f64 = 1.0 / 3.0;

    #[test]
    fn roots_ell1_and_ell2() {
        assert_eq!(
            char_roots(THIRD, 1).unwrap(),
            vec![Complex64::new(1.0, 0.0)]
        );
        let r = char_roots(THIRD, 2).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], Complex64::new(1.0, 0.0));
        assert!((r[1].re - ell2_root(THIRD)).abs() < 1e-13);
        assert!((r[1].re + 0.3153415616).abs() < 1e-9);
        assert!(r[1].im.abs() < 1e-13);
    }

    #[test]
    fn roots_satisfy_kernel_for_many_ell() {
        for p in [0.1, THIRD, 0.4, 0.45] {
            for ell in 1..=6 {
                let roots = char_roots(p, ell).unwrap();
                assert_eq!(roots.len(), ell);
                for z in roots {
                    assert!(z.norm() <= 1.0 + DISK_TOL);
                    assert!(residual(p, ell, z) <= ROOT_RESIDUAL_TOL);
                }
                let all = all_kernel_roots(p, ell).unwrap();
                assert_eq!(all.len(), 2 * ell);
            }
        }
    }

    #[test]
    fn rejects_p_equal_q() {
        assert_eq!(
            char_roots(0.5, 2).unwrap_err(),
            StationaryError::NotStable(0.5)
        );
        assert!(matches!(
            char_roots(0.0, 1),
            Err(StationaryError::InvalidProbability(_))
        ));
        assert!(matches!(char_roots(0.3, 0), Err(StationaryError::ZeroEll)));
    }

    #[test]
    fn weights() {
        let w = solve_weights(THIRD, 1, &char_roots(THIRD, 1).unwrap()).unwrap();
        assert!((w[0].re - 0.5).abs() < 1e-15);
        let w = solve_weights(THIRD, 2, &char_roots(THIRD, 2).unwrap()).unwrap();
        let (w0, w1) = ell2_weights(THIRD);
        assert!((w[0].re - w0).abs() < 1e-12 && (w[1].re - w1).abs() < 1e-12);
        assert!((w0 - 0.359612).abs() < 1e-6 && (w1 - 0.640389).abs() < 1e-6);
        for ell in 1..=6 {
            let p = 0.3;
            let w = solve_weights(p, ell, &char_roots(p, ell).unwrap()).unwrap();
            let sum: Complex64 = w.iter().sum();
            assert!((sum - (1.0 - 2.0 * p) * ell as f64 / (1.0 - p)).norm() < 1e-12);
        }
    }

    #[test]
    fn pgf_matches_closed_forms() {
        let m1 = stationary_model(THIRD, 1).unwrap();
        let m2 = stationary_model(THIRD, 2).unwrap();
        for z in [0.0, 0.5, -0.5, 1.0] {
            let c = Complex64::new(z, 0.0);
            assert!((m1.pgf(c).re - 3.0 / (4.0 - z)).abs() < 1e-13);
            assert!((m1.pgf(c).re - ell1_pgf(THIRD, z)).abs() < 1e-13);
            assert!((m2.pgf(c) - ell2_pgf(THIRD, z)).norm() < 1e-10, "z={z}");
        }
        assert!((m2.pgf(Complex64::new(1.0, 0.0)) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn pmf_ell1_geometric() {
        let m = stationary_model(THIRD, 1).unwrap();
        let pmf = stationary_pmf(&m, 2).unwrap();
        for (got, want) in pmf.values.iter().zip([0.75, 0.1875, 0.046875]) {
            assert!((got - want).abs() < 1e-14);
        }
        for p in [THIRD, 0.4] {
            let m = stationary_model(p, 1).unwrap();
            let pmf = stationary_pmf(&m, 30).unwrap();
            for (x, v) in pmf.values.iter().enumerate() {
                assert!((v - ell1_pmf(p, x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pmf_ell2_printed_values() {
        let m = stationary_model(THIRD, 2).unwrap();
        let pmf = stationary_pmf(&m, 3).unwrap();
        assert!((pmf.values[0] - ell2_p0(THIRD)).abs() < 1e-10);
        assert!((pmf.values[0] - 0.8091265428).abs() < 1e-9);
        assert!((pmf.values[1] - ell2_p1(THIRD)).abs() < 1e-10);
    }

    #[test]
    fn pmf_is_a_distribution_up_to_ell_six() {
        for p in [0.2, THIRD, 0.4] {
            for ell in 1..=6 {
                let m = stationary_model(p, ell).unwrap();
                let pmf = stationary_pmf(&m, 400).unwrap();
                assert!(pmf.values.iter().all(|v| *v >= -1e-12), "p={p} ell={ell}");
                let total: f64 = pmf.values.iter().sum();
                assert!((total - 1.0).abs() < 1e-10, "p={p} ell={ell} total={total}");
            }
        }
    }

    #[test]
    fn moments() {
        let (mean, fact2) = stationary_moments(&stationary_model(THIRD, 1).unwrap());
        assert!((mean - THIRD).abs() < 1e-12);
        assert!((fact2 - 2.0 / 9.0).abs() < 1e-12);
        assert!((ell1_mean(THIRD) - THIRD).abs() < 1e-15);
        assert!((ell1_second_factorial(THIRD) - 2.0 / 9.0).abs() < 1e-15);
        let (mean2, _) = stationary_moments(&stationary_model(THIRD, 2).unwrap());
        assert!((mean2 - ell2_mean(THIRD)).abs() < 1e-10);
        assert!((mean2 - 0.260259).abs() < 1e-6);
        assert!(mean2 < mean);
    }

    #[test]
    fn moments_match_pmf_sums() {
        for ell in 1..=4 {
            let m = stationary_model(0.35, ell).unwrap();
            let pmf = stationary_pmf(&m, 600).unwrap();
            let mean: f64 = pmf
                .values
                .iter()
                .enumerate()
                .map(|(x, v)| x as f64 * v)
                .sum();
            let fact2: f64 = pmf
                .values
                .iter()
                .enumerate()
                .map(|(x, v)| (x * x.saturating_sub(1)) as f64 * v)
                .sum();
            let (m1, m2) = stationary_moments(&m);
            assert!((m1 - mean).abs() < 1e-9, "ell={ell}");
            assert!((m2 - fact2).abs() < 1e-8, "ell={ell}");
        }
    }

    #[test]
    fn end_of_cycle_phase_matches_the_limit() {
        for ell in 1..=2 {
            let params = validate_params(1, 3, ell, Mode::Float).unwrap();
            let model = stationary_model(THIRD, ell).unwrap();
            let phases = phase_distances(&model, &params, 400).unwrap();
            assert!(phases[0].total_variation < 1e-4);
            assert!(
                phases[1..].iter().all(|d| d.total_variation > 1e-2),
                "{phases:?}"
            );
        }
    }
}
