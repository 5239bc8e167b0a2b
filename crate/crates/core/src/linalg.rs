//! Small dense solves with row equilibration and a 1-norm condition number.

use nalgebra::{ComplexField, DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("condition number {condition:.3e} exceeds {limit:.1e}")]
    IllConditioned { condition: f64, limit: f64 },
}

#[derive(Debug, Clone)]
pub struct Solved<T: ComplexField> {
    pub solution: DVector<T>,
    /// `‖A‖₁·‖A⁻¹‖₁` of the row-equilibrated matrix.
    pub condition: f64,
}

fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|v| v.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Scales each row to unit max-modulus, then solves by LU with partial
/// pivoting. Fails when the scaled condition number exceeds `limit`.
pub fn solve_equilibrated<T>(
    mut a: DMatrix<T>,
    mut b: DVector<T>,
    limit: f64,
) -> Result<Solved<T>, LinalgError>
where
    T: ComplexField<RealField = f64>,
{
    for i in 0..a.nrows() {
        let scale = a
            .row(i)
            .iter()
            .map(|v| v.clone().modulus())
            .fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return Err(LinalgError::Singular);
        }
        let inv = T::from_real(1.0 / scale);
        for v in a.row_mut(i).iter_mut() {
            *v = v.clone() * inv.clone();
        }
        b[i] = b[i].clone() * inv;
    }
    let lu = a.clone().lu();
    let inverse = lu.try_inverse().ok_or(LinalgError::Singular)?;
    let condition = norm1(&a) * norm1(&inverse);
    if !condition.is_finite() || condition > limit {
        return Err(LinalgError::IllConditioned { condition, limit });
    }
    let solution = lu.solve(&b).ok_or(LinalgError::Singular)?;
    Ok(Solved {
        solution,
        condition,
    })
}
