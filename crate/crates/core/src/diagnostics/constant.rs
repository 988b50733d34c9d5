use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_matrix, EntryDistribution};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::spectral;

/// Rank-one all-ones perturbation: the outlier `λ₁ ≈ √n`, the bulk edge `|λ₂|`, and
/// the operator norm of the central part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCaseRecord {
    pub n: usize,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// `s₁(X/√n)`.
    pub s1_central: f64,
}

impl ConstantCaseRecord {
    /// `|λ₁ − √n|`.
    pub fn outlier_offset(&self) -> f64 {
        (self.lambda1 - Complex64::new((self.n as f64).sqrt(), 0.0)).norm()
    }
}

pub fn constant_case(n: usize, dist: EntryDistribution, seed: u64) -> Result<ConstantCaseRecord> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "constant case needs n >= 2, got {n}"
        )));
    }
    let x = sample_matrix(dist, n, seed)?;
    constant_case_for_sample(&x.entries)
}

/// Uses `x` in place of a random sample (e.g. the zero matrix).
pub fn constant_case_for_sample(x: &ComplexMatrix) -> Result<ConstantCaseRecord> {
    x.ensure_square()?;
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "constant case needs n >= 2, got {n}"
        )));
    }
    let inv_sqrt = 1.0 / (n as f64).sqrt();
    let central = x.scale(inv_sqrt);
    let b = ComplexMatrix::from_fn(n, n, |j, k| (x[(j, k)] + 1.0) * inv_sqrt);
    let eig = spectral::eigenvalues(&b)?;
    let s1_central = spectral::singular_values(&central)?[0];
    Ok(ConstantCaseRecord {
        n,
        lambda1: eig[0],
        lambda2: eig[1],
        s1_central,
    })
}
