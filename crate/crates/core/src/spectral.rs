//! Dense spectral reductions: eigenvalues, singular values, norms and log-determinants.
//!
//! Eigenvalues are labeled by nonincreasing modulus, ties broken by increasing
//! principal argument in `(−π, π]`. Singular values are nonincreasing.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::sync::Once;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Relative threshold below which a singular value does not count towards rank.
pub const RANK_RTOL: f64 = 1e-10;

/// Relative agreement required between the SVD and LU log-determinants.
pub const LOG_DET_CONSISTENCY_RTOL: f64 = 1e-6;

/// Moduli closer than this (relative to the spectral radius) are treated as tied.
const MODULUS_TIE_RTOL: f64 = 1e-12;

static SEQUENTIAL: Once = Once::new();

/// faer runs single-threaded; concurrency lives at the replicate/grid level so results
/// never depend on the worker count.
fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<Complex64>,
    pub singular_values: Vec<f64>,
    /// `None` when the matrix is singular at working precision.
    pub log_abs_det: Option<f64>,
    pub spectral_radius: f64,
    pub operator_norm: f64,
    pub hs_norm_sq: f64,
}

impl SpectralSummary {
    pub fn is_singular(&self) -> bool {
        self.log_abs_det.is_none()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct WeylCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn principal_arg(z: Complex64) -> f64 {
    let im = if z.im.abs() <= MODULUS_TIE_RTOL * z.norm() {
        0.0
    } else {
        z.im
    };
    let arg = im.atan2(z.re);
    if arg <= -PI {
        PI
    } else {
        arg
    }
}

/// Sorts by nonincreasing modulus; near-equal moduli are ordered by argument.
pub fn sort_by_modulus(values: &mut [Complex64]) {
    values.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(Ordering::Equal));
    let scale = values.first().map_or(0.0, |z| z.norm());
    let tol = MODULUS_TIE_RTOL * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < values.len() {
        let head = values[start].norm();
        let mut end = start + 1;
        while end < values.len() && head - values[end].norm() <= tol {
            end += 1;
        }
        if end - start > 1 {
            values[start..end].sort_by(|a, b| {
                principal_arg(*a)
                    .partial_cmp(&principal_arg(*b))
                    .unwrap_or(Ordering::Equal)
            });
        }
        start = end;
    }
}

pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    a.ensure_square()?;
    a.ensure_finite()?;
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    ensure_sequential();
    let mut values = a
        .as_faer()
        .eigenvalues()
        .map_err(|e| Error::Convergence(format!("eigenvalues: {e:?}")))?;
    sort_by_modulus(&mut values);
    Ok(values)
}

/// `min(rows, cols)` singular values, nonincreasing.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.ensure_finite()?;
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(Vec::new());
    }
    ensure_sequential();
    let mut s = a
        .as_faer()
        .singular_values()
        .map_err(|e| Error::Convergence(format!("singular values: {e:?}")))?;
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    Ok(s)
}

/// Count of singular values above `RANK_RTOL · s₁`.
pub fn numerical_rank(a: &ComplexMatrix) -> Result<usize> {
    let s = singular_values(a)?;
    Ok(rank_from_singular_values(&s))
}

pub fn rank_from_singular_values(s: &[f64]) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().filter(|&&x| x > RANK_RTOL * s1).count(),
        _ => 0,
    }
}

/// True when `s_n` is zero or indistinguishable from zero at working precision.
pub fn is_numerically_singular(s: &[f64]) -> bool {
    match (s.first(), s.last()) {
        (Some(&s1), Some(&sn)) => sn <= 0.0 || sn <= s.len() as f64 * f64::EPSILON * s1,
        _ => true,
    }
}

/// `log|det a|` from the diagonal of a partially pivoted LU factorization.
///
/// Returns `None` on an exactly zero pivot. Independent of the SVD route.
pub fn lu_log_abs_det(a: &ComplexMatrix) -> Result<Option<f64>> {
    a.ensure_square()?;
    a.ensure_finite()?;
    let n = a.rows();
    let mut lu: Vec<Complex64> = (0..n * n).map(|idx| a.get(idx / n, idx % n)).collect();
    let mut log_det = 0.0;
    for k in 0..n {
        let (pivot_row, pivot_mod) =
            (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_mod == 0.0 {
            return Ok(None);
        }
        if pivot_row != k {
            for j in 0..n {
                lu.swap(k * n + j, pivot_row * n + j);
            }
        }
        log_det += pivot_mod.ln();
        let pivot = lu[k * n + k];
        let (head, tail) = lu.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..(k + 1) * n];
        for row in tail.chunks_exact_mut(n) {
            let factor = row[k] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (x, &p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *x -= factor * p;
            }
        }
    }
    Ok(Some(log_det))
}

/// `Σ log s_k`, or `None` if numerically singular.
pub fn log_abs_det_from_singular_values(s: &[f64]) -> Option<f64> {
    if is_numerically_singular(s) {
        return None;
    }
    let total: f64 = s.iter().map(|x| x.ln()).sum();
    total.is_finite().then_some(total)
}

/// Log-determinants are compared on the log scale with a unit floor, i.e. as a
/// relative error on `|det|` itself when the logarithm is near zero.
pub fn log_dets_agree(x: f64, y: f64, rtol: f64) -> bool {
    (x - y).abs() <= rtol * x.abs().max(y.abs()).max(1.0)
}

pub fn summarize(a: &ComplexMatrix) -> Result<SpectralSummary> {
    a.ensure_square()?;
    let eigenvalues = eigenvalues(a)?;
    let singular_values = singular_values(a)?;
    let log_abs_det = log_abs_det_from_singular_values(&singular_values);
    if let Some(svd_value) = log_abs_det {
        if let Some(lu_value) = lu_log_abs_det(a)? {
            if !log_dets_agree(svd_value, lu_value, LOG_DET_CONSISTENCY_RTOL) {
                return Err(Error::Consistency(format!(
                    "log|det| from singular values ({svd_value}) disagrees with LU ({lu_value})"
                )));
            }
        }
    }
    Ok(SpectralSummary {
        spectral_radius: eigenvalues.first().map_or(0.0, |z| z.norm()),
        operator_norm: singular_values.first().copied().unwrap_or(0.0),
        hs_norm_sq: a.frobenius_sq(),
        eigenvalues,
        singular_values,
        log_abs_det,
    })
}

/// `a − zI`.
pub fn shifted(a: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    a.ensure_square()?;
    let mut out = a.clone();
    for k in 0..a.rows() {
        out[(k, k)] -= z;
    }
    Ok(out)
}

/// `Σ|λ_k|² ≤ Σ s_k²` with relative slack `1e-8`.
pub fn check_weyl(a: &ComplexMatrix) -> Result<WeylCheck> {
    let lhs: f64 = eigenvalues(a)?.iter().map(|z| z.norm_sqr()).sum();
    let rhs: f64 = singular_values(a)?.iter().map(|s| s * s).sum();
    Ok(WeylCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-8 * rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, EntryDistribution};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let a = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 2.0)]);
        let e = eigenvalues(&a).unwrap();
        assert!(close(e[0], c(0.0, 2.0), 1e-14) && close(e[1], c(1.0, 0.0), 1e-14));
    }

    #[test]
    fn all_ones_eigenvalues() {
        let a = ComplexMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0));
        let e = eigenvalues(&a).unwrap();
        assert!(close(e[0], c(3.0, 0.0), 1e-12));
        assert!(e[1].norm() < 1e-12 && e[2].norm() < 1e-12);
    }

    #[test]
    fn modulus_ties_by_argument() {
        // companion matrix of z² − 1
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eigenvalues(&a).unwrap();
        assert!(close(e[0], c(1.0, 0.0), 1e-14), "{e:?}");
        assert!(close(e[1], c(-1.0, 0.0), 1e-14), "{e:?}");

        let mut v = vec![
            c(0.0, -1.0),
            c(-1.0, 0.0),
            c(0.0, 1.0),
            c(1.0, 0.0),
            c(0.0, 3.0),
        ];
        sort_by_modulus(&mut v);
        assert_eq!(
            v,
            vec![
                c(0.0, 3.0),
                c(0.0, -1.0),
                c(1.0, 0.0),
                c(0.0, 1.0),
                c(-1.0, 0.0)
            ]
        );
        let mut w = vec![c(-1.0, -0.0), c(1.0, 0.0)];
        sort_by_modulus(&mut w);
        assert_eq!(w[0], c(1.0, 0.0));
    }

    #[test]
    fn singular_value_examples() {
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(singular_values(&nil).unwrap(), vec![1.0, 0.0]);
        let s = singular_values(&ComplexMatrix::identity(3)).unwrap();
        assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let col = ComplexMatrix::from_real_rows(&[&[3.0, 0.0], &[4.0, 0.0]]).unwrap();
        let s = singular_values(&col).unwrap();
        assert!((s[0] - 5.0).abs() < 1e-14 && s[1].abs() < 1e-14);
        let rect = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0]]).unwrap();
        let s = singular_values(&rect).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_and_non_square_rejected() {
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(eigenvalues(&a), Err(Error::InvalidValue(_))));
        assert!(matches!(singular_values(&a), Err(Error::InvalidValue(_))));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(eigenvalues(&rect), Err(Error::Shape(_))));
        assert!(matches!(summarize(&rect), Err(Error::Shape(_))));
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(s.log_abs_det, Some(0.0));
        assert!((s.spectral_radius - 1.0).abs() < 1e-15);
        assert_eq!(s.hs_norm_sq, 2.0);

        let d = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(3.0, 0.0)]);
        let s = summarize(&d).unwrap();
        assert!((s.log_abs_det.unwrap() - 6f64.ln()).abs() < 1e-14);

        let ones = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(summarize(&ones).unwrap().is_singular());
        assert!(summarize(&ComplexMatrix::zeros(3, 3))
            .unwrap()
            .is_singular());
    }

    #[test]
    fn summary_invariants_random() {
        for seed in 0..5 {
            let x = sample_matrix(EntryDistribution::ComplexGaussian, 25, seed).unwrap();
            let s = summarize(&x.entries).unwrap();
            assert!(s.eigenvalues.windows(2).all(|w| w[0].norm() >= w[1].norm()));
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            let sum_sq: f64 = s.singular_values.iter().map(|v| v * v).sum();
            assert!((sum_sq - s.hs_norm_sq).abs() <= 1e-8 * s.hs_norm_sq);
            let lu = lu_log_abs_det(&x.entries).unwrap().unwrap();
            assert!(log_dets_agree(s.log_abs_det.unwrap(), lu, 1e-8));
            assert_eq!(s.operator_norm, s.singular_values[0]);
        }
    }

    #[test]
    fn lu_log_det_small_cases() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[3.0, 1.0]]).unwrap();
        assert!((lu_log_abs_det(&a).unwrap().unwrap() - 6f64.ln()).abs() < 1e-15);
        let sing = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(lu_log_abs_det(&sing).unwrap(), None);
        let z = ComplexMatrix::from_diagonal(&[c(0.0, 2.0), c(3.0, 4.0)]);
        assert!((lu_log_abs_det(&z).unwrap().unwrap() - 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn shifted_examples() {
        let z = shifted(&ComplexMatrix::identity(2), c(1.0, 0.0)).unwrap();
        assert_eq!(z, ComplexMatrix::zeros(2, 2));
        let d = shifted(&ComplexMatrix::zeros(3, 3), c(0.0, 1.0)).unwrap();
        assert_eq!(d, ComplexMatrix::from_diagonal(&[c(0.0, -1.0); 3]));
        let x = sample_matrix(EntryDistribution::RealGaussian, 4, 1).unwrap();
        assert_eq!(shifted(&x.entries, c(0.0, 0.0)).unwrap(), x.entries);
    }

    #[test]
    fn weyl_examples() {
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let w = check_weyl(&nil).unwrap();
        assert!(w.lhs.abs() < 1e-30 && (w.rhs - 1.0).abs() < 1e-15 && w.holds);

        let d = ComplexMatrix::from_diagonal(&[c(1.0, 1.0), c(2.0, 0.0)]);
        let w = check_weyl(&d).unwrap();
        assert!((w.lhs - 6.0).abs() < 1e-12 && (w.rhs - 6.0).abs() < 1e-12 && w.holds);

        let x = sample_matrix(EntryDistribution::ComplexGaussian, 6, 11).unwrap();
        let w = check_weyl(&x.entries).unwrap();
        assert!(w.holds && w.lhs < w.rhs);
    }

    #[test]
    fn rank_helpers() {
        assert_eq!(rank_from_singular_values(&[]), 0);
        assert_eq!(rank_from_singular_values(&[0.0, 0.0]), 0);
        assert_eq!(rank_from_singular_values(&[2.0, 1.0, 1e-11]), 2);
        assert!(is_numerically_singular(&[1.0, 0.0]));
        assert!(!is_numerically_singular(&[1.0, 0.5]));
    }
}
