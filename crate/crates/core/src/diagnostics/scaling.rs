use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{delta_scan, DeltaDiagnostics, ZGrid};
use crate::ensemble::build_perturbation;
use crate::ensemble::AssembledPair;
use crate::error::{Error, Result};
use crate::harness::{replicate_pair, ExperimentConfig};

/// One delta diagnostic tagged with its dimension and replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub n: usize,
    pub replicate: usize,
    pub diagnostics: DeltaDiagnostics,
}

/// Aggregates over every non-flagged `(replicate, z)` record of one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimStatistics {
    pub n: usize,
    pub records: usize,
    pub flagged: usize,
    pub median_abs_delta: Option<f64>,
    pub median_ks: Option<f64>,
    pub min_smin: Option<f64>,
    pub max_smax: Option<f64>,
    /// Fraction of records with `min(s_n(A−zI), s_n(B−zI)) < n^{−b₀}`, flagged ones included.
    pub violation_fraction: f64,
}

/// Least-squares slopes on the log-log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedExponents {
    /// Growth rate of `max s_max` in `n`.
    pub a_hat: Option<f64>,
    /// Decay rate of `min s_min` in `n`.
    pub b_hat: Option<f64>,
    /// Decay rate of the median Kolmogorov distance in `n`.
    pub eps_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub dims: Vec<usize>,
    pub per_dim: Vec<DimStatistics>,
    pub fit: Option<FittedExponents>,
    pub reference_exponent_b0: f64,
    pub violation_fraction: f64,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

/// OLS slope of `log y` against `log n`.
///
/// A statistic that is identically zero has slope 0; otherwise only positive values
/// enter the fit, and fewer than two of them yield `None`.
pub fn fit_log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    if !points.is_empty() && points.iter().all(|&(_, y)| y == 0.0) {
        return Some(0.0);
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, y)| y > 0.0 && y.is_finite())
        .map(|&(n, y)| ((n as f64).ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

impl ScalingReport {
    /// Aggregates records per dimension; `fit` is `None` with fewer than two usable dims.
    pub fn aggregate(dims: &[usize], records: &[ScalingRecord], b0: f64) -> Self {
        let per_dim: Vec<DimStatistics> = dims
            .iter()
            .map(|&n| {
                let rows: Vec<&DeltaDiagnostics> = records
                    .iter()
                    .filter(|r| r.n == n)
                    .map(|r| &r.diagnostics)
                    .collect();
                let usable: Vec<&DeltaDiagnostics> =
                    rows.iter().copied().filter(|d| !d.singular_flag).collect();
                let threshold = (n as f64).powf(-b0);
                let violations = rows
                    .iter()
                    .filter(|d| d.singular_flag || d.s_min_a.min(d.s_min_b) < threshold)
                    .count();
                let fold =
                    |init: f64, f: fn(f64, f64) -> f64, get: fn(&DeltaDiagnostics) -> f64| {
                        (!usable.is_empty()).then(|| usable.iter().map(|d| get(d)).fold(init, f))
                    };
                DimStatistics {
                    n,
                    records: rows.len(),
                    flagged: rows.len() - usable.len(),
                    median_abs_delta: median(
                        usable
                            .iter()
                            .filter_map(|d| d.delta.map(f64::abs))
                            .collect(),
                    ),
                    median_ks: median(usable.iter().map(|d| d.ks).collect()),
                    min_smin: fold(f64::INFINITY, f64::min, |d| d.s_min_a.min(d.s_min_b)),
                    max_smax: fold(0.0, f64::max, |d| d.s_max_a.max(d.s_max_b)),
                    violation_fraction: if rows.is_empty() {
                        0.0
                    } else {
                        violations as f64 / rows.len() as f64
                    },
                }
            })
            .collect();

        let usable_dims = per_dim.iter().filter(|s| s.median_ks.is_some()).count();
        let series = |get: fn(&DimStatistics) -> Option<f64>| -> Vec<(usize, f64)> {
            per_dim
                .iter()
                .filter_map(|s| get(s).map(|v| (s.n, v)))
                .collect()
        };
        let fit = (usable_dims >= 2).then(|| FittedExponents {
            a_hat: fit_log_log_slope(&series(|s| s.max_smax)),
            b_hat: fit_log_log_slope(&series(|s| s.min_smin)).map(|b| -b),
            eps_hat: fit_log_log_slope(&series(|s| s.median_ks)).map(|e| -e),
        });
        let total: usize = per_dim.iter().map(|s| s.records).sum();
        let violating: f64 = per_dim
            .iter()
            .map(|s| s.violation_fraction * s.records as f64)
            .sum();
        ScalingReport {
            dims: dims.to_vec(),
            per_dim,
            fit,
            reference_exponent_b0: b0,
            violation_fraction: if total == 0 {
                0.0
            } else {
                violating / total as f64
            },
        }
    }
}

/// Runs `delta_scan` for every `(n, replicate)` with pairs supplied by `pair_for`.
pub fn scaling_scan_with<F>(
    dims: &[usize],
    replicates: usize,
    grid: &ZGrid,
    b0: f64,
    pair_for: F,
) -> Result<ScalingReport>
where
    F: Fn(usize, usize) -> Result<AssembledPair> + Sync,
{
    let tasks: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    let records: Vec<Vec<ScalingRecord>> = tasks
        .par_iter()
        .map(|&(n, replicate)| {
            let pair = pair_for(n, replicate)?;
            Ok(delta_scan(&pair, grid)?
                .into_iter()
                .map(|diagnostics| ScalingRecord {
                    n,
                    replicate,
                    diagnostics,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let records: Vec<ScalingRecord> = records.into_iter().flatten().collect();
    let report = ScalingReport::aggregate(dims, &records, b0);
    if report.fit.is_none() {
        return Err(Error::InsufficientData(
            "fewer than 2 dimensions with non-singular grid points".into(),
        ));
    }
    Ok(report)
}

/// Scaling statistics for the configured ensemble, grid and dimensions.
pub fn scaling_scan(config: &ExperimentConfig) -> Result<ScalingReport> {
    if config.dims.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling scan needs at least 3 dimensions, got {}",
            config.dims.len()
        )));
    }
    let perturbations = config
        .dims
        .iter()
        .map(|&n| build_perturbation(&config.perturbation, n))
        .collect::<Result<Vec<_>>>()?;
    scaling_scan_with(
        &config.dims,
        config.replicates,
        &config.z_grid,
        config.reference_exponent_b0,
        |n, replicate| {
            let idx = config
                .dims
                .iter()
                .position(|&d| d == n)
                .expect("dimension from config");
            replicate_pair(config, n, replicate, &perturbations[idx])
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::assemble_matrices;
    use crate::matrix::ComplexMatrix;
    use num_complex::Complex64;

    #[test]
    fn slope_fit() {
        let pts: Vec<(usize, f64)> = [10usize, 20, 40]
            .iter()
            .map(|&n| (n, 3.0 * (n as f64).powf(-0.5)))
            .collect();
        assert!((fit_log_log_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(fit_log_log_slope(&[(10, 0.0), (20, 0.0)]), Some(0.0));
        assert_eq!(fit_log_log_slope(&[(10, 1.0)]), None);
        assert_eq!(fit_log_log_slope(&[(10, 1.0), (10, 2.0)]), None);
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![]), None);
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn identity_pairs_have_flat_scaling() {
        let grid = ZGrid::single(Complex64::new(0.0, 0.0));
        let report = scaling_scan_with(&[4, 8, 16], 2, &grid, 3.0, |n, _| {
            let root_n = (n as f64).sqrt();
            assemble_matrices(
                &ComplexMatrix::identity(n).scale(root_n),
                &ComplexMatrix::zeros(n, n),
            )
        })
        .unwrap();
        for s in &report.per_dim {
            assert!((s.min_smin.unwrap() - 1.0).abs() < 1e-12);
            assert!((s.max_smax.unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(s.median_ks, Some(0.0));
            assert_eq!(s.violation_fraction, 0.0);
        }
        let fit = report.fit.unwrap();
        assert!(fit.a_hat.unwrap().abs() < 1e-12);
        assert!(fit.b_hat.unwrap().abs() < 1e-12);
        assert_eq!(fit.eps_hat, Some(0.0));
    }

    #[test]
    fn all_singular_is_insufficient() {
        let grid = ZGrid::single(Complex64::new(0.0, 0.0));
        let err = scaling_scan_with(&[2, 3, 4], 1, &grid, 3.0, |n, _| {
            assemble_matrices(&ComplexMatrix::zeros(n, n), &ComplexMatrix::zeros(n, n))
        })
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }
}
