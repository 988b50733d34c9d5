use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ZGrid;
use crate::ensemble::AssembledPair;
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::measures::{kolmogorov_distance, log_integral_diff, EmpiricalMeasure1D};
use crate::spectral;

/// Relative agreement required between the two routes to `Δ_{n,z}`.
pub const DELTA_CROSS_CHECK_RTOL: f64 = 1e-8;
/// Absolute slack on `|Δ| ≤ (log s_max − log s_min)·ks`.
pub const IBP_SLACK: f64 = 1e-8;
/// Absolute slack on `ks ≤ rank/n`.
pub const RANK_SLACK: f64 = 1e-12;

/// Per-z comparison of `A − zI` and `B − zI`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaDiagnostics {
    pub z: Complex64,
    /// `∫ log t d(μ_{n,z} − ν_{n,z})`; `None` when either shifted matrix is singular.
    pub delta: Option<f64>,
    /// `(log|det(A−zI)| − log|det(B−zI)|)/n` from LU pivots.
    pub delta_det: Option<f64>,
    pub s_max_a: f64,
    pub s_min_a: f64,
    pub s_max_b: f64,
    pub s_min_b: f64,
    /// `‖F_{n,z} − G_{n,z}‖∞`.
    pub ks: f64,
    /// `rank(M)/n`.
    pub rank_bound: f64,
    /// `(log s_max − log s_min)·ks` over the joint support.
    pub ibp_bound: Option<f64>,
    pub singular_flag: bool,
    pub rank_ok: bool,
    pub ibp_ok: bool,
    pub cross_check_ok: bool,
}

impl DeltaDiagnostics {
    pub fn consistent(&self) -> bool {
        self.rank_ok && self.ibp_ok && self.cross_check_ok
    }
}

fn deltas_agree(x: f64, y: f64) -> bool {
    // The absolute floor only matters when both routes return an exact zero.
    (x - y).abs() <= DELTA_CROSS_CHECK_RTOL * x.abs().max(y.abs()) + 1e-300
}

pub fn delta_at(pair: &AssembledPair, z: Complex64) -> Result<DeltaDiagnostics> {
    let n = pair.dim;
    let shifted_a = spectral::shifted(&pair.a_matrix, z)?;
    let shifted_b = spectral::shifted(&pair.b_matrix, z)?;
    let mu = EmpiricalMeasure1D::singular_values_of(&shifted_a)?;
    let nu = EmpiricalMeasure1D::singular_values_of(&shifted_b)?;

    let ks = kolmogorov_distance(&mu, &nu);
    let rank_bound = pair.perturbation_rank as f64 / n as f64;
    let singular_a = mu.min() <= n as f64 * f64::EPSILON * mu.max();
    let singular_b = nu.min() <= n as f64 * f64::EPSILON * nu.max();
    let singular_flag = singular_a || singular_b;

    let mut diag = DeltaDiagnostics {
        z,
        delta: None,
        delta_det: None,
        s_max_a: mu.max(),
        s_min_a: mu.min(),
        s_max_b: nu.max(),
        s_min_b: nu.min(),
        ks,
        rank_bound,
        ibp_bound: None,
        singular_flag,
        rank_ok: ks <= rank_bound + RANK_SLACK,
        ibp_ok: true,
        cross_check_ok: true,
    };
    if singular_flag {
        return Ok(diag);
    }

    let delta = log_integral_diff(&mu, &nu)?;
    let delta_det = match (
        spectral::lu_log_abs_det(&shifted_a)?,
        spectral::lu_log_abs_det(&shifted_b)?,
    ) {
        (Some(la), Some(lb)) => Some((la - lb) / n as f64),
        _ => None,
    };
    let s_max = mu.max().max(nu.max());
    let s_min = mu.min().min(nu.min());
    let ibp_bound = (s_max.ln() - s_min.ln()) * ks;

    diag.delta = Some(delta);
    diag.delta_det = delta_det;
    diag.ibp_bound = Some(ibp_bound);
    diag.ibp_ok = delta.abs() <= ibp_bound + IBP_SLACK;
    diag.cross_check_ok = delta_det.is_some_and(|d| deltas_agree(delta, d));
    Ok(diag)
}

/// One record per grid point, in grid order; singular points are flagged, not dropped.
pub fn delta_scan(pair: &AssembledPair, grid: &ZGrid) -> Result<Vec<DeltaDiagnostics>> {
    grid.points()
        .into_par_iter()
        .map(|z| delta_at(pair, z))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCheck {
    pub ks: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `‖F_{√(AA*)} − F_{√(BB*)}‖∞ ≤ rank(A − B)/n` for `n×m` matrices.
pub fn verify_rank_inequality(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<RankCheck> {
    a.ensure_same_shape(b)?;
    let mu = EmpiricalMeasure1D::singular_values_of(a)?;
    let nu = EmpiricalMeasure1D::singular_values_of(b)?;
    let ks = kolmogorov_distance(&mu, &nu);
    let rank = spectral::numerical_rank(&(a - b))?;
    let bound = rank as f64 / a.rows() as f64;
    Ok(RankCheck {
        ks,
        bound,
        holds: ks <= bound + RANK_SLACK,
    })
}
