use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TestFunction;
use crate::error::{Error, Result};

/// Axis-aligned integration domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rectangle {
    pub fn around(center: Complex64, half_width: f64) -> Self {
        Self {
            x: [center.re - half_width, center.re + half_width],
            y: [center.im - half_width, center.im + half_width],
        }
    }

    fn contains_disc(&self, center: Complex64, radius: f64) -> bool {
        center.re - radius >= self.x[0]
            && center.re + radius <= self.x[1]
            && center.im - radius >= self.y[0]
            && center.im + radius <= self.y[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenResidual {
    /// `Σ_k f(root_k)`, the counting measure of the roots (not normalized).
    pub lhs: f64,
    /// `(1/2π) Σ Δf · log|P| · h²` over grid nodes.
    pub rhs: f64,
    pub residual: f64,
    /// Nodes dropped for lying within `h/2` of a root.
    pub skipped_nodes: usize,
}

/// Riemann-sum check of `∫ f dμ = (1/2π) ∫ Δf log|P| dx dy` for `P = Π (z − root_k)`.
pub fn green_identity_residual(
    roots: &[Complex64],
    f: &dyn TestFunction,
    grid_step: f64,
    domain: Rectangle,
) -> Result<GreenResidual> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidValue(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let (center, radius) = f
        .support()
        .ok_or_else(|| Error::Domain(format!("{} is not compactly supported", f.name())))?;
    if !domain.contains_disc(center, radius) {
        return Err(Error::Domain(format!(
            "support of {} is not contained in {domain:?}",
            f.name()
        )));
    }
    if 2.0 * radius / grid_step < 8.0 {
        return Err(Error::InvalidValue(format!(
            "grid step {grid_step} resolves the support of {} with fewer than 8 nodes",
            f.name()
        )));
    }

    let lhs: f64 = roots.iter().map(|&r| f.value(r)).sum();

    let h = grid_step;
    let nx = ((domain.x[1] - domain.x[0]) / h + 1e-9).floor() as usize;
    let ny = ((domain.y[1] - domain.y[0]) / h + 1e-9).floor() as usize;
    // nodes outside the support's bounding box contribute exactly zero
    let first = |lo: f64, c: f64| (((c - radius - lo) / h).floor().max(0.0)) as usize;
    let last =
        |lo: f64, c: f64, count: usize| ((((c + radius - lo) / h).ceil()) as usize).min(count);
    let (i0, i1) = (
        first(domain.x[0], center.re),
        last(domain.x[0], center.re, nx),
    );
    let (j0, j1) = (
        first(domain.y[0], center.im),
        last(domain.y[0], center.im, ny),
    );

    let mut sum = 0.0;
    let mut skipped_nodes = 0;
    for i in i0..=i1 {
        let x = domain.x[0] + i as f64 * h;
        for j in j0..=j1 {
            let z = Complex64::new(x, domain.y[0] + j as f64 * h);
            let lap = f.laplacian(z);
            if lap == 0.0 {
                continue;
            }
            if roots.iter().any(|&r| (z - r).norm() < 0.5 * h) {
                skipped_nodes += 1;
                continue;
            }
            let log_abs_p: f64 = roots.iter().map(|&r| (z - r).norm().ln()).sum();
            sum += lap * log_abs_p;
        }
    }
    let rhs = sum * h * h / (2.0 * std::f64::consts::PI);
    Ok(GreenResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        skipped_nodes,
    })
}
