use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular lattice of shift points `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGrid {
    pub re_range: [f64; 2],
    pub im_range: [f64; 2],
    pub step: f64,
}

impl Default for ZGrid {
    fn default() -> Self {
        Self {
            re_range: [-2.5, 2.5],
            im_range: [-2.5, 2.5],
            step: 0.5,
        }
    }
}

/// Nodes per axis are capped so a typo in `step` cannot request billions of solves.
const MAX_NODES_PER_AXIS: usize = 10_000;

impl ZGrid {
    pub fn new(re_range: [f64; 2], im_range: [f64; 2], step: f64) -> Result<Self> {
        let grid = Self {
            re_range,
            im_range,
            step,
        };
        let errs = grid.validation_errors();
        if errs.is_empty() {
            Ok(grid)
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn single(z: Complex64) -> Self {
        Self {
            re_range: [z.re, z.re],
            im_range: [z.im, z.im],
            step: 1.0,
        }
    }

    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.step.is_finite() && self.step > 0.0) {
            errs.push(format!(
                "z_grid.step must be a positive number, got {}",
                self.step
            ));
        }
        for (name, [lo, hi]) in [("re_range", self.re_range), ("im_range", self.im_range)] {
            if !(lo.is_finite() && hi.is_finite()) {
                errs.push(format!("z_grid.{name} must be finite"));
            } else if lo > hi {
                errs.push(format!("z_grid.{name} has lo {lo} > hi {hi}"));
            } else if self.step > 0.0 && (hi - lo) / self.step >= MAX_NODES_PER_AXIS as f64 {
                errs.push(format!(
                    "z_grid.{name} needs more than {MAX_NODES_PER_AXIS} nodes"
                ));
            }
        }
        errs
    }

    fn axis(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..count).map(move |j| lo + j as f64 * step)
    }

    /// Real part outer, imaginary part inner.
    pub fn points(&self) -> Vec<Complex64> {
        let ims: Vec<f64> = Self::axis(self.im_range[0], self.im_range[1], self.step).collect();
        Self::axis(self.re_range[0], self.re_range[1], self.step)
            .flat_map(|re| ims.iter().map(move |&im| Complex64::new(re, im)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
