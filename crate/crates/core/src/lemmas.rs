//! Randomized checks of the exact finite-n inequalities: Weyl's second-moment bound,
//! integration by parts for atomic measures, the singular-value rank inequality, and
//! the merged-scan Kolmogorov distance against a brute-force evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnostics::verify_rank_inequality;
use crate::ensemble::{sample_matrix_stream, EntryDistribution};
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::measures::{cdf_gap, ibp_difference, kolmogorov_distance, EmpiricalMeasure1D};
use crate::spectral;

pub const IBP_IDENTITY_RTOL: f64 = 1e-10;
pub const IBP_BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LemmaReport {
    pub trials: usize,
    pub weyl_violations: usize,
    /// Smallest `(rhs − lhs)/rhs` seen; Weyl holds iff this is ≥ −1e-8.
    pub weyl_min_relative_slack: f64,
    pub ibp_identity_violations: usize,
    pub ibp_max_relative_error: f64,
    pub ibp_bound_violations: usize,
    pub rank_violations: usize,
    pub rank_max_excess: f64,
    pub ks_oracle_mismatches: usize,
}

impl LemmaReport {
    pub fn violations(&self) -> usize {
        self.weyl_violations
            + self.ibp_identity_violations
            + self.ibp_bound_violations
            + self.rank_violations
            + self.ks_oracle_mismatches
    }
}

/// Brute-force `sup |F_μ − F_ν|`: counts atoms directly at every support point and at
/// every midpoint between consecutive support points.
pub fn kolmogorov_brute_force(a: &[f64], b: &[f64]) -> f64 {
    let mut support: Vec<f64> = a.iter().chain(b).copied().collect();
    support.sort_by(|x, y| x.partial_cmp(y).unwrap());
    support.dedup();
    let mut probes = support.clone();
    probes.extend(support.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    probes.push(support[0] - 1.0);
    probes
        .iter()
        .map(|&x| {
            let below_a = a.iter().filter(|&&v| v <= x).count();
            let below_b = b.iter().filter(|&&v| v <= x).count();
            cdf_gap(below_a, a.len(), below_b, b.len()).abs()
        })
        .fold(0.0, f64::max)
}

fn random_atoms(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64, lattice: bool) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if lattice {
                // coarse lattice to force ties
                lo + (hi - lo) * (rng.random_range(0..8) as f64 / 7.0)
            } else {
                rng.random_range(lo..hi)
            }
        })
        .collect()
}

fn random_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let sample = sample_matrix_stream(
        EntryDistribution::ComplexGaussian,
        rows.max(cols),
        rng.random(),
        rng.random(),
    )
    .expect("nonzero dimension");
    ComplexMatrix::from_fn(rows, cols, |j, k| sample.entries[(j, k)])
}

/// Runs `trials` rounds of each lemma check. Deterministic in `(trials, seed)`.
pub fn verify_lemmas(trials: usize, seed: u64) -> Result<LemmaReport> {
    let mut report = LemmaReport {
        trials,
        weyl_min_relative_slack: f64::INFINITY,
        ..Default::default()
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);

        // Weyl: Σ|λ|² ≤ Σ s²
        let n = rng.random_range(2..=30);
        let dist = match trial % 3 {
            0 => EntryDistribution::ComplexGaussian,
            1 => EntryDistribution::RealGaussian,
            _ => EntryDistribution::Rademacher,
        };
        let a = sample_matrix_stream(dist, n, rng.random(), rng.random())?;
        let weyl = spectral::check_weyl(&a.entries)?;
        report.weyl_min_relative_slack = report
            .weyl_min_relative_slack
            .min((weyl.rhs - weyl.lhs) / weyl.rhs);
        report.weyl_violations += !weyl.holds as usize;

        // integration by parts with a random quartic on [1, 10]
        let len = rng.random_range(1..=40);
        let mu = EmpiricalMeasure1D::new(random_atoms(&mut rng, len, 1.0, 10.0, false))?;
        let nu = EmpiricalMeasure1D::new(random_atoms(&mut rng, len, 1.0, 10.0, false))?;
        let monotone = trial % 2 == 0;
        let coeffs: Vec<f64> = (0..5)
            .map(|_| {
                if monotone {
                    rng.random_range(0.0..1.0)
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let ibp = ibp_difference(poly, &mu, &nu, (1.0, 10.0))?;
        let rel = (ibp.lhs - ibp.rhs).abs() / (1.0 + ibp.lhs.abs());
        report.ibp_max_relative_error = report.ibp_max_relative_error.max(rel);
        report.ibp_identity_violations += !ibp.identity_holds(IBP_IDENTITY_RTOL) as usize;
        if monotone {
            report.ibp_bound_violations += !ibp.bound_holds(IBP_BOUND_SLACK) as usize;
        }

        // rank inequality with a planted rank-k difference
        let rows = rng.random_range(1..=40);
        let cols = rng.random_range(1..=40);
        let k = rng.random_range(0..=5usize).min(rows.min(cols));
        let a = random_gaussian(&mut rng, rows, cols);
        let b = if k == 0 {
            a.clone()
        } else {
            let u = random_gaussian(&mut rng, rows, k);
            let v = random_gaussian(&mut rng, k, cols);
            &a + &u.matmul(&v)?
        };
        let check = verify_rank_inequality(&a, &b)?;
        report.rank_max_excess = report.rank_max_excess.max(check.ks - check.bound);
        report.rank_violations += !check.holds as usize;

        // Kolmogorov distance against brute force, with and without ties
        let lattice = trial % 2 == 1;
        let (len_x, len_y) = (rng.random_range(1..=40), rng.random_range(1..=40));
        let xs = random_atoms(&mut rng, len_x, 0.0, 5.0, lattice);
        let ys = random_atoms(&mut rng, len_y, 0.0, 5.0, lattice);
        let fast = kolmogorov_distance(
            &EmpiricalMeasure1D::new(xs.clone())?,
            &EmpiricalMeasure1D::new(ys.clone())?,
        );
        report.ks_oracle_mismatches += (fast != kolmogorov_brute_force(&xs, &ys)) as usize;
    }
    Ok(report)
}
