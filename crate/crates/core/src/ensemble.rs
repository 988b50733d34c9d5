//! Random matrix ensembles and deterministic perturbations.
//!
//! Entries are drawn from a ChaCha8 stream addressed by `(seed, stream, row, col)`:
//! every entry owns a fixed window of the keystream, so a sample is reproducible
//! regardless of how rows are scheduled across threads, and the `n×n` sample is
//! the leading block of any larger sample with the same seed and stream.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::spectral;

/// 32-bit keystream words reserved per entry (two `u64` draws).
const WORDS_PER_ENTRY: u128 = 4;

/// Standardized entry law: mean 0 and `E|X|² = 1` for every variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EntryDistribution {
    ComplexGaussian,
    RealGaussian,
    Rademacher,
    ComplexRademacher,
    /// `(β − p)/√(p(1−p))` with `β ~ Bernoulli(p)`.
    CenteredBernoulli(f64),
    /// Uniform on `[−√3, √3]`.
    CenteredUniform,
}

impl EntryDistribution {
    pub const ALL_NAMES: [&'static str; 6] = [
        "complex-gaussian",
        "real-gaussian",
        "rademacher",
        "complex-rademacher",
        "centered-bernoulli(p)",
        "centered-uniform",
    ];

    /// Draws one entry. Consumes exactly two `u64` words from `rng`.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        let w1 = rng.next_u64();
        let w2 = rng.next_u64();
        match *self {
            EntryDistribution::ComplexGaussian => {
                let (g1, g2) = box_muller(w1, w2);
                Complex64::new(g1 / SQRT_2, g2 / SQRT_2)
            }
            EntryDistribution::RealGaussian => Complex64::new(box_muller(w1, w2).0, 0.0),
            EntryDistribution::Rademacher => Complex64::new(sign(w1), 0.0),
            EntryDistribution::ComplexRademacher => {
                Complex64::new(sign(w1) / SQRT_2, sign(w2) / SQRT_2)
            }
            EntryDistribution::CenteredBernoulli(p) => {
                let beta = if unit_open(w1) < p { 1.0 } else { 0.0 };
                Complex64::new((beta - p) / (p * (1.0 - p)).sqrt(), 0.0)
            }
            EntryDistribution::CenteredUniform => {
                let u = unit_open(w1);
                Complex64::new(3f64.sqrt() * (2.0 * u - 1.0), 0.0)
            }
        }
    }

    /// Analytic `E|X|⁴`, used to size concentration bands.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            EntryDistribution::ComplexGaussian => 2.0,
            EntryDistribution::RealGaussian => 3.0,
            EntryDistribution::Rademacher | EntryDistribution::ComplexRademacher => 1.0,
            EntryDistribution::CenteredBernoulli(p) => {
                let q = 1.0 - p;
                (q * q * q + p * p * p) / (p * q)
            }
            EntryDistribution::CenteredUniform => 1.8,
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(
            self,
            EntryDistribution::ComplexGaussian | EntryDistribution::ComplexRademacher
        )
    }
}

/// Top 53 bits as a float in `[0, 1)`.
fn unit_open(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn sign(word: u64) -> f64 {
    if word >> 63 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn box_muller(w1: u64, w2: u64) -> (f64, f64) {
    let u1 = 1.0 - unit_open(w1);
    let u2 = unit_open(w2);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryDistribution::ComplexGaussian => f.write_str("complex-gaussian"),
            EntryDistribution::RealGaussian => f.write_str("real-gaussian"),
            EntryDistribution::Rademacher => f.write_str("rademacher"),
            EntryDistribution::ComplexRademacher => f.write_str("complex-rademacher"),
            EntryDistribution::CenteredBernoulli(p) => write!(f, "centered-bernoulli({p})"),
            EntryDistribution::CenteredUniform => f.write_str("centered-uniform"),
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s {
            "complex-gaussian" => EntryDistribution::ComplexGaussian,
            "real-gaussian" => EntryDistribution::RealGaussian,
            "rademacher" => EntryDistribution::Rademacher,
            "complex-rademacher" => EntryDistribution::ComplexRademacher,
            "centered-uniform" => EntryDistribution::CenteredUniform,
            _ => {
                let p = s
                    .strip_prefix("centered-bernoulli(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .and_then(|p| p.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse {
                        what: "distribution".into(),
                        message: format!(
                            "unknown distribution {s:?}; expected one of {}",
                            Self::ALL_NAMES.join(", ")
                        ),
                    })?;
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Parse {
                        what: "distribution".into(),
                        message: format!("centered-bernoulli needs p in (0,1), got {p}"),
                    });
                }
                EntryDistribution::CenteredBernoulli(p)
            }
        };
        Ok(parsed)
    }
}

impl TryFrom<String> for EntryDistribution {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EntryDistribution> for String {
    fn from(d: EntryDistribution) -> String {
        d.to_string()
    }
}

/// One realization of the i.i.d. array `X_n`.
#[derive(Debug, Clone)]
pub struct MatrixSample {
    pub dim: usize,
    pub entries: ComplexMatrix,
    pub seed: u64,
    pub stream: u64,
    pub distribution: EntryDistribution,
}

/// Samples an `n×n` matrix of i.i.d. standardized entries on stream 0.
pub fn sample_matrix(dist: EntryDistribution, n: usize, seed: u64) -> Result<MatrixSample> {
    sample_matrix_stream(dist, n, seed, 0)
}

/// Like [`sample_matrix`], with an explicit ChaCha stream index.
pub fn sample_matrix_stream(
    dist: EntryDistribution,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<MatrixSample> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidDimension(format!("n = {n} exceeds 2^32 - 1")));
    }
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            rng.set_word_pos(((j as u128) << 32) * WORDS_PER_ENTRY);
            (0..n).map(|_| dist.draw(&mut rng)).collect()
        })
        .collect();
    let entries = ComplexMatrix::from_fn(n, n, |j, k| rows[j][k]);
    Ok(MatrixSample {
        dim: n,
        entries,
        seed,
        stream,
        distribution: dist,
    })
}

/// Draws `count` scalars from a single row of the keystream. For moment checks.
pub fn sample_scalars(dist: EntryDistribution, count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| dist.draw(&mut rng)).collect()
}

/// Shape of the deterministic matrix `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationKind {
    Zero,
    AllOnes {
        scale: f64,
    },
    /// `M = Σ_i left_i · right_iᴴ`.
    LowRank {
        left: Vec<Vec<Complex64>>,
        right: Vec<Vec<Complex64>>,
    },
    /// CSV rows `j,k,re,im`, 1-indexed, unspecified entries zero.
    File {
        path: PathBuf,
    },
}

/// Declarative description of `M_n` with its rank and Hilbert–Schmidt budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPerturbation", into = "RawPerturbation")]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub rank_budget: usize,
    /// `c` in `‖M‖² ≤ c·n²`.
    pub hs_budget_coefficient: f64,
}

impl PerturbationSpec {
    pub fn zero() -> Self {
        Self {
            kind: PerturbationKind::Zero,
            rank_budget: 0,
            hs_budget_coefficient: 0.0,
        }
    }

    pub fn all_ones(scale: f64) -> Self {
        Self {
            kind: PerturbationKind::AllOnes { scale },
            rank_budget: 1,
            hs_budget_coefficient: scale * scale,
        }
    }

    /// Budgets default to `k` and the triangle-inequality bound `(Σ‖u_i‖‖v_i‖)²/n²`.
    pub fn low_rank(left: Vec<Vec<Complex64>>, right: Vec<Vec<Complex64>>) -> Self {
        let k = left.len();
        let n = left.first().map_or(1, Vec::len).max(1) as f64;
        let norm = |v: &Vec<Complex64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let bound: f64 = left
            .iter()
            .zip(&right)
            .map(|(u, v)| norm(u) * norm(v))
            .sum();
        Self {
            kind: PerturbationKind::LowRank { left, right },
            rank_budget: k,
            hs_budget_coefficient: bound * bound / (n * n),
        }
    }

    pub fn from_file(
        path: impl Into<PathBuf>,
        rank_budget: usize,
        hs_budget_coefficient: f64,
    ) -> Self {
        Self {
            kind: PerturbationKind::File { path: path.into() },
            rank_budget,
            hs_budget_coefficient,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PerturbationKind::Zero => "zero",
            PerturbationKind::AllOnes { .. } => "all-ones",
            PerturbationKind::LowRank { .. } => "low-rank",
            PerturbationKind::File { .. } => "file",
        }
    }

    /// Structural problems detectable without a dimension.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.hs_budget_coefficient.is_finite() && self.hs_budget_coefficient >= 0.0) {
            errs.push(format!(
                "perturbation.hs_budget_coefficient must be finite and >= 0, got {}",
                self.hs_budget_coefficient
            ));
        }
        match &self.kind {
            PerturbationKind::AllOnes { scale } if !scale.is_finite() => {
                errs.push(format!("perturbation.scale must be finite, got {scale}"));
            }
            PerturbationKind::LowRank { left, right } => {
                if left.is_empty() {
                    errs.push("perturbation.left must hold at least one factor".into());
                }
                if left.len() != right.len() {
                    errs.push(format!(
                        "perturbation has {} left factors but {} right factors",
                        left.len(),
                        right.len()
                    ));
                }
            }
            _ => {}
        }
        errs
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturbation {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Vec<Vec<Complex64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Vec<Vec<Complex64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hs_budget_coefficient: Option<f64>,
}

impl TryFrom<RawPerturbation> for PerturbationSpec {
    type Error = String;

    fn try_from(raw: RawPerturbation) -> Result<Self, String> {
        let unexpected = |field: &str, present: bool| -> Result<(), String> {
            if present {
                Err(format!(
                    "field `{field}` is not valid for perturbation kind {:?}",
                    raw.kind
                ))
            } else {
                Ok(())
            }
        };
        let mut spec = match raw.kind.as_str() {
            "zero" => {
                unexpected("scale", raw.scale.is_some())?;
                unexpected("left", raw.left.is_some())?;
                unexpected("right", raw.right.is_some())?;
                unexpected("path", raw.path.is_some())?;
                PerturbationSpec::zero()
            }
            "all-ones" => {
                unexpected("left", raw.left.is_some())?;
                unexpected("right", raw.right.is_some())?;
                unexpected("path", raw.path.is_some())?;
                PerturbationSpec::all_ones(raw.scale.unwrap_or(1.0))
            }
            "low-rank" => {
                unexpected("scale", raw.scale.is_some())?;
                unexpected("path", raw.path.is_some())?;
                let left = raw
                    .left
                    .clone()
                    .ok_or("low-rank perturbation needs `left`")?;
                let right = raw
                    .right
                    .clone()
                    .ok_or("low-rank perturbation needs `right`")?;
                PerturbationSpec::low_rank(left, right)
            }
            "file" => {
                unexpected("scale", raw.scale.is_some())?;
                unexpected("left", raw.left.is_some())?;
                unexpected("right", raw.right.is_some())?;
                let path = raw.path.clone().ok_or("file perturbation needs `path`")?;
                let rank_budget = raw
                    .rank_budget
                    .ok_or("file perturbation needs an explicit `rank_budget`")?;
                let c = raw
                    .hs_budget_coefficient
                    .ok_or("file perturbation needs an explicit `hs_budget_coefficient`")?;
                PerturbationSpec::from_file(path, rank_budget, c)
            }
            other => {
                return Err(format!(
                    "unknown perturbation kind {other:?}; expected zero, all-ones, low-rank or file"
                ))
            }
        };
        if let Some(r) = raw.rank_budget {
            spec.rank_budget = r;
        }
        if let Some(c) = raw.hs_budget_coefficient {
            spec.hs_budget_coefficient = c;
        }
        Ok(spec)
    }
}

impl From<PerturbationSpec> for RawPerturbation {
    fn from(spec: PerturbationSpec) -> Self {
        let kind = spec.kind_name().to_string();
        let mut raw = RawPerturbation {
            kind,
            scale: None,
            left: None,
            right: None,
            path: None,
            rank_budget: Some(spec.rank_budget),
            hs_budget_coefficient: Some(spec.hs_budget_coefficient),
        };
        match spec.kind {
            PerturbationKind::Zero => {}
            PerturbationKind::AllOnes { scale } => raw.scale = Some(scale),
            PerturbationKind::LowRank { left, right } => {
                raw.left = Some(left);
                raw.right = Some(right);
            }
            PerturbationKind::File { path } => raw.path = Some(path),
        }
        raw
    }
}

/// Realizes `M_n` for dimension `n` and checks both budgets.
pub fn build_perturbation(spec: &PerturbationSpec, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let m = match &spec.kind {
        PerturbationKind::Zero => ComplexMatrix::zeros(n, n),
        PerturbationKind::AllOnes { scale } => {
            ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(*scale, 0.0))
        }
        PerturbationKind::LowRank { left, right } => low_rank_matrix(left, right, n)?,
        PerturbationKind::File { path } => read_perturbation_csv(path, n)?,
    };
    m.ensure_finite()?;

    let hs = m.frobenius_sq();
    let hs_cap = spec.hs_budget_coefficient * (n * n) as f64;
    if hs > hs_cap * (1.0 + 1e-12) {
        return Err(Error::BudgetViolation(format!(
            "‖M‖² = {hs} exceeds {} · n² = {hs_cap}",
            spec.hs_budget_coefficient
        )));
    }
    // Zero and all-ones have known rank; skip the O(n³) check for them.
    if matches!(
        spec.kind,
        PerturbationKind::LowRank { .. } | PerturbationKind::File { .. }
    ) {
        let rank = spectral::numerical_rank(&m)?;
        if rank > spec.rank_budget {
            return Err(Error::BudgetViolation(format!(
                "numerical rank {rank} exceeds rank budget {}",
                spec.rank_budget
            )));
        }
    } else {
        let exact_rank = match spec.kind {
            PerturbationKind::AllOnes { scale } if scale != 0.0 => 1,
            _ => 0,
        };
        if exact_rank > spec.rank_budget {
            return Err(Error::BudgetViolation(format!(
                "rank {exact_rank} exceeds rank budget {}",
                spec.rank_budget
            )));
        }
    }
    Ok(m)
}

fn low_rank_matrix(
    left: &[Vec<Complex64>],
    right: &[Vec<Complex64>],
    n: usize,
) -> Result<ComplexMatrix> {
    if left.len() != right.len() {
        return Err(Error::Shape(format!(
            "{} left factors vs {} right factors",
            left.len(),
            right.len()
        )));
    }
    if left.len() > n {
        return Err(Error::Shape(format!("k = {} exceeds n = {n}", left.len())));
    }
    for (i, (u, v)) in left.iter().zip(right).enumerate() {
        if u.len() != n || v.len() != n {
            return Err(Error::Shape(format!(
                "factor pair {i} has lengths ({}, {}), expected {n}",
                u.len(),
                v.len()
            )));
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |j, k| {
        left.iter()
            .zip(right)
            .map(|(u, v)| u[j] * v[k].conj())
            .sum()
    }))
}

/// Parses the `j,k,re,im` perturbation format. A header row and `#` comments are allowed.
pub fn read_perturbation_csv(path: &Path, n: usize) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_perturbation_csv(&text, n)
}

pub fn parse_perturbation_csv(text: &str, n: usize) -> Result<ComplexMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut m = ComplexMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    let parse_err = |line: u64, message: String| Error::Parse {
        what: "perturbation CSV".into(),
        message: format!("line {line}: {message}"),
    };
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(idx as u64 + 1, e.to_string()))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.len() != 4 {
            return Err(parse_err(
                line,
                format!("expected 4 fields, got {}", record.len()),
            ));
        }
        if idx == 0 && &record[0] == "j" {
            continue;
        }
        let j: usize = record[0]
            .parse()
            .map_err(|_| parse_err(line, "bad row index".into()))?;
        let k: usize = record[1]
            .parse()
            .map_err(|_| parse_err(line, "bad column index".into()))?;
        let re: f64 = record[2]
            .parse()
            .map_err(|_| parse_err(line, "bad real part".into()))?;
        let im: f64 = record[3]
            .parse()
            .map_err(|_| parse_err(line, "bad imaginary part".into()))?;
        if j == 0 || k == 0 || j > n || k > n {
            return Err(Error::Shape(format!(
                "line {line}: entry ({j},{k}) outside a {n}x{n} matrix (indices are 1-based)"
            )));
        }
        let slot = (j - 1) * n + (k - 1);
        if seen[slot] {
            return Err(parse_err(line, format!("duplicate entry ({j},{k})")));
        }
        seen[slot] = true;
        m[(j - 1, k - 1)] = Complex64::new(re, im);
    }
    Ok(m)
}

/// Writes nonzero entries in the `j,k,re,im` format.
pub fn write_matrix_csv(m: &ComplexMatrix, mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "j,k,re,im")?;
    for j in 0..m.rows() {
        for k in 0..m.cols() {
            let z = m.get(j, k);
            if z.re != 0.0 || z.im != 0.0 {
                writeln!(out, "{},{},{},{}", j + 1, k + 1, z.re, z.im)?;
            }
        }
    }
    Ok(())
}

/// `A_n = X_n/√n` and `B_n = (X_n + M_n)/√n`.
#[derive(Debug, Clone)]
pub struct AssembledPair {
    pub a_matrix: ComplexMatrix,
    pub b_matrix: ComplexMatrix,
    pub dim: usize,
    pub perturbation_rank: usize,
}

pub fn assemble(x: &MatrixSample, m: &ComplexMatrix) -> Result<AssembledPair> {
    assemble_matrices(&x.entries, m)
}

/// [`assemble`] for an arbitrary square `x`.
pub fn assemble_matrices(x: &ComplexMatrix, m: &ComplexMatrix) -> Result<AssembledPair> {
    x.ensure_square()?;
    x.ensure_same_shape(m)?;
    let perturbation_rank = spectral::numerical_rank(m)?;
    assemble_with_rank(x, m, perturbation_rank)
}

/// [`assemble_matrices`] with `rank(m)` already known.
pub(crate) fn assemble_with_rank(
    x: &ComplexMatrix,
    m: &ComplexMatrix,
    perturbation_rank: usize,
) -> Result<AssembledPair> {
    x.ensure_square()?;
    x.ensure_same_shape(m)?;
    let n = x.rows();
    let inv_sqrt = 1.0 / (n as f64).sqrt();
    let a_matrix = ComplexMatrix::from_fn(n, n, |j, k| x[(j, k)] * inv_sqrt);
    let b_matrix = ComplexMatrix::from_fn(n, n, |j, k| (x[(j, k)] + m[(j, k)]) * inv_sqrt);
    Ok(AssembledPair {
        a_matrix,
        b_matrix,
        dim: n,
        perturbation_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rademacher_support() {
        let s = sample_matrix(EntryDistribution::Rademacher, 100, 7).unwrap();
        assert!(s
            .entries
            .entries()
            .all(|z| z.im == 0.0 && (z.re == 1.0 || z.re == -1.0)));
    }

    #[test]
    fn complex_gaussian_moments_n500() {
        let s = sample_matrix(EntryDistribution::ComplexGaussian, 500, 1).unwrap();
        let count = 500.0 * 500.0;
        let mean: Complex64 = s.entries.entries().sum::<Complex64>() / count;
        let m2 = s.entries.frobenius_sq() / count;
        assert!(mean.norm() <= 4.0 / count.sqrt(), "mean {mean}");
        assert!((0.98..=1.02).contains(&m2), "E|X|^2 = {m2}");
    }

    #[test]
    fn zero_dimension_rejected() {
        for dist in [
            EntryDistribution::ComplexGaussian,
            EntryDistribution::Rademacher,
        ] {
            assert!(matches!(
                sample_matrix(dist, 0, 0),
                Err(Error::InvalidDimension(_))
            ));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_nested() {
        let d = EntryDistribution::ComplexGaussian;
        let a = sample_matrix_stream(d, 12, 99, 3).unwrap();
        let b = sample_matrix_stream(d, 12, 99, 3).unwrap();
        assert_eq!(a.entries, b.entries);
        let big = sample_matrix_stream(d, 20, 99, 3).unwrap();
        for j in 0..12 {
            for k in 0..12 {
                assert_eq!(
                    a.entries[(j, k)].re.to_bits(),
                    big.entries[(j, k)].re.to_bits()
                );
            }
        }
        let other = sample_matrix_stream(d, 12, 99, 4).unwrap();
        assert_ne!(a.entries, other.entries);
    }

    #[test]
    fn distribution_names_round_trip() {
        for name in [
            "complex-gaussian",
            "real-gaussian",
            "rademacher",
            "complex-rademacher",
            "centered-bernoulli(0.25)",
            "centered-uniform",
        ] {
            let d: EntryDistribution = name.parse().unwrap();
            assert_eq!(d.to_string(), name);
        }
        assert!("centered-bernoulli(1.5)"
            .parse::<EntryDistribution>()
            .is_err());
        assert!("gaussian".parse::<EntryDistribution>().is_err());
    }

    #[test]
    fn all_ones_perturbation() {
        let m = build_perturbation(&PerturbationSpec::all_ones(1.0), 3).unwrap();
        assert!(m.entries().all(|z| z == c(1.0, 0.0)));
        assert_eq!(m.frobenius_sq(), 9.0);
        assert_eq!(spectral::numerical_rank(&m).unwrap(), 1);
    }

    #[test]
    fn zero_perturbation() {
        let m = build_perturbation(&PerturbationSpec::zero(), 5).unwrap();
        assert_eq!(m, ComplexMatrix::zeros(5, 5));
        assert_eq!(spectral::numerical_rank(&m).unwrap(), 0);
    }

    #[test]
    fn low_rank_orthogonal_pairs() {
        let left = vec![
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
        ];
        let right = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let m = build_perturbation(&PerturbationSpec::low_rank(left, right), 4).unwrap();
        let s = spectral::singular_values(&m).unwrap();
        assert!(s[2] <= 1e-10 * s[0], "{s:?}");
    }

    #[test]
    fn low_rank_shape_errors() {
        let spec =
            PerturbationSpec::low_rank(vec![vec![c(1.0, 0.0); 3]], vec![vec![c(1.0, 0.0); 3]]);
        assert!(matches!(build_perturbation(&spec, 4), Err(Error::Shape(_))));
    }

    #[test]
    fn file_perturbation_budget() {
        let text = "j,k,re,im\n1,1,1,0\n2,2,0,1\n# comment\n3,1,0.5,0\n";
        let m = parse_perturbation_csv(text, 3).unwrap();
        assert_eq!(m[(1, 1)], c(0.0, 1.0));
        assert_eq!(m[(2, 0)], c(0.5, 0.0));
        assert_eq!(m[(0, 1)], c(0.0, 0.0));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, text).unwrap();
        let ok = PerturbationSpec::from_file(&path, 3, 1.0);
        assert!(build_perturbation(&ok, 3).is_ok());
        let tight = PerturbationSpec::from_file(&path, 1, 1.0);
        assert!(matches!(
            build_perturbation(&tight, 3),
            Err(Error::BudgetViolation(_))
        ));
        let hs_tight = PerturbationSpec::from_file(&path, 3, 0.01);
        assert!(matches!(
            build_perturbation(&hs_tight, 3),
            Err(Error::BudgetViolation(_))
        ));
    }

    #[test]
    fn csv_rejects_out_of_range_and_duplicates() {
        assert!(matches!(
            parse_perturbation_csv("4,1,1,0\n", 3),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            parse_perturbation_csv("0,1,1,0\n", 3),
            Err(Error::Shape(_))
        ));
        assert!(parse_perturbation_csv("1,1,1,0\n1,1,2,0\n", 3).is_err());
        assert!(parse_perturbation_csv("1,1,x,0\n", 3).is_err());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let s = sample_matrix(EntryDistribution::ComplexGaussian, 6, 5).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&s.entries, &mut buf).unwrap();
        let back = parse_perturbation_csv(std::str::from_utf8(&buf).unwrap(), 6).unwrap();
        assert_eq!(back, s.entries);
    }

    #[test]
    fn assemble_ones_on_zero_sample() {
        let x = ComplexMatrix::zeros(4, 4);
        let m = build_perturbation(&PerturbationSpec::all_ones(1.0), 4).unwrap();
        let pair = assemble_matrices(&x, &m).unwrap();
        assert!(pair.b_matrix.entries().all(|z| z == c(0.5, 0.0)));
        assert_eq!(pair.perturbation_rank, 1);
        let eig = spectral::eigenvalues(&pair.b_matrix).unwrap();
        assert!((eig[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!(eig[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn assemble_zero_perturbation_is_exact() {
        let x = sample_matrix(EntryDistribution::RealGaussian, 7, 2).unwrap();
        let pair = assemble(&x, &ComplexMatrix::zeros(7, 7)).unwrap();
        assert_eq!(pair.a_matrix, pair.b_matrix);
        assert_eq!(pair.perturbation_rank, 0);
    }

    #[test]
    fn assemble_shape_mismatch() {
        let x = sample_matrix(EntryDistribution::RealGaussian, 4, 2).unwrap();
        assert!(matches!(
            assemble(&x, &ComplexMatrix::zeros(3, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn perturbation_json_defaults() {
        let spec: PerturbationSpec =
            serde_json::from_str(r#"{"kind":"all-ones","scale":2.0}"#).unwrap();
        assert_eq!(spec.rank_budget, 1);
        assert_eq!(spec.hs_budget_coefficient, 4.0);
        let err =
            serde_json::from_str::<PerturbationSpec>(r#"{"kind":"zero","rankk":1}"#).unwrap_err();
        assert!(err.to_string().contains("rankk"), "{err}");
        assert!(
            serde_json::from_str::<PerturbationSpec>(r#"{"kind":"file","path":"x.csv"}"#).is_err()
        );
    }
}
