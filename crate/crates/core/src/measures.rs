//! Uniform-weight atomic measures on the half-line and on the complex plane.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::spectral;

/// Atoms of weight `1/n` on the real line, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure1D {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure1D {
    pub fn new(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidValue("measure has non-finite atoms".into()));
        }
        atoms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Ok(Self { atoms })
    }

    /// `μ_{√(AA*)}` for an `n×m` matrix: `n` atoms, zero-padded when `m < n`.
    pub fn singular_values_of(a: &ComplexMatrix) -> Result<Self> {
        let mut s = spectral::singular_values(a)?;
        s.resize(a.rows(), 0.0);
        Self::new(s)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1]
    }

    fn count_le(&self, x: f64) -> usize {
        self.atoms.partition_point(|&a| a <= x)
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&a| f(a)).sum::<f64>() / self.len() as f64
    }
}

/// `F(x) = #{atoms ≤ x}/n`.
pub fn ecdf_eval(m: &EmpiricalMeasure1D, x: f64) -> f64 {
    m.count_le(x) as f64 / m.len() as f64
}

/// `i/n − j/m`, correctly rounded: the numerator is formed exactly in integers.
pub(crate) fn cdf_gap(i: usize, n: usize, j: usize, m: usize) -> f64 {
    (i as i128 * m as i128 - j as i128 * n as i128) as f64 / (n as i128 * m as i128) as f64
}

/// Sorted distinct support points of both measures, each with `F_μ − F_ν` just at
/// (and to the right of) that point.
fn merged_differences(mu: &EmpiricalMeasure1D, nu: &EmpiricalMeasure1D) -> Vec<(f64, f64)> {
    let (a, b) = (mu.atoms(), nu.atoms());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        out.push((x, cdf_gap(i, a.len(), j, b.len())));
    }
    out
}

/// Exact `sup_x |F_μ(x) − F_ν(x)|`.
///
/// Both CDFs are right-continuous step functions, so the supremum is attained at
/// a support point; left limits coincide with the value at the previous point.
pub fn kolmogorov_distance(mu: &EmpiricalMeasure1D, nu: &EmpiricalMeasure1D) -> f64 {
    merged_differences(mu, nu)
        .into_iter()
        .fold(0.0, |acc, (_, d)| acc.max(d.abs()))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct IbpResult {
    /// `∫f dμ − ∫f dν`.
    pub lhs: f64,
    /// `−∫_α^β f′(F_μ − F_ν) dx`, summed piecewise over the merged partition.
    pub rhs: f64,
    /// `(f(β) − f(α)) ‖F_μ − F_ν‖∞`.
    pub bound: f64,
}

impl IbpResult {
    pub fn identity_holds(&self, rtol: f64) -> bool {
        (self.lhs - self.rhs).abs() <= rtol * (1.0 + self.lhs.abs())
    }

    /// Only meaningful for nondecreasing `f`.
    pub fn bound_holds(&self, atol: f64) -> bool {
        self.lhs.abs() <= self.bound + atol
    }
}

/// Integration by parts for atomic measures:
/// `∫f dμ − ∫f dν = −∫_α^β f′(x)(F_μ(x) − F_ν(x)) dx`.
///
/// `F_μ − F_ν` is constant on each cell `[c_k, c_{k+1})` of the merged partition, so
/// the integral of `f′` over a cell is exactly `f(c_{k+1}) − f(c_k)`; `f` itself serves
/// as the antiderivative.
pub fn ibp_difference(
    f: impl Fn(f64) -> f64,
    mu: &EmpiricalMeasure1D,
    nu: &EmpiricalMeasure1D,
    interval: (f64, f64),
) -> Result<IbpResult> {
    let (alpha, beta) = interval;
    if alpha.partial_cmp(&beta).is_none_or(|o| o.is_gt()) {
        return Err(Error::Domain(format!("empty interval [{alpha}, {beta}]")));
    }
    for m in [mu, nu] {
        if m.min() < alpha || m.max() > beta {
            return Err(Error::Domain(format!(
                "atoms span [{}, {}], outside [{alpha}, {beta}]",
                m.min(),
                m.max()
            )));
        }
    }
    let lhs = mu.integrate(&f) - nu.integrate(&f);
    let cells = merged_differences(mu, nu);
    let mut rhs = 0.0;
    let mut ks: f64 = 0.0;
    let mut f_prev = f(cells[0].0);
    for w in cells.windows(2) {
        let (_, diff) = w[0];
        let f_next = f(w[1].0);
        rhs -= diff * (f_next - f_prev);
        ks = ks.max(diff.abs());
        f_prev = f_next;
    }
    // the last cell runs to β where both CDFs equal 1
    if let Some(&(_, last)) = cells.last() {
        ks = ks.max(last.abs());
    }
    Ok(IbpResult {
        lhs,
        rhs,
        bound: (f(beta) - f(alpha)) * ks,
    })
}

/// `∫ log t dμ(t) − ∫ log t dν(t)`.
pub fn log_integral_diff(mu: &EmpiricalMeasure1D, nu: &EmpiricalMeasure1D) -> Result<f64> {
    for m in [mu, nu] {
        if m.min() <= 0.0 {
            return Err(Error::SingularSupport(format!(
                "measure has an atom at {} <= 0",
                m.min()
            )));
        }
    }
    Ok(mu.integrate(f64::ln) - nu.integrate(f64::ln))
}

/// Atoms of weight `1/n` in the complex plane.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure2D {
    atoms: Vec<Complex64>,
}

impl EmpiricalMeasure2D {
    pub fn new(atoms: Vec<Complex64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        if atoms
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidValue("measure has non-finite atoms".into()));
        }
        Ok(Self { atoms })
    }

    /// The empirical spectral distribution `μ_A`.
    pub fn spectral_distribution(a: &ComplexMatrix) -> Result<Self> {
        Self::new(spectral::eigenvalues(a)?)
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        self.atoms.iter().map(|&z| f(z)).sum::<f64>() / self.len() as f64
    }
}

/// Kolmogorov distance between the ECDF of `samples` and a continuous `cdf`.
fn one_sample_ks(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = samples.len() as f64;
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let below = i;
        while i < samples.len() && samples[i] <= x {
            i += 1;
        }
        let target = cdf(x);
        sup = sup
            .max((i as f64 / n - target).abs())
            .max((below as f64 / n - target).abs());
    }
    sup
}

/// `sup_r |F_emp(r) − min(r², 1)|` over atom moduli.
pub fn radial_disk_distance(m: &EmpiricalMeasure2D) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::InvalidMeasure("measure has no atoms".into()));
    }
    let moduli = m.atoms().iter().map(|z| z.norm()).collect();
    Ok(one_sample_ks(moduli, |r| (r * r).min(1.0)))
}

/// Principal argument rescaled to `[0, 1)`.
pub fn normalized_argument(z: Complex64) -> f64 {
    let mut u = z.im.atan2(z.re) / (2.0 * PI);
    if u < 0.0 {
        u += 1.0;
    }
    if u >= 1.0 {
        0.0
    } else {
        u
    }
}

/// Kolmogorov distance of the normalized arguments to the uniform law on `[0, 1)`.
/// Atoms at the origin carry no argument and are skipped.
pub fn angular_disk_distance(m: &EmpiricalMeasure2D) -> Result<f64> {
    let args: Vec<f64> = m
        .atoms()
        .iter()
        .filter(|z| z.re != 0.0 || z.im != 0.0)
        .map(|&z| normalized_argument(z))
        .collect();
    if args.is_empty() {
        return Err(Error::InvalidMeasure("all atoms lie at the origin".into()));
    }
    Ok(one_sample_ks(args, |u| u.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(atoms: &[f64]) -> EmpiricalMeasure1D {
        EmpiricalMeasure1D::new(atoms.to_vec()).unwrap()
    }

    #[test]
    fn ecdf_examples() {
        assert_eq!(ecdf_eval(&m1(&[1.0, 2.0, 3.0]), 2.0), 2.0 / 3.0);
        assert_eq!(ecdf_eval(&m1(&[1.0]), 0.5), 0.0);
        assert_eq!(ecdf_eval(&m1(&[0.0, 0.0]), 0.0), 1.0);
        assert_eq!(ecdf_eval(&m1(&[3.0, 1.0]), f64::INFINITY), 1.0);
    }

    #[test]
    fn empty_measure_rejected() {
        assert!(matches!(
            EmpiricalMeasure1D::new(vec![]),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(matches!(
            EmpiricalMeasure2D::new(vec![]),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(EmpiricalMeasure1D::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn kolmogorov_examples() {
        let a = m1(&[0.3, 1.0, 2.5]);
        assert_eq!(kolmogorov_distance(&a, &a), 0.0);
        assert_eq!(kolmogorov_distance(&m1(&[0.0]), &m1(&[1.0])), 1.0);
        assert_eq!(kolmogorov_distance(&m1(&[1.0, 2.0]), &m1(&[1.0, 3.0])), 0.5);
        assert_eq!(kolmogorov_distance(&m1(&[1.0, 3.0]), &m1(&[1.0, 2.0])), 0.5);
        // unequal sizes
        assert_eq!(
            kolmogorov_distance(&m1(&[1.0]), &m1(&[1.0, 1.0, 2.0])),
            1.0 / 3.0
        );
        assert_eq!(
            kolmogorov_distance(&m1(&[0.5, 1.5, 2.5]), &m1(&[1.0, 2.0, 3.0])),
            1.0 / 3.0
        );
    }

    #[test]
    fn ibp_linear_equal_means() {
        let r = ibp_difference(|x| x, &m1(&[0.0, 2.0]), &m1(&[1.0, 1.0]), (0.0, 2.0)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.bound, 1.0);
        // f(x) = x²: lhs = 2 − 1 = 1; F_μ − F_ν is +½ on [0,1), −½ on [1,2)
        let r = ibp_difference(|x| x * x, &m1(&[0.0, 2.0]), &m1(&[1.0, 1.0]), (0.0, 2.0)).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.rhs, -(0.5 * 1.0 - 0.5 * 3.0));
    }

    #[test]
    fn ibp_constant_function() {
        let r = ibp_difference(|_| 4.2, &m1(&[0.5, 2.0]), &m1(&[1.0, 1.5]), (0.0, 3.0)).unwrap();
        assert_eq!((r.lhs, r.rhs, r.bound), (0.0, 0.0, 0.0));
    }

    #[test]
    fn ibp_domain_error() {
        let r = ibp_difference(|x| x, &m1(&[0.5, 4.0]), &m1(&[1.0]), (0.0, 3.0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn ibp_bound_is_tight_for_shift() {
        // one atom moved from 1 to 2: lhs = (f(1) - f(2))/n, ks = 1/n
        let r = ibp_difference(|x| x * x, &m1(&[1.0, 5.0]), &m1(&[2.0, 5.0]), (1.0, 5.0)).unwrap();
        assert_eq!(r.lhs, -1.5);
        assert_eq!(r.rhs, -1.5);
        assert!(r.bound_holds(1e-12));
    }

    #[test]
    fn log_integral_examples() {
        let d = log_integral_diff(&m1(&[1.0]), &m1(&[std::f64::consts::E])).unwrap();
        assert!((d + 1.0).abs() < 1e-15);
        let a = m1(&[0.2, 3.0, 7.0]);
        assert_eq!(log_integral_diff(&a, &a).unwrap(), 0.0);
        assert!(matches!(
            log_integral_diff(&m1(&[0.0, 1.0]), &a),
            Err(Error::SingularSupport(_))
        ));
    }

    #[test]
    fn radial_examples() {
        let origin = EmpiricalMeasure2D::new(vec![Complex64::new(0.0, 0.0)]).unwrap();
        assert_eq!(radial_disk_distance(&origin).unwrap(), 1.0);

        let n = 50;
        let quantiles: Vec<Complex64> = (1..=n)
            .map(|k| {
                Complex64::from_polar((k as f64 / n as f64).sqrt(), 2.0 * PI * k as f64 / n as f64)
            })
            .collect();
        let d = radial_disk_distance(&EmpiricalMeasure2D::new(quantiles).unwrap()).unwrap();
        assert!(d <= 1.0 / n as f64 + 1e-12, "{d}");
    }

    #[test]
    fn angular_examples() {
        let quarter: Vec<Complex64> = [0.0, PI / 2.0, PI, -PI / 2.0]
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect();
        let d = angular_disk_distance(&EmpiricalMeasure2D::new(quarter).unwrap()).unwrap();
        assert!(d <= 0.25 + 1e-15, "{d}");

        let z = Complex64::from_polar(0.7, 2.0);
        let u = normalized_argument(z);
        let d = angular_disk_distance(&EmpiricalMeasure2D::new(vec![z]).unwrap()).unwrap();
        assert_eq!(d, u.max(1.0 - u));

        let zeros = EmpiricalMeasure2D::new(vec![Complex64::new(0.0, 0.0); 3]).unwrap();
        assert!(matches!(
            angular_disk_distance(&zeros),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn normalized_argument_range() {
        assert_eq!(normalized_argument(Complex64::new(1.0, 0.0)), 0.0);
        assert_eq!(normalized_argument(Complex64::new(-1.0, 0.0)), 0.5);
        assert_eq!(normalized_argument(Complex64::new(1.0, -1e-300)), 0.0);
        assert!((normalized_argument(Complex64::new(0.0, -1.0)) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn singular_value_measure_pads_rectangular() {
        let tall = ComplexMatrix::from_real_rows(&[&[1.0], &[0.0], &[0.0]]).unwrap();
        let m = EmpiricalMeasure1D::singular_values_of(&tall).unwrap();
        assert_eq!(m.atoms(), &[0.0, 0.0, 1.0]);
        let wide = ComplexMatrix::from_real_rows(&[&[3.0, 4.0]]).unwrap();
        let m = EmpiricalMeasure1D::singular_values_of(&wide).unwrap();
        assert_eq!(m.len(), 1);
    }
}
