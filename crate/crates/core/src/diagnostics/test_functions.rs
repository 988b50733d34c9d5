//! Smooth test functions on the complex plane with closed-form Laplacians.

use num_complex::Complex64;

/// Real-valued smooth function on `C`.
pub trait TestFunction: Send + Sync {
    fn value(&self, z: Complex64) -> f64;

    /// `∂²f/∂x² + ∂²f/∂y²`.
    fn laplacian(&self, z: Complex64) -> f64;

    /// Center and radius of a closed disc containing the support, if compact.
    fn support(&self) -> Option<(Complex64, f64)>;

    fn name(&self) -> String;
}

/// Radial profile `g(ρ) = exp(1 − 1/(1 − ρ²))` on `ρ < 1`, with `g(0) = 1`.
/// Returns `(g, g′/ρ, Δg)` in the scaled variable.
fn bump_profile(rho_sq: f64) -> (f64, f64, f64) {
    if rho_sq >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let h = 1.0 - rho_sq;
    let g = (1.0 - 1.0 / h).exp();
    let h2 = h * h;
    let g_prime_over_rho = -2.0 * g / h2;
    let lap = g * (-4.0 / h2 + 4.0 * rho_sq / (h2 * h2) - 8.0 * rho_sq / (h2 * h));
    (g, g_prime_over_rho, lap)
}

/// Compactly supported `C^∞` bump, equal to 1 at `center`, vanishing outside `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    pub center: Complex64,
    pub radius: f64,
}

impl RadialBump {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }
}

impl TestFunction for RadialBump {
    fn value(&self, z: Complex64) -> f64 {
        bump_profile((z - self.center).norm_sqr() / (self.radius * self.radius)).0
    }

    fn laplacian(&self, z: Complex64) -> f64 {
        let r2 = self.radius * self.radius;
        bump_profile((z - self.center).norm_sqr() / r2).2 / r2
    }

    fn support(&self) -> Option<(Complex64, f64)> {
        Some((self.center, self.radius))
    }

    fn name(&self) -> String {
        format!("bump(c={}, r={})", self.center, self.radius)
    }
}

/// `Re(((z − c)/R)^d) · bump`: a harmonic polynomial cut off smoothly at radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicCutoff {
    pub center: Complex64,
    pub radius: f64,
    pub degree: u32,
}

impl TestFunction for HarmonicCutoff {
    fn value(&self, z: Complex64) -> f64 {
        let w = (z - self.center) / self.radius;
        w.powu(self.degree).re * bump_profile(w.norm_sqr()).0
    }

    fn laplacian(&self, z: Complex64) -> f64 {
        // Δ(pq) = pΔq + 2∇p·∇q for harmonic p
        let w = (z - self.center) / self.radius;
        let (_, g_over_rho, lap_g) = bump_profile(w.norm_sqr());
        let p = w.powu(self.degree).re;
        let (px, py) = if self.degree == 0 {
            (0.0, 0.0)
        } else {
            let dp = w.powu(self.degree - 1) * self.degree as f64;
            (dp.re, -dp.im)
        };
        let (gx, gy) = (g_over_rho * w.re, g_over_rho * w.im);
        (p * lap_g + 2.0 * (px * gx + py * gy)) / (self.radius * self.radius)
    }

    fn support(&self) -> Option<(Complex64, f64)> {
        Some((self.center, self.radius))
    }

    fn name(&self) -> String {
        format!(
            "harmonic{}(c={}, r={})",
            self.degree, self.center, self.radius
        )
    }
}

/// `exp(−|z − c|²/(2w²))`. Not compactly supported, but decays fast enough for
/// weak-convergence probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub center: Complex64,
    pub width: f64,
}

impl TestFunction for GaussianBump {
    fn value(&self, z: Complex64) -> f64 {
        (-(z - self.center).norm_sqr() / (2.0 * self.width * self.width)).exp()
    }

    fn laplacian(&self, z: Complex64) -> f64 {
        let w2 = self.width * self.width;
        let r2 = (z - self.center).norm_sqr();
        (r2 / (w2 * w2) - 2.0 / w2) * self.value(z)
    }

    fn support(&self) -> Option<(Complex64, f64)> {
        None
    }

    fn name(&self) -> String {
        format!("gaussian(c={}, w={})", self.center, self.width)
    }
}

/// Constant function; stands in for any `f` constant on a disc holding every atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFunction(pub f64);

impl TestFunction for ConstantFunction {
    fn value(&self, _: Complex64) -> f64 {
        self.0
    }

    fn laplacian(&self, _: Complex64) -> f64 {
        0.0
    }

    fn support(&self) -> Option<(Complex64, f64)> {
        None
    }

    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// Radial bumps and Gaussians at a few centers plus harmonic cutoffs.
pub fn default_test_functions() -> Vec<Box<dyn TestFunction>> {
    let c = Complex64::new;
    vec![
        Box::new(RadialBump::new(c(0.0, 0.0), 0.5)),
        Box::new(RadialBump::new(c(0.0, 0.0), 1.0)),
        Box::new(RadialBump::new(c(0.5, 0.5), 0.5)),
        Box::new(GaussianBump {
            center: c(0.0, 0.0),
            width: 0.5,
        }),
        Box::new(HarmonicCutoff {
            center: c(0.0, 0.0),
            radius: 1.0,
            degree: 2,
        }),
        Box::new(HarmonicCutoff {
            center: c(-0.3, 0.2),
            radius: 0.8,
            degree: 3,
        }),
    ]
}
