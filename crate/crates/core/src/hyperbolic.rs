//! Upper half-space geometry: points, distance, Poisson kernel, free Green kernel.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::special::{gauss_legendre, ln_gamma};

/// A point (y, height) of H^{N+1} = R^N × R₊.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint<const N: usize = 1> {
    pub(crate) y: [f64; N],
    pub(crate) height: f64,
}

impl<const N: usize> HPoint<N> {
    pub fn from_parts(y: [f64; N], height: f64) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() {
            return Err(Error::InvalidPoint("height must be positive and finite"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("coordinates must be finite"));
        }
        Ok(Self { y, height })
    }

    pub fn coords(&self) -> &[f64; N] {
        &self.y
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    fn sq_gap(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            let d = self.y[i] - other.y[i];
            s += d * d;
        }
        let dh = self.height - other.height;
        s + dh * dh
    }
}

impl HPoint<1> {
    pub fn new(y: f64, height: f64) -> Result<Self> {
        Self::from_parts([y], height)
    }

    pub(crate) fn raw(y: f64, height: f64) -> Self {
        Self { y: [y], height }
    }

    /// Boundary coordinate of the point.
    pub fn y(&self) -> f64 {
        self.y[0]
    }
}

/// A point of the boundary R^N ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint<const N: usize = 1> {
    Finite([f64; N]),
    Infinity,
}

impl BoundaryPoint<1> {
    pub fn at(y: f64) -> Self {
        BoundaryPoint::Finite([y])
    }

    pub fn coord(&self) -> Option<f64> {
        match self {
            BoundaryPoint::Finite(y) => Some(y[0]),
            BoundaryPoint::Infinity => None,
        }
    }
}

/// cosh of the hyperbolic distance.
pub fn cosh_dist<const N: usize>(m: &HPoint<N>, m2: &HPoint<N>) -> f64 {
    1.0 + m.sq_gap(m2) / (2.0 * m.height * m2.height)
}

/// Hyperbolic distance, accurate for both tiny and large separations.
pub fn hyp_dist<const N: usize>(m: &HPoint<N>, m2: &HPoint<N>) -> f64 {
    let r = m.sq_gap(m2).sqrt() / (2.0 * (m.height * m2.height).sqrt());
    2.0 * r.asinh()
}

/// height / (height² + |y_m − y|²); zero at the point at infinity.
pub fn poisson_kernel<const N: usize>(m: &HPoint<N>, y: &BoundaryPoint<N>) -> f64 {
    match y {
        BoundaryPoint::Infinity => 0.0,
        BoundaryPoint::Finite(b) => {
            let s: f64 = m.y.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum();
            m.height / (m.height * m.height + s)
        }
    }
}

/// log σ with σ = 1/cosh d, stable for large d.
fn ln_sigma(d: f64) -> f64 {
    LN_2 - d - (-2.0 * d).exp().ln_1p()
}

/// Free resolvent kernel of H^{n+1} as a function of distance.
///
/// Values are σ^λ k_λ(σ) with σ = 1/cosh d, normalised so that the kernel
/// inverts Δ − λ(n − λ).
#[derive(Debug, Clone)]
pub struct GreenKernel {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GreenKernel {
    /// Kernel for H^{dim+1} with the given number of quadrature nodes per half interval.
    ///
    /// The nodes are spread over geometrically graded panels toward both
    /// endpoints of the integral, eight nodes per sixteen requested.
    pub fn new(dim: usize, quad_nodes: usize) -> Self {
        let (x, w) = gauss_legendre((quad_nodes / 8).max(4));
        let nodes = x.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let weights = w.iter().map(|w| 0.5 * w).collect();
        Self { dim, nodes, weights }
    }

    /// Surface case (n = 1) with 128 nodes.
    pub fn surface() -> Self {
        Self::new(1, 128)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Bind a spectral parameter.
    pub fn at(&self, lambda: Complex64) -> Result<GreenAt<'_>> {
        let n = self.dim as f64;
        if lambda.re <= 0.5 * (n - 1.0) {
            return Err(Error::Domain("green kernel needs Re(lambda) > (n-1)/2"));
        }
        let one = Complex64::new(1.0, 0.0);
        let ln_k0 = -(lambda + 1.0) * LN_2 - 0.5 * n * PI.ln() + ln_gamma(lambda)
            - ln_gamma(lambda - 0.5 * n + 1.0);
        let a = lambda - 0.5 * (n + 1.0);
        let ln_mass = a * LN_2 + 2.0 * ln_gamma(a + one) - ln_gamma(a * 2.0 + 2.0);
        Ok(GreenAt {
            kernel: self,
            lambda,
            ln_k0,
            ln_quad_pref: ln_k0 - ln_mass,
            a,
        })
    }

    /// Fast evaluation (series for large distance, quadrature otherwise).
    pub fn eval(&self, lambda: Complex64, d: f64) -> Result<Complex64> {
        check_distance(d)?;
        Ok(self.at(lambda)?.eval(d))
    }

    /// Evaluation by quadrature only.
    pub fn quadrature(&self, lambda: Complex64, d: f64) -> Result<Complex64> {
        check_distance(d)?;
        Ok(self.at(lambda)?.quadrature(d))
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("green kernel needs d > 0"))
    }
}

/// Green kernel at a fixed spectral parameter.
#[derive(Debug, Clone)]
pub struct GreenAt<'a> {
    kernel: &'a GreenKernel,
    lambda: Complex64,
    ln_k0: Complex64,
    ln_quad_pref: Complex64,
    a: Complex64,
}

const PANELS: usize = 10;
const PANEL_RATIO: f64 = 4.0;

const SERIES_SIGMA2: f64 = 0.6;

impl GreenAt<'_> {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn eval(&self, d: f64) -> Complex64 {
        let ls = ln_sigma(d);
        if 2.0 * ls < SERIES_SIGMA2.ln() {
            self.series_ln_sigma(ls)
        } else {
            self.quadrature(d)
        }
    }

    /// Hypergeometric series in σ²; valid for any d > 0 but slow near d = 0.
    pub fn series(&self, d: f64) -> Complex64 {
        self.series_ln_sigma(ln_sigma(d))
    }

    fn series_ln_sigma(&self, ls: f64) -> Complex64 {
        let n = self.kernel.dim as f64;
        let lam = self.lambda;
        let s2 = (2.0 * ls).exp();
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let c = lam - 0.5 * n + 1.0;
        for j in 0..4000 {
            let jf = j as f64;
            term *= (lam * 0.5 + jf) * ((lam + 1.0) * 0.5 + jf) / ((c + jf) * (jf + 1.0)) * s2;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() && jf > lam.norm() * s2 {
                break;
            }
        }
        (self.ln_k0 + lam * ls).exp() * sum
    }

    /// Gauss–Legendre quadrature of the integral representation.
    ///
    /// Each half of [0, 1] is cut into panels shrinking geometrically toward
    /// the endpoint; the innermost piece is integrated from a first-order
    /// Taylor expansion of the smooth factor.
    pub fn quadrature(&self, d: f64) -> Complex64 {
        let lam = self.lambda;
        let a = self.a;
        let ls = ln_sigma(d);
        let sigma = ls.exp();
        let one_minus_sigma = 2.0 * (0.5 * d).sinh().powi(2) * sigma;
        let mut acc = Complex64::new(0.0, 0.0);
        // τ is the distance to the endpoint; B(τ) = b0 + b1 τ.
        for (b0, b1) in [(1.0 + sigma, -2.0 * sigma), (one_minus_sigma, 2.0 * sigma)] {
            let integrand = |tau: f64| -> Complex64 {
                let base = (2.0 * tau * (1.0 - tau)).ln();
                (a * base - lam * (b0 + b1 * tau).ln()).exp()
            };
            let mut hi = 0.5;
            for _ in 0..PANELS {
                let lo = hi / PANEL_RATIO;
                let h = hi - lo;
                for (x, w) in self.kernel.nodes.iter().zip(self.kernel.weights.iter()) {
                    acc += integrand(lo + h * x) * (w * h);
                }
                hi = lo;
            }
            let t0 = hi;
            let h0 = (a * LN_2 - lam * b0.ln()).exp();
            let c1 = -a - lam * (b1 / b0);
            let one = Complex64::new(1.0, 0.0);
            let p1 = ((a + one) * t0.ln()).exp() / (a + one);
            let p2 = ((a + 2.0) * t0.ln()).exp() / (a + 2.0);
            acc += h0 * (p1 + c1 * p2);
        }
        (self.ln_quad_pref + lam * ls).exp() * acc
    }
}

/// Free Green kernel on the hyperbolic plane by quadrature with the given node count.
pub fn green_kernel(lambda: Complex64, d: f64, quad_nodes: usize) -> Result<Complex64> {
    GreenKernel::new(1, quad_nodes).quadrature(lambda, d)
}
