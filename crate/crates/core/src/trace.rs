//! The resonance trace formula smoothed against a bump φ_{α,d}:
//!
//! (1/2)(Σ_res φ̂(−z) + Σ_k d_k φ̂(−ik)) = Σ_{γ,m} ℓ e^{−mℓ/2}/(2G_γ(m)) φ(mℓ) + χ ∫ φ(t) cosh(t/2)/(2 sinh(t/2))² dt
//!
//! with λ = 1/2 + iz and φ̂(ζ) = ∫ φ(t) e^{−itζ} dt.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::schottky::LengthSpectrum;
use crate::special::{bump, gauss_legendre, ComplexSum, KahanSum};
use crate::zeta::{resonance_multiplicity, Orientation, ResonanceHit};

/// Default total node count of the transform.
pub const DEFAULT_NODES: usize = 256;
const PANEL_NODES: usize = 64;
/// Largest phase change of e^{−itζ} per panel, in radians.
const PANEL_PHASE: f64 = 10.0;

/// sup_ω |∫ φ₀(s) e^{−iωs} ds| / ((1 + ω)^{−3/4} e^{−√ω}), sampled every
/// 0.01 on ω ∈ [0, 800] (8.82); beyond that the transform is below rounding.
/// The shape is the saddle-point decay of the transform of φ₀.
pub const BUMP_ENVELOPE: f64 = 9.0;

/// φ_{α,d}(t) = φ₀((t − d)/α), φ₀(s) = exp(1 − 1/(1 − s²)) on (−1, 1).
#[derive(Debug, Clone)]
pub struct TestFunction {
    alpha: f64,
    d: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TestFunction {
    pub fn new(alpha: f64, d: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(d > alpha) {
            return Err(Error::Domain("test function needs 0 < alpha < d"));
        }
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        Ok(Self { alpha, d, nodes, weights })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn support(&self) -> (f64, f64) {
        (self.d - self.alpha, self.d + self.alpha)
    }

    pub fn eval(&self, t: f64) -> f64 {
        bump((t - self.d) / self.alpha)
    }

    /// ∫ φ(t) g(t) dt over the support with `panels` equal Gauss–Legendre panels.
    fn integrate<F: FnMut(f64) -> Complex64>(&self, panels: usize, mut g: F) -> Complex64 {
        let mut acc = ComplexSum::new();
        let h = 2.0 / panels as f64;
        for p in 0..panels {
            let lo = -1.0 + p as f64 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let s = lo + 0.5 * h * (x + 1.0);
                let t = self.d + self.alpha * s;
                acc.add(g(t) * (bump(s) * w * 0.5 * h * self.alpha));
            }
        }
        acc.value()
    }

    /// φ̂(ζ) with at least `nodes` nodes, more when e^{−itζ} oscillates fast.
    pub fn phi_hat_with_nodes(&self, zeta: Complex64, nodes: usize) -> Complex64 {
        let base = nodes.div_ceil(PANEL_NODES).max(1);
        let phase = 2.0 * self.alpha * zeta.re.abs();
        let panels = base.max((phase / PANEL_PHASE).ceil() as usize);
        let i = Complex64::new(0.0, 1.0);
        // factor the carrier out so the integrand stays O(1)
        let carrier = (-i * zeta * self.d).exp();
        carrier * self.integrate(panels, |t| (-i * zeta * (t - self.d)).exp())
    }

    pub fn phi_hat(&self, zeta: Complex64) -> Complex64 {
        self.phi_hat_with_nodes(zeta, DEFAULT_NODES)
    }

    /// Bound on |φ̂(−z)| for Im z ≥ 0:
    /// α C e^{−d Im z + α|Im z|} (1 + α|Re z|)^{−3/4} e^{−√(α|Re z|)}.
    pub fn envelope(&self, z: Complex64) -> f64 {
        let w = self.alpha * z.re.abs();
        self.alpha * BUMP_ENVELOPE * (-self.d * z.im + self.alpha * z.im.abs()).exp() * (1.0 + w).powf(-0.75) * (-w.sqrt()).exp()
    }
}

/// C in |φ̂(−z)| ≤ α C e^{−d Im z + α|Im z|}/(1 + α|z|)², the supremum of
/// |φ̂₀(w)|(1 + |w|)² e^{−|Im w|} over Im w ∈ [0, 3], |w| ≤ 50 (8.75 near w = 2.75).
pub const A_PRIORI_CONSTANT: f64 = 9.0;

/// α e^{−d Im z + α|Im z|}/(1 + α|z|)², the a priori bound without its constant.
pub fn a_priori_shape(tf: &TestFunction, z: Complex64) -> f64 {
    tf.alpha * (-tf.d * z.im + tf.alpha * z.im.abs()).exp() / (1.0 + tf.alpha * z.norm()).powi(2)
}

/// Geodesic part and topological part of the geometric side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricSide {
    pub geodesic_sum: f64,
    pub topological_term: f64,
    /// Number of (γ, m) pairs inside the support.
    pub hits: usize,
}

/// Σ_{γ,m} w ℓ e^{−mℓ/2} φ(mℓ)/(2(1 − e^{−mℓ})) with w the class weight of
/// the orientation, and χ ∫ φ(t) cosh(t/2)/(2 sinh(t/2))² dt.
pub fn geometric_side(tf: &TestFunction, spectrum: &LengthSpectrum, chi: i64, m_max: usize, orientation: Orientation) -> Result<GeometricSide> {
    let (lo, hi) = tf.support();
    if spectrum.complete_below < hi {
        return Err(Error::Incomplete { complete_below: spectrum.complete_below, required: hi });
    }
    let w = orientation.class_weight();
    let mut sum = KahanSum::new();
    let mut hits = 0;
    for g in &spectrum.geodesics {
        let ell = g.length;
        for m in 1..=m_max {
            let t = m as f64 * ell;
            if t >= hi {
                break;
            }
            if t <= lo {
                continue;
            }
            hits += 1;
            sum.add(w * ell * (-0.5 * t).exp() * tf.eval(t) / (2.0 * -(-t).exp_m1()));
        }
    }
    let topo = tf.integrate(DEFAULT_NODES / PANEL_NODES, |t| {
        let s = 2.0 * (0.5 * t).sinh();
        Complex64::new((0.5 * t).cosh() / (s * s), 0.0)
    });
    Ok(GeometricSide { geodesic_sum: sum.value(), topological_term: chi as f64 * topo.re, hits })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSide {
    /// (1/2) Σ m_j φ̂(−z_j), imaginary part kept as a pairing check.
    pub resonance_sum: Complex64,
    pub dk_sum: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// What is known about the resonances beyond the supplied list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTail {
    /// Resonances with |z| > r_cut are missing.
    pub r_cut: f64,
    /// Resonances with Re λ < re_min are missing.
    pub re_min: f64,
    /// Largest Re λ of any resonance (δ̂).
    pub re_max: f64,
    /// C in N(r) ≤ C (1 + r)².
    pub count_constant: f64,
}

/// C = max N(r)/(1 + r)² over the radii of the hits themselves.
pub fn fit_count_constant(hits: &[ResonanceHit], chi: i64) -> f64 {
    let mut rs: Vec<(f64, usize)> = hits
        .iter()
        .map(|h| (spectral_z(h.lambda).norm(), resonance_multiplicity(h, chi)))
        .collect();
    rs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut n = 0usize;
    let mut c: f64 = 0.0;
    for (r, m) in rs {
        n += m;
        c = c.max(n as f64 / ((1.0 + r) * (1.0 + r)));
    }
    c
}

/// z with λ = 1/2 + iz.
pub fn spectral_z(lambda: Complex64) -> Complex64 {
    Complex64::new(0.0, -1.0) * (lambda - 0.5)
}

/// Resonance side of the formula from a list of hits (both members of each
/// conjugate pair present), the d_k values and a tail estimate.
///
/// The tail integrates the envelope of φ̂ against dN ≤ 2C(1 + r)dr beyond
/// r_cut, and bounds the resonances left of re_min inside r_cut by their
/// count times the envelope at Re λ = re_min.
pub fn spectral_side(tf: &TestFunction, hits: &[ResonanceHit], chi: i64, dk_values: &[f64], tail: &SpectralTail) -> SpectralSide {
    let mut acc = ComplexSum::new();
    let mut terms = 0;
    for h in hits {
        let m = resonance_multiplicity(h, chi);
        let z = spectral_z(h.lambda);
        if m == 0 || z.norm() > tail.r_cut {
            continue;
        }
        terms += 1;
        acc.add(tf.phi_hat(-z) * (0.5 * m as f64));
    }
    let mut dk = 0.0;
    for (k, d) in dk_values.iter().enumerate() {
        let kk = (k + 1) as f64;
        dk += 0.5 * d * tf.phi_hat(Complex64::new(0.0, -kk)).re;
    }
    SpectralSide { resonance_sum: acc.value(), dk_sum: dk, tail_bound: tail_bound(tf, tail), terms }
}

/// Node-doubling change of the resonance sum.
pub fn quadrature_bound(tf: &TestFunction, hits: &[ResonanceHit], chi: i64, r_cut: f64) -> f64 {
    let mut acc = KahanSum::new();
    for h in hits {
        let m = resonance_multiplicity(h, chi);
        let z = spectral_z(h.lambda);
        if m == 0 || z.norm() > r_cut {
            continue;
        }
        let d = tf.phi_hat_with_nodes(-z, DEFAULT_NODES) - tf.phi_hat_with_nodes(-z, 2 * DEFAULT_NODES);
        acc.add(0.5 * m as f64 * d.norm());
    }
    acc.value()
}

/// Bound on the resonances missing from a list described by `tail`.
pub fn tail_bound(tf: &TestFunction, tail: &SpectralTail) -> f64 {
    let y_far = 0.5 - tail.re_max;
    // beyond r_cut: (1/2) ∫_{R}^∞ env(r) 2C(1 + r) dr with env at the smallest Im z
    let far = {
        let env = |r: f64| tf.envelope(Complex64::new(r, y_far)) * (1.0 + r);
        let mut s = KahanSum::new();
        let mut a = tail.r_cut;
        let h = (1.0 / tf.alpha).max(1.0);
        let (x, w) = gauss_legendre(16);
        for _ in 0..4000 {
            let b = a + h;
            let mut part = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                part += wi * env(a + 0.5 * h * (xi + 1.0));
            }
            part *= 0.5 * h;
            s.add(part);
            if part < 1e-18 * s.value().abs().max(1e-300) {
                break;
            }
            a = b;
        }
        tail.count_constant * s.value()
    };
    let y_left = 0.5 - tail.re_min;
    let left = if tail.re_min.is_finite() {
        let n_inside = tail.count_constant * (1.0 + tail.r_cut).powi(2);
        0.5 * n_inside * tf.alpha * BUMP_ENVELOPE * (-(tf.d - tf.alpha) * y_left).exp()
    } else {
        0.0
    };
    far + left
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReport {
    pub geodesic_sum: f64,
    pub topological_term: f64,
    pub resonance_sum: f64,
    /// Imaginary part of the resonance sum; zero when zeros come in conjugate pairs.
    pub resonance_imag: f64,
    pub dk_sum: f64,
    pub tail_bound: f64,
    pub quadrature_bound: f64,
    pub rel_discrepancy: f64,
}

impl TraceReport {
    pub fn geometric(&self) -> f64 {
        self.geodesic_sum + self.topological_term
    }

    pub fn spectral(&self) -> f64 {
        self.resonance_sum + self.dk_sum
    }

    pub fn floor(&self) -> f64 {
        self.tail_bound + self.quadrature_bound
    }

    /// The error floor is below the geometric side, so the discrepancy
    /// measures something.
    pub fn is_meaningful(&self) -> bool {
        self.floor() < self.geometric().abs()
    }
}

/// Both sides and |geometric − spectral| / max(|geometric|, floor) with
/// floor = tail + quadrature bounds. A floor above the geometric side makes
/// the ratio small without saying anything; see [`TraceReport::is_meaningful`].
pub fn trace_report(geometric: &GeometricSide, spectral: &SpectralSide, quadrature_bound: f64) -> TraceReport {
    let geo = geometric.geodesic_sum + geometric.topological_term;
    let spec = spectral.resonance_sum.re + spectral.dk_sum;
    let floor = spectral.tail_bound + quadrature_bound;
    TraceReport {
        geodesic_sum: geometric.geodesic_sum,
        topological_term: geometric.topological_term,
        resonance_sum: spectral.resonance_sum.re,
        resonance_imag: spectral.resonance_sum.im,
        dk_sum: spectral.dk_sum,
        tail_bound: spectral.tail_bound,
        quadrature_bound,
        rel_discrepancy: (geo - spec).abs() / geo.abs().max(floor),
    }
}

/// Resonances of the cylinder of length ℓ₀: λ = −k + 2πij/ℓ₀ with
/// multiplicity 2 (both orientations), for |z| ≤ r_cut and k ≤ k_max.
pub fn cylinder_resonances(ell0: f64, r_cut: f64, k_max: usize) -> Vec<ResonanceHit> {
    let step = 2.0 * core::f64::consts::PI / ell0;
    let mut out = Vec::new();
    for k in 0..=k_max {
        let re = -(k as f64);
        let jmax = (r_cut / step).ceil() as i64 + 1;
        for j in -jmax..=jmax {
            let lambda = Complex64::new(re, j as f64 * step);
            if spectral_z(lambda).norm() > r_cut {
                continue;
            }
            out.push(ResonanceHit {
                lambda,
                multiplicity: 2,
                newton_residual: 0.0,
                bbox: crate::zeta::Rect { re_min: re, re_max: re, im_min: lambda.im, im_max: lambda.im },
                excluded: j == 0,
                converged: true,
            });
        }
    }
    out
}
