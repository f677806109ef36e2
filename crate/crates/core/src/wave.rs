//! Wave solutions from the spectral representation, their decay rate, and
//! the leading term predicted by the resonance at δ.
//!
//! The field at m is
//!
//! u(t, m) = (1/2π) ∫_{−V}^{V} e^{itv} e^{−τv²} Σ_j w_j [R(1/2 + iv; m, m_j) − R(1/2 − iv; m, m_j)] dv
//!
//! for f₁ atoms, with an extra factor iv for f₀ atoms (the cosine branch).
//! τ is the heat mollifier width of the data. Each R is an orbit sum of free
//! Green kernels; with τ > 0 the orbit points much farther than t from m
//! contribute e^{−(d − t)²/4τ} and are cut off, so the orbit is enumerated
//! once inside a ball and the spectral sums are cached on the v panels.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dimension::{u_delta_eval, AtomicMeasure};
use crate::error::{Error, Result};
use crate::hyperbolic::{GreenKernel, HPoint};
use crate::resolvent::{ResidueEstimate, DIAGONAL_TOLERANCE};
use crate::schottky::{orbit_distances_within, SchottkyGroup, DEFAULT_WORD_BUDGET};
use crate::special::{gamma_real, gk15_combine, gk15_nodes};

/// ln of the mollifier level below which the v-integrand is dropped.
const MOLLIFIER_CUT: f64 = 46.0;

/// Point-source initial data u(0) = Σ w f₀ atoms, ∂ₜu(0) = Σ w f₁ atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub f0_atoms: Vec<(HPoint<1>, f64)>,
    pub f1_atoms: Vec<(HPoint<1>, f64)>,
    /// τ in the spectral factor e^{−τv²}; 0 gives the bare band-limited field.
    pub mollifier_width: f64,
}

impl InitialData {
    pub fn new(f0_atoms: Vec<(HPoint<1>, f64)>, f1_atoms: Vec<(HPoint<1>, f64)>, mollifier_width: f64) -> Result<Self> {
        if f0_atoms.is_empty() && f1_atoms.is_empty() {
            return Err(Error::Insufficient("initial data needs at least one atom"));
        }
        if !(mollifier_width >= 0.0) {
            return Err(Error::Domain("mollifier width must be non-negative"));
        }
        Ok(Self { f0_atoms, f1_atoms, mollifier_width })
    }

    /// A single f₁ source of unit weight.
    pub fn source(m: HPoint<1>, mollifier_width: f64) -> Self {
        Self { f0_atoms: Vec::new(), f1_atoms: alloc::vec![(m, 1.0)], mollifier_width }
    }

    /// Same data with every weight multiplied by s.
    pub fn scaled(&self, s: f64) -> Self {
        let sc = |a: &[(HPoint<1>, f64)]| a.iter().map(|(m, w)| (*m, w * s)).collect();
        Self { f0_atoms: sc(&self.f0_atoms), f1_atoms: sc(&self.f1_atoms), mollifier_width: self.mollifier_width }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveOptions {
    /// Band limit V.
    pub band_limit: f64,
    pub panel_width: f64,
    pub rel_tol: f64,
    /// Orbit points with d(m, γ m_j) > t_max + margin are dropped. When
    /// absent the margin is √(4τ·46), or 30 for τ = 0.
    pub orbit_margin: Option<f64>,
    pub max_panels: usize,
    pub budget: usize,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            band_limit: 40.0,
            panel_width: 0.25,
            rel_tol: 1e-8,
            orbit_margin: None,
            max_panels: 20_000,
            budget: DEFAULT_WORD_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveValue {
    pub t: f64,
    pub value: f64,
    /// Imaginary part of the assembled integral.
    pub imag: f64,
    /// Quadrature error estimate.
    pub error: f64,
}

/// Field evaluator at a fixed point for times up to t_max.
#[derive(Debug)]
pub struct WaveSolver {
    t_max: f64,
    tau: f64,
    v_max: f64,
    opts: WaveOptions,
    green: GreenKernel,
    /// (weight, distances) per f₀ and f₁ atom.
    f0: Vec<(f64, Vec<f64>)>,
    f1: Vec<(f64, Vec<f64>)>,
    /// Panel → (Σ f₀ part, Σ f₁ part) at the Kronrod nodes, keyed by endpoint bits.
    cache: BTreeMap<(u64, u64), ([Complex64; 15], [Complex64; 15])>,
}

impl WaveSolver {
    pub fn new(group: &SchottkyGroup, m: &HPoint<1>, data: &InitialData, t_max: f64, opts: WaveOptions) -> Result<Self> {
        if !(t_max >= 0.0) || !(opts.band_limit > 0.0) || !(opts.panel_width > 0.0) {
            return Err(Error::Domain("wave solver needs t_max >= 0, V > 0 and a positive panel width"));
        }
        let tau = data.mollifier_width;
        let margin = opts.orbit_margin.unwrap_or(if tau > 0.0 { (4.0 * tau * MOLLIFIER_CUT).sqrt() } else { 30.0 });
        let radius = t_max + margin;
        let mut v_max = opts.band_limit;
        if tau > 0.0 {
            v_max = v_max.min((MOLLIFIER_CUT / tau).sqrt());
        }
        // whole panels, symmetric about 0
        let v_max = (v_max / opts.panel_width).ceil() * opts.panel_width;
        let orbit = |atoms: &[(HPoint<1>, f64)]| -> Result<Vec<(f64, Vec<f64>)>> {
            atoms
                .iter()
                .enumerate()
                .map(|(i, (p, w))| {
                    let ds = orbit_distances_within(group, m, p, radius, opts.budget)?;
                    if let Some(d) = ds.first() {
                        if *d < DIAGONAL_TOLERANCE {
                            return Err(Error::DiagonalProximity { index: i, distance: *d });
                        }
                    }
                    Ok((*w, ds))
                })
                .collect()
        };
        Ok(Self {
            t_max,
            tau,
            v_max,
            opts,
            green: GreenKernel::surface(),
            f0: orbit(&data.f0_atoms)?,
            f1: orbit(&data.f1_atoms)?,
            cache: BTreeMap::new(),
        })
    }

    /// Number of orbit points kept over all atoms.
    pub fn orbit_size(&self) -> usize {
        self.f0.iter().chain(self.f1.iter()).map(|(_, d)| d.len()).sum()
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    fn spectral_sum(&self, atoms: &[(f64, Vec<f64>)], v: f64) -> Complex64 {
        if atoms.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        // Re λ = 1/2 is inside the kernel's domain
        let g = self.green.at(Complex64::new(0.5, v)).expect("Re(lambda) = 1/2 > 0");
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, ds) in atoms {
            let mut s = Complex64::new(0.0, 0.0);
            for d in ds {
                s += g.eval(*d);
            }
            acc += s * *w;
        }
        acc
    }

    fn panel(&mut self, a: f64, b: f64) -> ([Complex64; 15], [Complex64; 15]) {
        let key = (a.to_bits(), b.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let xs = gk15_nodes(a, b);
        let mut s0 = [Complex64::new(0.0, 0.0); 15];
        let mut s1 = [Complex64::new(0.0, 0.0); 15];
        for k in 0..15 {
            s0[k] = self.spectral_sum(&self.f0, xs[k]);
            s1[k] = self.spectral_sum(&self.f1, xs[k]);
        }
        self.cache.insert(key, (s0, s1));
        (s0, s1)
    }

    fn panel_integral(&mut self, t: f64, a: f64, b: f64) -> (Complex64, f64) {
        let (p0, p1) = self.panel(a, b);
        // R(1/2 − iv) at node k is R(1/2 + iv') at the mirrored node of [−b, −a]
        let (m0, m1) = self.panel(-b, -a);
        let xs = gk15_nodes(a, b);
        let mut f = [Complex64::new(0.0, 0.0); 15];
        for k in 0..15 {
            let v = xs[k];
            let jump0 = p0[k] - m0[14 - k];
            let jump1 = p1[k] - m1[14 - k];
            let spectral = jump1 + Complex64::new(0.0, v) * jump0;
            let weight = Complex64::new(-self.tau * v * v, t * v).exp() / (2.0 * PI);
            f[k] = weight * spectral;
        }
        gk15_combine(a, b, &f)
    }

    /// u(t, m), refining panels until the error estimate is below rel_tol
    /// times Σ|panel integrals|.
    pub fn field(&mut self, t: f64) -> Result<WaveValue> {
        if t.abs() > self.t_max {
            return Err(Error::Domain("time beyond the solver's t_max"));
        }
        let h = self.opts.panel_width;
        let n = (self.v_max / h).round() as i64;
        let mut panels: Vec<(f64, f64, Complex64, f64)> = Vec::with_capacity(2 * n as usize);
        for i in -n..n {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let (val, err) = self.panel_integral(t, a, b);
            panels.push((a, b, val, err));
        }
        loop {
            let total: Complex64 = panels.iter().map(|p| p.2).sum();
            let scale: f64 = panels.iter().map(|p| p.2.norm()).sum();
            let err: f64 = panels.iter().map(|p| p.3).sum();
            if err <= self.opts.rel_tol * scale || scale == 0.0 {
                return Ok(WaveValue { t, value: total.re, imag: total.im, error: err });
            }
            if panels.len() >= self.opts.max_panels {
                return Err(Error::Convergence("wave quadrature did not reach its tolerance"));
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
            let (a, b, _, _) = panels.swap_remove(worst);
            let mid = 0.5 * (a + b);
            for (lo, hi) in [(a, mid), (mid, b)] {
                let (val, err) = self.panel_integral(t, lo, hi);
                panels.push((lo, hi, val, err));
            }
        }
    }
}

/// One-shot field evaluation.
pub fn wave_field(group: &SchottkyGroup, t: f64, m: &HPoint<1>, data: &InitialData, opts: WaveOptions) -> Result<WaveValue> {
    WaveSolver::new(group, m, data, t.abs(), opts)?.field(t)
}

/// Log-linear fit of |u| against t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// RMS residual of the fit in log|u|.
    pub residual: f64,
    /// δ̂ − 1/2.
    pub predicted_rate: f64,
}

impl DecayFit {
    /// |rate − predicted| / |predicted|.
    pub fn rate_error(&self) -> f64 {
        (self.rate - self.predicted_rate).abs() / self.predicted_rate.abs()
    }
}

/// Least-squares line through (t, log|u|). Every sample must exceed ten
/// times the noise floor.
pub fn decay_fit(samples: &[(f64, f64)], deltahat: f64, noise_floor: f64) -> Result<DecayFit> {
    if samples.len() < 8 {
        return Err(Error::Insufficient("decay fit needs at least 8 samples"));
    }
    if samples.iter().any(|(_, u)| !(u.abs() > 10.0 * noise_floor)) {
        return Err(Error::Insufficient("samples within ten times the quadrature noise floor"));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Insufficient("decay fit needs distinct times"));
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - rate * x).powi(2)).sum();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        rate,
        intercept,
        window: (lo, hi),
        residual: (ss / n).sqrt(),
        predicted_rate: deltahat - 0.5,
    })
}

/// t ↦ amplitude · e^{−rate·t}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingTerm {
    pub amplitude: f64,
    pub rate: f64,
}

impl LeadingTerm {
    pub fn eval(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * (-self.rate * t).exp()
    }
}

/// Contribution of the pole at δ̂:
/// [A_X/Γ(δ̂ + 1/2)] e^{τβ²} e^{−βt} (Σ w₁ u_δ(m_j) − β Σ w₀ u_δ(m_j)) u_δ(m), β = 1/2 − δ̂.
///
/// e^{τβ²} is the mollifier evaluated at the pole v = iβ.
pub fn leading_term(m: &HPoint<1>, data: &InitialData, residue: &ResidueEstimate, mu: &AtomicMeasure, deltahat: f64) -> LeadingTerm {
    let beta = 0.5 - deltahat;
    let pair = |atoms: &[(HPoint<1>, f64)]| atoms.iter().map(|(p, w)| w * u_delta_eval(p, mu)).sum::<f64>();
    let pairing = pair(&data.f1_atoms) - beta * pair(&data.f0_atoms);
    let amplitude = residue.a_x / gamma_real(deltahat + 0.5)
        * (data.mollifier_width * beta * beta).exp()
        * pairing
        * u_delta_eval(m, mu);
    LeadingTerm { amplitude, rate: beta }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderReport {
    /// (t, r(t), |r(t)| e^{(1/2 + δ̂²)t}).
    pub rows: Vec<(f64, f64, f64)>,
    pub sup_envelope: f64,
    /// max/min of the envelope statistic over the window (1 when constant).
    pub envelope_ratio: f64,
}

/// r(t) = u(t) − leading(t), scaled by the improved remainder rate.
pub fn remainder_analysis(samples: &[(f64, f64)], leading: &LeadingTerm, deltahat: f64) -> RemainderReport {
    let k = 0.5 + deltahat * deltahat;
    let rows: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|(t, u)| {
            let r = u - leading.eval(*t);
            (*t, r, r.abs() * (k * t).exp())
        })
        .collect();
    let sup = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let inf = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let envelope_ratio = if sup == 0.0 { 1.0 } else { sup / inf };
    RemainderReport { rows, sup_envelope: sup, envelope_ratio }
}
