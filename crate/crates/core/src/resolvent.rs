//! Averaged resolvent kernel on the physical half-plane and its residue at λ = δ.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dimension::{u_delta_eval, AtomicMeasure};
use crate::error::{Error, Result};
use crate::hyperbolic::{hyp_dist, GreenKernel, HPoint};
use crate::schottky::{check_word_budget, walk_words, SchottkyGroup};
use crate::special::{extrapolate_to_zero, gamma_real, wynn_epsilon, ComplexSum};

/// Required gap between Re λ and δ̂ for the orbit sum.
pub const DEFAULT_MARGIN: f64 = 0.02;
/// Orbit points closer than this to the evaluation point are rejected.
pub const DIAGONAL_TOLERANCE: f64 = 1e-6;
/// Offsets λ − δ̂ used for the residue extrapolation.
pub const RESIDUE_OFFSETS: [f64; 4] = [0.08, 0.04, 0.02, 0.01];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventValue {
    pub value: Complex64,
    /// e^{−(Re λ − δ̂) ℓ_min(L)}, the geometric decay of the omitted layers
    /// relative to the leading ones.
    pub tail_bound: f64,
    pub words: usize,
}

/// R(λ; m, m2) = Σ_{|w| ≤ L} G(λ, d(m, w·m2)).
pub fn resolvent_kernel(
    group: &SchottkyGroup,
    lambda: Complex64,
    m: &HPoint<1>,
    m2: &HPoint<1>,
    max_len: usize,
    deltahat: f64,
    budget: usize,
) -> Result<ResolventValue> {
    if lambda.re <= deltahat + DEFAULT_MARGIN {
        return Err(Error::Domain("resolvent orbit sum needs Re(lambda) > delta + margin"));
    }
    check_word_budget(group.rank(), max_len, budget)?;
    let green = GreenKernel::surface();
    let g = green.at(lambda)?;
    let d0 = hyp_dist(m, m2);
    if d0 < DIAGONAL_TOLERANCE {
        return Err(Error::DiagonalProximity { index: 0, distance: d0 });
    }
    let mut sum = ComplexSum::new();
    sum.add(g.eval(d0));
    let mut words = 1usize;
    let mut failure = None;
    walk_words(group, max_len, |_, w| {
        let d = hyp_dist(m, &w.apply(m2));
        if d < DIAGONAL_TOLERANCE {
            failure.get_or_insert(Error::DiagonalProximity { index: words, distance: d });
            return false;
        }
        sum.add(g.eval(d));
        words += 1;
        true
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let ell_min = max_len as f64 * group.min_log_contraction();
    Ok(ResolventValue {
        value: sum.value(),
        tail_bound: (-(lambda.re - deltahat) * ell_min).exp(),
        words,
    })
}

/// Layer sums b_k = Σ_{|w| = k} G(λ, d(m_i, w·m_j)) for a set of points and
/// spectral parameters, from a single walk over the words.
#[derive(Debug, Clone)]
pub struct LayerSums {
    points: usize,
    lambdas: Vec<Complex64>,
    /// Indexed [lambda][i][j][k].
    sums: Vec<Vec<Vec<Vec<Complex64>>>>,
}

impl LayerSums {
    /// The identity term of a diagonal pair (i = i) is left out: it is
    /// singular, and a finite number of omitted terms does not move a pole.
    pub fn compute(
        group: &SchottkyGroup,
        points: &[HPoint<1>],
        lambdas: &[Complex64],
        max_len: usize,
        budget: usize,
    ) -> Result<Self> {
        check_word_budget(group.rank(), max_len, budget)?;
        let n = points.len();
        let green = GreenKernel::surface();
        let gs = lambdas.iter().map(|l| green.at(*l)).collect::<Result<Vec<_>>>()?;
        let mut acc = vec![vec![vec![vec![ComplexSum::new(); max_len + 1]; n]; n]; lambdas.len()];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = hyp_dist(&points[i], &points[j]);
                if d < DIAGONAL_TOLERANCE {
                    return Err(Error::DiagonalProximity { index: 0, distance: d });
                }
                for (l, g) in gs.iter().enumerate() {
                    acc[l][i][j][0].add(g.eval(d));
                }
            }
        }
        let mut failure = None;
        let mut count = 1usize;
        let mut images = vec![points[0]; n];
        walk_words(group, max_len, |w, map| {
            let k = w.len();
            for (img, p) in images.iter_mut().zip(points.iter()) {
                *img = map.apply(p);
            }
            for i in 0..n {
                for j in 0..n {
                    let d = hyp_dist(&points[i], &images[j]);
                    if d < DIAGONAL_TOLERANCE {
                        failure.get_or_insert(Error::DiagonalProximity { index: count, distance: d });
                        continue;
                    }
                    for (l, g) in gs.iter().enumerate() {
                        acc[l][i][j][k].add(g.eval(d));
                    }
                }
            }
            count += 1;
            true
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let sums = acc
            .into_iter()
            .map(|a| {
                a.into_iter()
                    .map(|row| row.into_iter().map(|c| c.into_iter().map(|s| s.value()).collect()).collect())
                    .collect()
            })
            .collect();
        Ok(Self { points: n, lambdas: lambdas.to_vec(), sums })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn layers(&self, lambda: usize, i: usize, j: usize) -> &[Complex64] {
        &self.sums[lambda][i][j]
    }

    /// Plain partial sum over all layers.
    pub fn partial(&self, lambda: usize, i: usize, j: usize) -> Complex64 {
        self.layers(lambda, i, j).iter().sum()
    }

    /// Orbit sum continued past the last layer by Wynn's ε-algorithm on the
    /// partial sums. Returns the value and the spread of the last two
    /// estimates.
    pub fn accelerated(&self, lambda: usize, i: usize, j: usize) -> (Complex64, f64) {
        let mut partial = Vec::with_capacity(self.sums[lambda][i][j].len());
        let mut s = Complex64::new(0.0, 0.0);
        for b in self.layers(lambda, i, j) {
            s += b;
            partial.push(s);
        }
        // the first layers are not yet in the geometric regime
        let skip = (partial.len() / 4).min(3);
        wynn_epsilon(&partial[skip..])
    }
}

/// Extrapolated residue for one pair of sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFit {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    /// Distance between the full extrapolant and the one without the coarsest offset.
    pub residual: f64,
    /// F(δ̂ + ε_k) for each offset.
    pub samples: Vec<f64>,
    /// Acceleration error of the orbit sums, largest over the offsets.
    pub series_error: f64,
    /// Each extrapolation level shrank the update at least twofold.
    pub stable: bool,
    /// Residual above 10% of |c|.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueEstimate {
    pub delta: f64,
    /// c_ij = lim (λ − δ) Γ(λ + 1/2) R(λ; m_i, m_j).
    pub c_values: Vec<Vec<f64>>,
    pub u_values: Vec<f64>,
    pub a_x: f64,
    /// (max − min)/|median| of c_ij/(u_i u_j) over all pairs.
    pub spread: f64,
    pub rank1_defect: f64,
    pub fit_diagnostics: Vec<PairFit>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueOptions {
    pub max_len: usize,
    pub budget: usize,
}

impl Default for ResidueOptions {
    fn default() -> Self {
        Self { max_len: 12, budget: crate::schottky::DEFAULT_WORD_BUDGET }
    }
}

/// Residue of the averaged resolvent at δ̂ on a set of sample points, and
/// the constant A_X of its rank-one form A_X u_δ ⊗ u_δ.
pub fn estimate_a_x(
    group: &SchottkyGroup,
    mu: &AtomicMeasure,
    deltahat: f64,
    samples: &[HPoint<1>],
    opts: ResidueOptions,
) -> Result<ResidueEstimate> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Insufficient("residue estimate needs at least 3 sample points"));
    }
    let lambdas: Vec<Complex64> = RESIDUE_OFFSETS.iter().map(|e| Complex64::new(deltahat + e, 0.0)).collect();
    let layers = LayerSums::compute(group, samples, &lambdas, opts.max_len, opts.budget)?;
    let u: Vec<f64> = samples.iter().map(|m| u_delta_eval(m, mu)).collect();
    let mut c = vec![vec![0.0; n]; n];
    let mut fits = Vec::with_capacity(n * n);
    let mut ratios = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut f = Vec::with_capacity(lambdas.len());
            let mut series_error: f64 = 0.0;
            for (l, eps) in RESIDUE_OFFSETS.iter().enumerate() {
                let (r, err) = layers.accelerated(l, i, j);
                let scale = eps * gamma_real(deltahat + eps + 0.5);
                f.push(Complex64::new(scale * r.re, 0.0));
                series_error = series_error.max(scale * err);
            }
            let (cij, residual) = extrapolate_to_zero(&RESIDUE_OFFSETS, &f);
            let stable = levels_contract(&RESIDUE_OFFSETS, &f);
            let cij = cij.re;
            c[i][j] = cij;
            ratios.push(cij / (u[i] * u[j]));
            fits.push(PairFit {
                i,
                j,
                c: cij,
                residual,
                samples: f.iter().map(|z| z.re).collect(),
                series_error,
                stable,
                failed: residual > 0.1 * cij.abs(),
            });
        }
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let a_x = median(&sorted);
    let spread = (sorted[sorted.len() - 1] - sorted[0]) / a_x.abs();
    let rank1_defect = rank1_defect(&c);
    Ok(ResidueEstimate {
        delta: deltahat,
        c_values: c,
        u_values: u,
        a_x,
        spread,
        rank1_defect,
        fit_diagnostics: fits,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// Extrapolants using the 1, 2, … coarsest samples; true if every update is
/// at most half the previous one.
fn levels_contract(h: &[f64], f: &[Complex64]) -> bool {
    let est: Vec<Complex64> = (1..=f.len()).map(|k| extrapolate_to_zero(&h[..k], &f[..k]).0).collect();
    est.windows(3).all(|w| (w[2] - w[1]).norm() <= 0.5 * (w[1] - w[0]).norm())
}

/// σ₂/σ₁ of a square matrix (0 for a 1×1 matrix).
pub fn rank1_defect(c: &[Vec<f64>]) -> f64 {
    let n = c.len();
    let m = DMatrix::from_fn(n, n, |i, j| c[i][j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    if s.len() < 2 || s[0] == 0.0 {
        return 0.0;
    }
    s[1] / s[0]
}
