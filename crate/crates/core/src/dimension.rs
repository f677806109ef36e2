//! Limit-set dimension δ, atomic Patterson–Sullivan measure, the eigenfunction
//! u_δ and the boundary profile f_δ.

use alloc::vec::Vec;
use core::cmp::Ordering;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hyperbolic::{hyp_dist, poisson_kernel, BoundaryPoint, HPoint};
use crate::schottky::{check_word_budget, walk_words, word_count, MoebiusMap, SchottkyGroup};
use crate::special::ComplexSum;

/// Base point o = (0, 1).
pub fn base_point() -> HPoint<1> {
    HPoint::raw(0.0, 1.0)
}

/// Distance from o to g·o, using cosh d = (a² + b² + c² + d²)/2.
pub(crate) fn base_orbit_distance(g: &MoebiusMap) -> f64 {
    let [a, b, c, d] = g.entries();
    // ad − bc = 1; recomputing it cancels catastrophically for long words
    let ch = 0.5 * (a * a + b * b + c * c + d * d);
    // acosh(1 + x) computed without cancellation
    let x = ch - 1.0;
    (x + (x * (x + 2.0)).sqrt()).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMethod {
    Pressure,
    ZetaRoot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    pub value: f64,
    pub bracket: (f64, f64),
    pub word_length_used: usize,
    pub method: DeltaMethod,
}

impl DeltaEstimate {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Σ_{|w| ≤ L} exp(−λ d(m, w·m2)).
pub fn poincare_partial(
    group: &SchottkyGroup,
    lambda: Complex64,
    m: &HPoint<1>,
    m2: &HPoint<1>,
    max_len: usize,
    budget: usize,
) -> Result<Complex64> {
    check_word_budget(group.rank(), max_len, budget)?;
    let mut sum = ComplexSum::new();
    sum.add((-lambda * hyp_dist(m, m2)).exp());
    walk_words(group, max_len, |_, g| {
        sum.add((-lambda * hyp_dist(m, &g.apply(m2))).exp());
        true
    });
    Ok(sum.value())
}

/// Orbit distances d(o, w·o) for words of length first..=last, one list per length.
fn distance_layers(group: &SchottkyGroup, first: usize, last: usize) -> Vec<Vec<f64>> {
    let mut layers: Vec<Vec<f64>> = (first..=last)
        .map(|k| Vec::with_capacity(word_count(group.rank(), k)))
        .collect();
    walk_words(group, last, |w, g| {
        if w.len() >= first {
            layers[w.len() - first].push(base_orbit_distance(g));
        }
        true
    });
    layers
}

/// log Σ e^{−s d_i}, shifted for range safety.
fn log_layer_sum(ds: &[f64], s: f64) -> f64 {
    let dmin = ds.iter().copied().fold(f64::INFINITY, f64::min);
    let mut acc = 0.0;
    for d in ds {
        acc += (-s * (d - dmin)).exp();
    }
    acc.ln() - s * dmin
}

/// Root of s ↦ log(a_k(s)/a_{k−1}(s)) on [0, n].
fn pressure_root(prev: &[f64], cur: &[f64], n: f64) -> Result<f64> {
    let g = |s: f64| log_layer_sum(cur, s) - log_layer_sum(prev, s);
    let (mut lo, mut hi) = (0.0, n);
    if g(lo) <= 0.0 {
        // elementary groups: the layer sums never grow
        return Ok(0.0);
    }
    if g(hi) >= 0.0 {
        return Err(Error::Convergence("no sign change of the pressure on (0, n)"));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// δ from the growth of the layer sums a_k(s) = Σ_{|w|=k} e^{−s d(o, w·o)}.
pub fn estimate_delta(group: &SchottkyGroup, max_len: usize, budget: usize) -> Result<DeltaEstimate> {
    if max_len < 4 {
        return Err(Error::Domain("estimate_delta needs L >= 4"));
    }
    check_word_budget(group.rank(), max_len, budget)?;
    let layers = distance_layers(group, max_len - 3, max_len);
    let mut roots = [0.0; 3];
    for (i, r) in roots.iter_mut().enumerate() {
        *r = pressure_root(&layers[i], &layers[i + 1], 1.0)?;
    }
    let lo = roots.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DeltaEstimate {
        value: roots[2],
        bracket: (lo, hi),
        word_length_used: max_len,
        method: DeltaMethod::Pressure,
    })
}

/// Atomic approximation of the Patterson–Sullivan measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    pub atoms: Vec<(BoundaryPoint<1>, f64)>,
    pub exponent: f64,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<(BoundaryPoint<1>, f64)>, exponent: f64) -> Self {
        Self { atoms, exponent }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// ∫ y dμ.
    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .filter_map(|(y, w)| y.coord().map(|y| y * w))
            .sum()
    }
}

/// Atoms at the shadows of w·o for all words of length exactly L.
///
/// The weight of an atom is e^{−δ d(o, w·o)} P(o, y_w)^{−δ}, i.e. the
/// Euclidean derivative of w at its shadow raised to δ. The Poisson factor
/// converts the visual size seen from o into the Euclidean one in which the
/// δ-conformality of the density is expressed.
pub fn ps_measure(group: &SchottkyGroup, delta: f64, max_len: usize, budget: usize) -> Result<AtomicMeasure> {
    check_word_budget(group.rank(), max_len, budget)?;
    let o = base_point();
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(word_count(group.rank(), max_len));
    let mut push = |g: &MoebiusMap| {
        let p = g.apply(&o);
        let y = p.y();
        let ln_w = -delta * base_orbit_distance(g) - delta * poisson_kernel(&o, &BoundaryPoint::at(y)).ln();
        atoms.push((y, ln_w));
    };
    if max_len == 0 {
        push(&MoebiusMap::identity());
    } else {
        walk_words(group, max_len, |w, g| {
            if w.len() == max_len {
                push(g);
            }
            true
        });
    }
    let top = atoms.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for a in atoms.iter_mut() {
        a.1 = (a.1 - top).exp();
        total += a.1;
    }
    atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let atoms = atoms
        .into_iter()
        .map(|(y, w)| (BoundaryPoint::at(y), w / total))
        .collect();
    Ok(AtomicMeasure { atoms, exponent: delta })
}

/// u_δ(m) = Σ_j w_j P(m, y_j)^δ.
pub fn u_delta_eval(m: &HPoint<1>, mu: &AtomicMeasure) -> f64 {
    let mut acc = 0.0;
    for (y, w) in &mu.atoms {
        acc += w * poisson_kernel(m, y).powf(mu.exponent);
    }
    acc
}

/// ∫ |y − y'|^{−2δ} dμ(y') for y off the hull of the atoms.
pub fn f_delta_profile(y: &BoundaryPoint<1>, mu: &AtomicMeasure) -> Result<f64> {
    let Some(y) = y.coord() else {
        return Ok(0.0);
    };
    let coords = mu.atoms.iter().filter_map(|(p, _)| p.coord());
    let (lo, hi) = coords.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| (a.min(c), b.max(c)));
    let gap = if y < lo { lo - y } else if y > hi { y - hi } else { 0.0 };
    if gap < 1e-6 {
        if lo <= y && y <= hi && lo < hi {
            return Err(Error::Domain("profile point lies inside the hull of the atoms"));
        }
        return Err(Error::Proximity { distance: gap });
    }
    let mut acc = 0.0;
    for (p, w) in &mu.atoms {
        if let Some(c) = p.coord() {
            acc += w * (y - c).abs().powf(-2.0 * mu.exponent);
        }
    }
    Ok(acc)
}
