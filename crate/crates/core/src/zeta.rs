//! Selberg zeta function: the Dirichlet double sum right of δ, the cycle
//! expansion and a transfer-operator determinant for the continuation, zeros
//! by the argument principle, and counting statistics.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dimension::{DeltaEstimate, DeltaMethod};
use crate::error::{Error, Result};
use crate::schottky::{inv_letter, walk_words, word_count, LengthSpectrum, LetterId, SchottkyGroup};
use crate::special::ComplexSum;

const EPS: f64 = f64::EPSILON;

/// How closed geodesics are counted in products and sums.
///
/// `Oriented` counts γ and γ⁻¹ separately, which is what the periodic words of
/// the coding produce; its zeros carry the resolvent multiplicities.
/// `Unoriented` counts each geodesic once. Its product is only entire for
/// rank 1, so the continuation engines reject it elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Oriented,
    Unoriented,
}

impl Orientation {
    /// Weight of one unoriented primitive class.
    pub fn class_weight(self) -> f64 {
        match self {
            Orientation::Oriented => 2.0,
            Orientation::Unoriented => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaMethod {
    Dirichlet,
    CycleExpansion,
    TransferOperator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub lambda: Complex64,
    pub value: Complex64,
    pub derivative: Complex64,
    pub truncation_bound: f64,
    /// Rounding error estimate from the magnitude of cancelling terms.
    pub roundoff_bound: f64,
    pub method: ZetaMethod,
}

/// Anything that evaluates Z and Z'.
pub trait ZetaFunction {
    fn eval(&self, lambda: Complex64) -> Complex64;
    fn eval_with_derivative(&self, lambda: Complex64) -> (Complex64, Complex64);

    /// log|Z| + i arg Z; overridden where Z itself overflows.
    fn log_eval(&self, lambda: Complex64) -> Complex64 {
        self.eval(lambda).ln()
    }

    /// Z'/Z.
    fn log_derivative(&self, lambda: Complex64) -> Complex64 {
        let (f, d) = self.eval_with_derivative(lambda);
        d / f
    }
}

/// Z(λ) = exp(−w Σ_γ Σ_{m ≤ m_max} e^{−λmℓ}/(m(1 − e^{−mℓ}))), w the class weight.
pub fn zeta_dirichlet(
    lambda: Complex64,
    spectrum: &LengthSpectrum,
    m_max: usize,
    delta_est: f64,
    orientation: Orientation,
) -> Result<ZetaValue> {
    let sigma = lambda.re;
    if sigma <= delta_est + 0.05 {
        return Err(Error::Domain("dirichlet series needs Re(lambda) > delta + 0.05"));
    }
    if m_max == 0 {
        return Err(Error::Domain("m_max must be positive"));
    }
    let w = orientation.class_weight();
    let mut s = ComplexSum::new();
    let mut ds = ComplexSum::new();
    let mut abs_sum = 0.0;
    let mut m_tail = 0.0;
    for g in &spectrum.geodesics {
        let l = g.length;
        for m in 1..=m_max {
            let ml = m as f64 * l;
            let term = (-lambda * ml).exp() / (m as f64 * -(-ml).exp_m1());
            s.add(term);
            ds.add(-term * ml);
            abs_sum += term.norm();
        }
        let m1 = (m_max + 1) as f64;
        m_tail += (-sigma * m1 * l).exp() / (m1 * -(-l).exp_m1() * -(-sigma * l).exp_m1());
    }
    let tail = m_tail + geodesic_tail(spectrum, sigma, delta_est);
    let value = (-s.value() * w).exp();
    Ok(ZetaValue {
        lambda,
        value,
        derivative: value * (-ds.value() * w),
        truncation_bound: value.norm() * (w * tail).exp_m1(),
        roundoff_bound: value.norm() * w * abs_sum * 4.0 * EPS,
        method: ZetaMethod::Dirichlet,
    })
}

/// Estimate of Σ_{ℓ(γ) > C} e^{−σℓ}/(1 − e^{−ℓ}) from N(ℓ) ≲ B e^{δℓ}/ℓ,
/// with B fitted on the upper half of the listed lengths.
fn geodesic_tail(spectrum: &LengthSpectrum, sigma: f64, delta: f64) -> f64 {
    let c = spectrum.complete_below;
    if delta <= 0.0 || spectrum.geodesics.is_empty() || c <= 0.0 {
        return 0.0;
    }
    let mut b: f64 = 0.0;
    for (i, g) in spectrum.geodesics.iter().enumerate() {
        if g.length >= 0.5 * c && g.length <= c {
            b = b.max((i + 1) as f64 * g.length * (-delta * g.length).exp());
        }
    }
    b * delta * (-(sigma - delta) * c).exp() / (c * (sigma - delta) * -(-c).exp_m1())
}

/// Cyclically reduced words grouped by word length, and the prime cycles
/// (primitive classes) with multiplicities.
#[derive(Debug, Clone)]
pub struct CycleTable {
    levels: Vec<Vec<(f64, f64)>>,
    primes: Vec<PrimeCycle>,
}

/// A primitive class: translation length, word length and how many classes
/// share both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeCycle {
    pub length: f64,
    pub word_length: usize,
    pub multiplicity: usize,
}

fn is_primitive_letters(w: &[LetterId]) -> bool {
    let k = w.len();
    (1..k).filter(|p| k.is_multiple_of(*p)).all(|p| (0..k).any(|i| w[i] != w[i % p]))
}

/// Sort and merge equal lengths, summing the weights.
fn merge_lengths(mut ls: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    ls.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (l, c) in ls {
        match out.last_mut() {
            Some((l0, c0)) if (l - *l0).abs() <= 1e-12 * l0.max(1.0) => *c0 += c,
            _ => out.push((l, c)),
        }
    }
    out
}

impl CycleTable {
    pub fn build(group: &SchottkyGroup, n_max: usize, orientation: Orientation, budget: usize) -> Result<Self> {
        if orientation == Orientation::Unoriented && group.rank() != 1 {
            return Err(Error::Unsupported("unoriented continuation needs rank 1"));
        }
        let mut total = 0usize;
        for k in 1..=n_max {
            total = total.saturating_add(word_count(group.rank(), k));
        }
        if total > budget {
            return Err(Error::Budget { budget });
        }
        let unit = match orientation {
            Orientation::Oriented => 1.0,
            Orientation::Unoriented => 0.5,
        };
        let mut raw: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_max];
        let mut raw_primes: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_max];
        walk_words(group, n_max, |w, m| {
            let k = w.len();
            if k == 1 || w[k - 1] != inv_letter(w[0]) {
                let t = m.trace().abs();
                let l = 2.0 * (0.5 * t).acosh();
                raw[k - 1].push((l, unit));
                // each of the k rotations carries 1/k of the class
                if is_primitive_letters(w) {
                    raw_primes[k - 1].push((l, unit / k as f64));
                }
            }
            true
        });
        let levels = raw.into_iter().map(merge_lengths).collect();
        let mut primes = Vec::new();
        for (k, ls) in raw_primes.into_iter().enumerate() {
            for (length, weight) in merge_lengths(ls) {
                let multiplicity = weight.round().max(1.0) as usize;
                primes.push(PrimeCycle { length, word_length: k + 1, multiplicity });
            }
        }
        Ok(Self { levels, primes })
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    /// Entries (length, count) at word length k ≥ 1.
    pub fn level(&self, k: usize) -> &[(f64, f64)] {
        &self.levels[k - 1]
    }

    pub fn primes(&self) -> &[PrimeCycle] {
        &self.primes
    }

    /// t_k(λ) and t_k'(λ) for k = 1..=n_max.
    pub fn traces(&self, lambda: Complex64) -> Vec<(Complex64, Complex64)> {
        self.levels
            .iter()
            .map(|lv| {
                let mut t = ComplexSum::new();
                let mut dt = ComplexSum::new();
                for (l, c) in lv {
                    let term = (-lambda * *l).exp() * (*c / -(-l).exp_m1());
                    t.add(term);
                    dt.add(-term * *l);
                }
                (t.value(), dt.value())
            })
            .collect()
    }
}

/// Cycle expansion Z = Σ_N d_N, the grading N being word length.
///
/// d_N is defined by d_N = −(1/N) Σ_k t_k d_{N−k}. That recursion cancels
/// catastrophically left of δ, so the same coefficients are assembled as the
/// graded product over prime cycles of Π_k (1 − z^n e^{−(λ+k)ℓ}), each factor
/// expanded by the q-binomial series Σ_j (−1)^j q^{j(j−1)/2} x^j / (q;q)_j.
#[derive(Debug, Clone)]
pub struct CycleExpansion {
    table: CycleTable,
}

impl CycleExpansion {
    pub fn new(group: &SchottkyGroup, n_max: usize, orientation: Orientation, budget: usize) -> Result<Self> {
        Ok(Self { table: CycleTable::build(group, n_max, orientation, budget)? })
    }

    pub fn from_table(table: CycleTable) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &CycleTable {
        &self.table
    }

    /// Coefficients d_0..=d_N together with their λ-derivatives.
    pub fn coefficients(&self, lambda: Complex64) -> Vec<(Complex64, Complex64)> {
        let n = self.table.n_max();
        let zero = Complex64::new(0.0, 0.0);
        let mut d = vec![(zero, zero); n + 1];
        d[0].0 = Complex64::new(1.0, 0.0);
        let mut f: Vec<(Complex64, Complex64)> = Vec::with_capacity(n + 1);
        for p in &self.table.primes {
            prime_factor(p, lambda, n, &mut f);
            for _ in 0..p.multiplicity {
                for big_n in (1..=n).rev() {
                    let (mut v, mut dv) = d[big_n];
                    for (j, (a, da)) in f.iter().enumerate().skip(1) {
                        let Some(rest) = big_n.checked_sub(j * p.word_length) else { break };
                        let (b, db) = d[rest];
                        v += a * b;
                        dv += da * b + a * db;
                    }
                    d[big_n] = (v, dv);
                }
            }
        }
        d
    }

    /// The same product on absolute values: the size of the terms that cancel.
    fn magnitudes(&self, lambda: Complex64) -> Vec<f64> {
        let n = self.table.n_max();
        let mut d = vec![0.0; n + 1];
        d[0] = 1.0;
        let mut f = Vec::with_capacity(n + 1);
        for p in &self.table.primes {
            prime_factor(p, lambda, n, &mut f);
            for _ in 0..p.multiplicity {
                for big_n in (1..=n).rev() {
                    let mut v = d[big_n];
                    for (j, (a, _)) in f.iter().enumerate().skip(1) {
                        let Some(rest) = big_n.checked_sub(j * p.word_length) else { break };
                        v += a.norm() * d[rest];
                    }
                    d[big_n] = v;
                }
            }
        }
        d
    }

    pub fn value(&self, lambda: Complex64) -> ZetaValue {
        let d = self.coefficients(lambda);
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for (a, b) in &d {
            v += a;
            dv += b;
        }
        let scale: f64 = self.magnitudes(lambda).iter().sum();
        ZetaValue {
            lambda,
            value: v,
            derivative: dv,
            truncation_bound: d.last().map_or(0.0, |x| x.0.norm()),
            roundoff_bound: 4.0 * EPS * d.len() as f64 * scale,
            method: ZetaMethod::CycleExpansion,
        }
    }
}

/// Series coefficients of Π_k (1 − x q^k) in powers of x, with x = e^{−λℓ},
/// q = e^{−ℓ}, up to total word length n; paired with their λ-derivatives.
fn prime_factor(p: &PrimeCycle, lambda: Complex64, n: usize, out: &mut Vec<(Complex64, Complex64)>) {
    out.clear();
    let q = (-p.length).exp();
    let mut a = 1.0;
    for j in 0..=n / p.word_length {
        if j > 0 {
            a *= -q.powi(j as i32 - 1) / -(-(j as f64) * p.length).exp_m1();
        }
        let v = (-lambda * (j as f64 * p.length)).exp() * a;
        out.push((v, -v * (j as f64 * p.length)));
    }
}

impl ZetaFunction for CycleExpansion {
    fn eval(&self, lambda: Complex64) -> Complex64 {
        let d = self.coefficients(lambda);
        d.iter().map(|x| x.0).sum()
    }

    fn eval_with_derivative(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let d = self.coefficients(lambda);
        d.iter().fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |acc, x| {
            (acc.0 + x.0, acc.1 + x.1)
        })
    }
}

/// Cycle expansion of the group's zeta at one point.
pub fn zeta_cycle(lambda: Complex64, group: &SchottkyGroup, n_max: usize, orientation: Orientation, budget: usize) -> Result<ZetaValue> {
    Ok(CycleExpansion::new(group, n_max, orientation, budget)?.value(lambda))
}

#[derive(Debug, Clone)]
struct Block {
    row: usize,
    col: usize,
    log_deriv: Vec<f64>,
    lagrange: Vec<f64>,
}

/// det(I − K(λ)) for the transfer operator (K f)(x) = Σ_{a ≠ b⁻¹} a'(x)^λ f(a x),
/// x ∈ D_b, discretised by Chebyshev collocation on each disk diameter.
///
/// Periodic points of the coding are the oriented periodic words, so the
/// determinant is the oriented zeta. Unlike the cycle expansion it stays
/// accurate far left of δ, where the t_k cancel catastrophically.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    nodes: usize,
    size: usize,
    blocks: Vec<Block>,
}

impl TransferOperator {
    pub fn new(group: &SchottkyGroup, nodes: usize, orientation: Orientation) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::Domain("transfer operator needs at least two nodes"));
        }
        let active: Vec<LetterId> = match orientation {
            Orientation::Oriented => (0..group.letter_count() as LetterId).collect(),
            Orientation::Unoriented if group.rank() == 1 => vec![0],
            Orientation::Unoriented => {
                return Err(Error::Unsupported("unoriented continuation needs rank 1"))
            }
        };
        let m = nodes;
        let t: Vec<f64> = (0..m)
            .map(|k| (PI * (2 * k + 1) as f64 / (2 * m) as f64).cos())
            .collect();
        let bw: Vec<f64> = (0..m)
            .map(|k| {
                let s = (PI * (2 * k + 1) as f64 / (2 * m) as f64).sin();
                if k % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        let intervals = image_intervals(group, &active);
        let mut blocks = Vec::new();
        for (bi, &b) in active.iter().enumerate() {
            let (cb, rb) = intervals[bi];
            for (ai, &a) in active.iter().enumerate() {
                if a == inv_letter(b) {
                    continue;
                }
                let [ga, gb, gc, gd] = group.letter(a).entries();
                let (ca, ra) = intervals[ai];
                let mut log_deriv = Vec::with_capacity(m);
                let mut lagrange = Vec::with_capacity(m * m);
                for tp in &t {
                    let x = cb + rb * tp;
                    let den = gc * x + gd;
                    log_deriv.push(-2.0 * den.abs().ln());
                    let u = ((ga * x + gb) / den - ca) / ra;
                    lagrange.extend(barycentric_row(u, &t, &bw));
                }
                blocks.push(Block { row: bi, col: ai, log_deriv, lagrange });
            }
        }
        Ok(Self { nodes: m, size: active.len() * m, blocks })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// K(λ) and K'(λ).
    fn kernel(&self, lambda: Complex64, with_derivative: bool) -> (DMatrix<Complex64>, Option<DMatrix<Complex64>>) {
        let m = self.nodes;
        let mut k = DMatrix::<Complex64>::zeros(self.size, self.size);
        let mut kp = with_derivative.then(|| DMatrix::<Complex64>::zeros(self.size, self.size));
        for blk in &self.blocks {
            for p in 0..m {
                let lg = blk.log_deriv[p];
                let f = (lambda * lg).exp();
                for q in 0..m {
                    let v = f * blk.lagrange[p * m + q];
                    k[(blk.row * m + p, blk.col * m + q)] = v;
                    if let Some(kp) = kp.as_mut() {
                        kp[(blk.row * m + p, blk.col * m + q)] = v * lg;
                    }
                }
            }
        }
        (k, kp)
    }

    /// Value with an error estimate from a discretisation with 3/4 of the nodes.
    pub fn value(&self, group: &SchottkyGroup, lambda: Complex64, orientation: Orientation) -> Result<ZetaValue> {
        let (v, dv) = self.eval_with_derivative(lambda);
        let coarse = TransferOperator::new(group, (3 * self.nodes / 4).max(2), orientation)?;
        let vc = coarse.eval(lambda);
        Ok(ZetaValue {
            lambda,
            value: v,
            derivative: dv,
            truncation_bound: (v - vc).norm(),
            roundoff_bound: 16.0 * EPS * self.size as f64 * v.norm().max(1.0),
            method: ZetaMethod::TransferOperator,
        })
    }
}

/// Levels of disk images used to shrink the collocation intervals.
const IMAGE_LEVELS: usize = 2;

/// Collocation interval (center, half width) per active letter: the hull of
/// the images a(I_b), b ≠ a⁻¹, iterated from the disk diameters. Every
/// function the operator produces is evaluated only there, and the smaller
/// interval sits deeper inside the disk of analyticity.
fn image_intervals(group: &SchottkyGroup, active: &[LetterId]) -> Vec<(f64, f64)> {
    let mut iv: Vec<(f64, f64)> = active
        .iter()
        .map(|a| {
            let d = group.letter_disk(*a);
            (d.center - d.radius, d.center + d.radius)
        })
        .collect();
    for _ in 0..IMAGE_LEVELS {
        let next = active
            .iter()
            .map(|&a| {
                let g = group.letter(a);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (bi, &b) in active.iter().enumerate() {
                    if b == inv_letter(a) {
                        continue;
                    }
                    for x in [iv[bi].0, iv[bi].1] {
                        let [ga, gb, gc, gd] = g.entries();
                        let y = (ga * x + gb) / (gc * x + gd);
                        lo = lo.min(y);
                        hi = hi.max(y);
                    }
                }
                (lo, hi)
            })
            .collect();
        iv = next;
    }
    iv.into_iter().map(|(lo, hi)| (0.5 * (lo + hi), 0.5 * (hi - lo))).collect()
}

fn barycentric_row(u: f64, t: &[f64], w: &[f64]) -> Vec<f64> {
    let mut row = vec![0.0; t.len()];
    if let Some(j) = t.iter().position(|tj| (u - tj).abs() < 1e-300) {
        row[j] = 1.0;
        return row;
    }
    let mut total = 0.0;
    for j in 0..t.len() {
        row[j] = w[j] / (u - t[j]);
        total += row[j];
    }
    for v in row.iter_mut() {
        *v /= total;
    }
    row
}

impl TransferOperator {
    fn lu(&self, lambda: Complex64, with_derivative: bool) -> (nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, Option<DMatrix<Complex64>>) {
        let (k, kp) = self.kernel(lambda, with_derivative);
        ((DMatrix::<Complex64>::identity(self.size, self.size) - k).lu(), kp)
    }

    fn finite_difference(&self, lambda: Complex64) -> Complex64 {
        let h = 1e-6;
        (self.eval(lambda + h) - self.eval(lambda - h)) / (2.0 * h)
    }
}

impl ZetaFunction for TransferOperator {
    fn eval(&self, lambda: Complex64) -> Complex64 {
        self.lu(lambda, false).0.determinant()
    }

    fn eval_with_derivative(&self, lambda: Complex64) -> (Complex64, Complex64) {
        let (lu, kp) = self.lu(lambda, true);
        let det = lu.determinant();
        // d/dλ det(I − K) = −det · tr((I − K)⁻¹ K')
        match lu.solve(&kp.expect("derivative requested")) {
            Some(x) if det.norm() > 0.0 => (det, -det * x.trace()),
            _ => (det, self.finite_difference(lambda)),
        }
    }

    fn log_eval(&self, lambda: Complex64) -> Complex64 {
        let (lu, _) = self.lu(lambda, false);
        let u = lu.u();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.size {
            acc += u[(i, i)].ln();
        }
        if lu.p().determinant::<f64>() < 0.0 {
            acc += Complex64::new(0.0, PI);
        }
        acc
    }

    fn log_derivative(&self, lambda: Complex64) -> Complex64 {
        let (lu, kp) = self.lu(lambda, true);
        match lu.solve(&kp.expect("derivative requested")) {
            Some(x) => -x.trace(),
            None => Complex64::new(f64::NAN, f64::NAN),
        }
    }
}

/// Axis-aligned rectangle in the λ-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("rectangle needs finite, ordered bounds"));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re_min <= z.re && z.re <= self.re_max && self.im_min <= z.im && z.im <= self.im_max
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn grown(&self, by: f64) -> Self {
        Self {
            re_min: self.re_min - by,
            re_max: self.re_max + by,
            im_min: self.im_min - by,
            im_max: self.im_max + by,
        }
    }
}

/// A located zero of Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceHit {
    pub lambda: Complex64,
    pub multiplicity: usize,
    /// Size of the last Newton correction, a distance estimate to the true zero.
    pub newton_residual: f64,
    pub bbox: Rect,
    /// Within 1e−3 of −ℕ₀ ∪ (1/2 − ℕ), where zeros need not be resonances.
    pub excluded: bool,
    pub converged: bool,
}

/// Radius of the neighbourhoods of the excluded points.
pub const EXCLUSION_RADIUS: f64 = 1e-3;

/// Distance from λ to the nearest point of −ℕ₀ ∪ (1/2 − ℕ).
pub fn distance_to_excluded(lambda: Complex64) -> f64 {
    let x = lambda.re;
    let mut best = f64::INFINITY;
    let k = (-x).round().max(0.0);
    best = best.min(Complex64::new(x + k, lambda.im).norm());
    let j = (0.5 - x).round().max(1.0);
    best = best.min(Complex64::new(x - (0.5 - j), lambda.im).norm());
    best
}

/// Resolvent multiplicity of a zero of the oriented zeta: at λ = −k the
/// topological zero of order (2k + 1)(−χ) is removed.
pub fn resonance_multiplicity(hit: &ResonanceHit, chi: i64) -> usize {
    let x = hit.lambda;
    let k = (-x.re).round();
    if hit.excluded && k >= 0.0 && Complex64::new(x.re + k, x.im).norm() < EXCLUSION_RADIUS {
        let topo = (2.0 * k + 1.0) * (-chi) as f64;
        (hit.multiplicity as f64 - topo).max(0.0) as usize
    } else {
        hit.multiplicity
    }
}

/// Options for [`find_resonances`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub grid_step: f64,
    pub max_retries: usize,
}

impl SearchOptions {
    pub fn new(grid_step: f64) -> Self {
        Self { grid_step, max_retries: 3 }
    }
}

struct ContourHit;

/// Largest change of log|Z| accepted between neighbouring samples.
const MAX_LOG_MODULUS_STEP: f64 = 1.5;

/// Endpoints of a horizontal or vertical segment plus the lattice points
/// k·step strictly between them; other segments are split uniformly.
fn lattice_points(a: Complex64, b: Complex64, step: f64) -> Vec<Complex64> {
    let mut pts = vec![a];
    let horizontal = a.im == b.im;
    let vertical = a.re == b.re;
    if horizontal || vertical {
        let (s0, s1) = if horizontal { (a.re, b.re) } else { (a.im, b.im) };
        let (lo, hi) = (s0.min(s1), s0.max(s1));
        let tol = 1e-9 * step;
        let mut ks: Vec<f64> = Vec::new();
        let mut k = (lo / step).ceil();
        while k * step < hi {
            let v = k * step;
            if v - lo > tol && hi - v > tol {
                ks.push(v);
            }
            k += 1.0;
        }
        if s1 < s0 {
            ks.reverse();
        }
        for v in ks {
            pts.push(if horizontal { Complex64::new(v, a.im) } else { Complex64::new(a.re, v) });
        }
    } else {
        let n = ((b - a).norm() / step).ceil().max(1.0) as usize;
        for i in 1..n {
            pts.push(a + (b - a) * (i as f64 / n as f64));
        }
    }
    pts.push(b);
    pts
}

fn wrap_phase(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d < -PI {
        d += 2.0 * PI;
    }
    d
}

struct Finder<'a, Z: ZetaFunction> {
    zeta: &'a Z,
    step: f64,
    cache: BTreeMap<(u64, u64), Complex64>,
}

impl<'a, Z: ZetaFunction> Finder<'a, Z> {
    fn new(zeta: &'a Z, step: f64) -> Self {
        Self { zeta, step, cache: BTreeMap::new() }
    }

    /// Cached log Z.
    fn log_eval(&mut self, z: Complex64) -> core::result::Result<Complex64, ContourHit> {
        let key = (z.re.to_bits(), z.im.to_bits());
        let v = match self.cache.get(&key) {
            Some(v) => *v,
            None => {
                let v = self.zeta.log_eval(z);
                self.cache.insert(key, v);
                v
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(ContourHit)
        }
    }

    /// Change of arg Z along a straight segment, sampled on the global
    /// lattice of spacing `step` so that neighbouring boxes share samples.
    ///
    /// Each increment is unwrapped around the one predicted by the phase
    /// rate probed just after its start, and bisected where it strays from
    /// that prediction or log|Z| moves too fast; far left of δ the phase turns
    /// by more than π per step. Segments are traversed in a fixed direction so
    /// shared edges cancel exactly.
    fn segment_phase(&mut self, a: Complex64, b: Complex64) -> core::result::Result<f64, ContourHit> {
        if (b.re, b.im) < (a.re, a.im) {
            return Ok(-self.segment_phase(b, a)?);
        }
        let pts = lattice_points(a, b, self.step);
        let mut f0 = self.log_eval(pts[0])?;
        let mut total = 0.0;
        for w in pts.windows(2) {
            let f1 = self.log_eval(w[1])?;
            total += self.refine_phase(w[0], w[1], f0, f1, 0)?;
            f0 = f1;
        }
        Ok(total)
    }

    fn refine_phase(
        &mut self,
        z0: Complex64,
        z1: Complex64,
        f0: Complex64,
        f1: Complex64,
        depth: usize,
    ) -> core::result::Result<f64, ContourHit> {
        let fp = self.log_eval(z0 + (z1 - z0) / 16.0)?;
        let predicted = 16.0 * wrap_phase(fp.im - f0.im);
        let dev = wrap_phase(f1.im - f0.im - predicted);
        // a probe next to a zero sees a spike, so large predictions are not trusted
        if dev.abs() <= PI / 4.0 && predicted.abs() <= 1.5 * PI && (f1.re - f0.re).abs() <= MAX_LOG_MODULUS_STEP {
            return Ok(predicted + dev);
        }
        if depth > 24 {
            return Err(ContourHit);
        }
        let zm = 0.5 * (z0 + z1);
        let fm = self.log_eval(zm)?;
        Ok(self.refine_phase(z0, zm, f0, fm, depth + 1)? + self.refine_phase(zm, z1, fm, f1, depth + 1)?)
    }

    fn polygon_winding(&mut self, corners: &[Complex64]) -> core::result::Result<i64, ContourHit> {
        let mut total = 0.0;
        for i in 0..corners.len() {
            total += self.segment_phase(corners[i], corners[(i + 1) % corners.len()])?;
        }
        let w = total / (2.0 * PI);
        let wr = w.round();
        if (w - wr).abs() > 0.1 {
            return Err(ContourHit);
        }
        Ok(wr as i64)
    }

    fn winding(&mut self, r: &Rect) -> core::result::Result<i64, ContourHit> {
        self.polygon_winding(&[
            Complex64::new(r.re_min, r.im_min),
            Complex64::new(r.re_max, r.im_min),
            Complex64::new(r.re_max, r.im_max),
            Complex64::new(r.re_min, r.im_max),
        ])
    }

    fn newton(&mut self, r: &Rect, mult: usize) -> ResonanceHit {
        let mut z = r.center();
        let mut last = f64::INFINITY;
        let mut converged = false;
        let size = r.width().max(r.height());
        for _ in 0..80 {
            let ld = self.zeta.log_derivative(z);
            if ld.re.is_infinite() || ld.im.is_infinite() {
                last = 0.0;
                converged = true;
                break;
            }
            let step = mult as f64 / ld;
            if !step.is_finite() {
                break;
            }
            z -= step;
            last = step.norm();
            if (z - r.center()).norm() > 4.0 * size {
                break;
            }
            if last <= 1e-13 * z.norm().max(1.0) {
                converged = true;
                break;
            }
        }
        if !(converged && r.grown(size).contains(z)) {
            converged = false;
        }
        ResonanceHit {
            lambda: z,
            multiplicity: mult,
            newton_residual: last,
            bbox: *r,
            excluded: distance_to_excluded(z) < EXCLUSION_RADIUS,
            converged,
        }
    }

    /// Halve a box holding one zero until its side is below `target`.
    fn shrink(&mut self, r: Rect, target: f64) -> Option<Rect> {
        let mut r = r;
        while r.width().max(r.height()) > target {
            let (a, b) = if r.width() >= r.height() {
                let x = r.re_min + 0.5123 * r.width();
                (Rect { re_max: x, ..r }, Rect { re_min: x, ..r })
            } else {
                let y = r.im_min + 0.5123 * r.height();
                (Rect { im_max: y, ..r }, Rect { im_min: y, ..r })
            };
            r = match self.winding(&a).ok()? {
                1 => a,
                0 => b,
                _ => return None,
            };
        }
        Some(r)
    }

    fn search(&mut self, r: Rect, w: i64, out: &mut Vec<ResonanceHit>) -> Result<()> {
        if w <= 0 {
            if w < 0 {
                return Err(Error::Convergence("negative winding number"));
            }
            return Ok(());
        }
        let side = r.width().max(r.height());
        if side <= self.step && (w == 1 || side <= self.step / 128.0) {
            let mut hit = self.newton(&r, w as usize);
            if !hit.converged && w == 1 {
                // near neighbours pull Newton away; isolate the zero further
                if let Some(small) = self.shrink(r, side / 64.0) {
                    let retry = self.newton(&small, 1);
                    if retry.converged {
                        hit = ResonanceHit { bbox: r, ..retry };
                    }
                }
            }
            out.push(hit);
            return Ok(());
        }
        const FRACTIONS: [f64; 6] = [0.5123, 0.4671, 0.5389, 0.4417, 0.5731, 0.4093];
        for f in FRACTIONS {
            let (a, b) = if r.width() >= r.height() {
                let x = r.re_min + f * r.width();
                (Rect { re_max: x, ..r }, Rect { re_min: x, ..r })
            } else {
                let y = r.im_min + f * r.height();
                (Rect { im_max: y, ..r }, Rect { im_min: y, ..r })
            };
            let (Ok(wa), Ok(wb)) = (self.winding(&a), self.winding(&b)) else {
                continue;
            };
            if wa + wb != w {
                continue;
            }
            self.search(a, wa, out)?;
            self.search(b, wb, out)?;
            return Ok(());
        }
        Err(Error::Convergence("could not split a box without touching a zero"))
    }
}

/// Move edges that pass within 1e−3 of an excluded point outward.
fn clear_excluded(r: Rect, shift: f64) -> Rect {
    let mut r = r;
    let near = |x: f64| distance_to_excluded(Complex64::new(x, 0.0)) < EXCLUSION_RADIUS;
    let spans_real = r.im_min <= EXCLUSION_RADIUS && r.im_max >= -EXCLUSION_RADIUS;
    if spans_real {
        while near(r.re_min) {
            r.re_min -= shift;
        }
        while near(r.re_max) {
            r.re_max += shift;
        }
    }
    let hits_row = |y: f64, r: &Rect| {
        y.abs() < EXCLUSION_RADIUS && {
            let lo = (-r.re_max).ceil().max(0.0);
            lo <= -r.re_min || (0.5 - r.re_max).ceil().max(1.0) <= 0.5 - r.re_min
        }
    };
    while hits_row(r.im_min, &r) {
        r.im_min -= shift;
    }
    while hits_row(r.im_max, &r) {
        r.im_max += shift;
    }
    r
}

/// Winding number of Z around the boundary of a rectangle.
pub fn winding_number<Z: ZetaFunction>(zeta: &Z, rect: &Rect, grid_step: f64) -> Result<i64> {
    Finder::new(zeta, grid_step)
        .winding(rect)
        .map_err(|_| Error::Convergence("zero on the contour"))
}

/// Winding number of Z around a circle, traced as a fine polygon.
pub fn winding_number_circle<Z: ZetaFunction>(zeta: &Z, center: Complex64, radius: f64, grid_step: f64) -> Result<i64> {
    let n = ((2.0 * PI * radius / grid_step).ceil() as usize).max(64);
    let corners: Vec<Complex64> = (0..n)
        .map(|i| center + Complex64::from_polar(radius, 2.0 * PI * i as f64 / n as f64))
        .collect();
    Finder::new(zeta, grid_step)
        .polygon_winding(&corners)
        .map_err(|_| Error::Convergence("zero on the contour"))
}

/// All zeros of Z in a rectangle, isolated by recursive subdivision with
/// argument-principle counts and refined by Newton's method.
///
/// Edges through an excluded point or through a zero are jittered outward by
/// grid_step/7, at most `max_retries` times. Hits are sorted by (Re, Im).
pub fn find_resonances<Z: ZetaFunction>(zeta: &Z, rect: Rect, opts: SearchOptions) -> Result<Vec<ResonanceHit>> {
    if !(opts.grid_step > 0.0) {
        return Err(Error::Domain("grid_step must be positive"));
    }
    let shift = opts.grid_step / 7.0;
    let mut r = clear_excluded(rect, shift);
    let mut finder = Finder::new(zeta, opts.grid_step);
    let mut attempt = 0;
    let w = loop {
        match finder.winding(&r) {
            Ok(w) => break w,
            Err(ContourHit) if attempt < opts.max_retries => {
                attempt += 1;
                r = clear_excluded(r.grown(shift), shift);
            }
            Err(ContourHit) => return Err(Error::Convergence("zero on the search contour")),
        }
    };
    let mut out = Vec::new();
    finder.search(r, w, &mut out)?;
    out.sort_by(|a, b| {
        a.lambda
            .re
            .partial_cmp(&b.lambda.re)
            .unwrap_or(Ordering::Equal)
            .then(a.lambda.im.partial_cmp(&b.lambda.im).unwrap_or(Ordering::Equal))
    });
    Ok(out)
}

/// δ as the real zero of Z inside a bracket, by bisection and Newton polish.
pub fn delta_from_zeta<Z: ZetaFunction>(zeta: &Z, lo: f64, hi: f64) -> Result<DeltaEstimate> {
    let f = |x: f64| zeta.eval(Complex64::new(x, 0.0)).re;
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa * fb > 0.0 {
        return Err(Error::Convergence("zeta has no sign change in the bracket"));
    }
    let mut fa = fa;
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm * fa <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if b - a < 1e-9 {
            break;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut err = b - a;
    for _ in 0..8 {
        let (v, d) = zeta.eval_with_derivative(Complex64::new(x, 0.0));
        if d.re == 0.0 {
            break;
        }
        let step = v.re / d.re;
        x -= step;
        err = step.abs();
        if err < 1e-15 {
            break;
        }
    }
    let err = err.max(4.0 * EPS);
    Ok(DeltaEstimate {
        value: x,
        bracket: (x - err, x + err),
        word_length_used: 0,
        method: DeltaMethod::ZetaRoot,
    })
}

/// Resonance counts on a ladder of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingReport {
    pub radii: Vec<f64>,
    /// N(r): resonances with |λ| ≤ r.
    pub counts: Vec<usize>,
    /// Ñ(r): those with Re λ ∈ [−δ̂ − eps, δ̂].
    pub strip_counts: Vec<usize>,
    /// Log-log slopes of N and Ñ.
    pub fitted_exponents: (f64, f64),
}

/// Least-squares slope of log y against log x over points with y > 0.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Resonances (topological zeros removed) with −δ̂² − eps < Re λ < δ̂ and
/// |Im λ| ≤ im_max: the window where infinitely many are expected.
pub fn strip_window_count(hits: &[ResonanceHit], deltahat: f64, eps: f64, im_max: f64, chi: i64) -> usize {
    hits.iter()
        .filter(|h| h.lambda.re > -deltahat * deltahat - eps && h.lambda.re < deltahat && h.lambda.im.abs() <= im_max)
        .map(|h| resonance_multiplicity(h, chi))
        .sum()
}

/// Zeros are located to about this accuracy, so one lying on the right edge
/// of the strip (the cylinder's, at Re λ = 0) is counted.
const STRIP_EDGE_TOL: f64 = 1e-8;

/// N(r) and Ñ(r) from located zeros, topological zeros removed via χ.
pub fn counting_census(hits: &[ResonanceHit], deltahat: f64, eps: f64, radii: &[f64], chi: i64) -> CountingReport {
    let mut counts = Vec::with_capacity(radii.len());
    let mut strip = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut n = 0;
        let mut ns = 0;
        for h in hits {
            if h.lambda.norm() > r {
                continue;
            }
            let m = resonance_multiplicity(h, chi);
            n += m;
            if h.lambda.re >= -deltahat - eps && h.lambda.re <= deltahat + STRIP_EDGE_TOL {
                ns += m;
            }
        }
        counts.push(n);
        strip.push(ns);
    }
    let cf: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
    let sf: Vec<f64> = strip.iter().map(|c| *c as f64).collect();
    CountingReport {
        radii: radii.to_vec(),
        fitted_exponents: (loglog_slope(radii, &cf), loglog_slope(radii, &sf)),
        counts,
        strip_counts: strip,
    }
}
