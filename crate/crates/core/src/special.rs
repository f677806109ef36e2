//! Special functions, quadrature rules and summation helpers.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal branch of log Γ(z) (Lanczos, reflection for Re z < 1/2).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Complex64::new(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln()
}

/// Γ(z) for complex argument.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    ln_gamma(z).exp()
}

/// Γ(x) for real x.
pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The fifteen Kronrod abscissae of a panel [a, b], in increasing order.
pub fn gk15_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 15];
    for i in 0..7 {
        out[i] = c - h * GK_X[i];
        out[14 - i] = c + h * GK_X[i];
    }
    out[7] = c;
    out
}

/// Combine integrand values at [`gk15_nodes`] into (Kronrod value, |Kronrod − Gauss|).
pub fn gk15_combine(a: f64, b: f64, f: &[Complex64; 15]) -> (Complex64, f64) {
    let h = 0.5 * (b - a);
    let mut k = f[7] * GK_WK[7];
    let mut g = f[7] * GK_WG[3];
    for i in 0..7 {
        let pair = f[i] + f[14 - i];
        k += pair * GK_WK[i];
        if i % 2 == 1 {
            g += pair * GK_WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Fifteen-point Gauss–Kronrod rule on [a, b].
pub fn gk15<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64) -> (Complex64, f64) {
    let xs = gk15_nodes(a, b);
    let mut vals = [Complex64::new(0.0, 0.0); 15];
    for (v, x) in vals.iter_mut().zip(xs.iter()) {
        *v = f(*x);
    }
    gk15_combine(a, b, &vals)
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Wynn's ε-algorithm on a sequence of partial sums.
///
/// Returns the deepest even-column entry and its distance to the neighbouring
/// estimate, which serves as an error indicator.
pub fn wynn_epsilon(partial: &[Complex64]) -> (Complex64, f64) {
    let n = partial.len();
    if n < 3 {
        let last = partial.last().copied().unwrap_or_default();
        let prev = if n >= 2 { partial[n - 2] } else { last };
        return (last, (last - prev).norm());
    }
    let mut prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = partial.to_vec();
    let mut best = partial[n - 1];
    let mut err = (partial[n - 1] - partial[n - 2]).norm();
    let mut col = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff.norm() == 0.0 {
                return (best, err);
            }
            next.push(prev[i + 1] + diff.inv());
        }
        col += 1;
        prev = cur;
        cur = next;
        if col.is_multiple_of(2) {
            let m = cur.len();
            let cand = cur[m - 1];
            let e = if m >= 2 { (cand - cur[m - 2]).norm() } else { (cand - best).norm() };
            best = cand;
            err = e;
        }
    }
    (best, err)
}

/// Polynomial extrapolation of samples (h_k, f_k) to h = 0 (Neville).
///
/// Returns the extrapolated value and its distance to the estimate that drops
/// the coarsest sample.
pub fn extrapolate_to_zero(h: &[f64], f: &[Complex64]) -> (Complex64, f64) {
    assert_eq!(h.len(), f.len());
    fn neville(h: &[f64], f: &[Complex64]) -> Complex64 {
        let n = f.len();
        let mut p = f.to_vec();
        for m in 1..n {
            for i in 0..n - m {
                p[i] = (p[i + 1] * h[i] - p[i] * h[i + m]) / (h[i] - h[i + m]);
            }
        }
        p[0]
    }
    let full = neville(h, f);
    if f.len() < 2 {
        return (full, f64::INFINITY);
    }
    let reduced = neville(&h[1..], &f[1..]);
    (full, (full - reduced).norm())
}

/// ∫₋₁¹ exp(1 − 1/(1 − t²)) dt, the mass of the standard bump.
pub fn bump_mass() -> f64 {
    let (x, w) = gauss_legendre(400);
    let mut s = KahanSum::new();
    for (xi, wi) in x.iter().zip(w.iter()) {
        s.add(wi * bump(*xi));
    }
    s.value()
}

/// The standard bump φ₀(t) = exp(1 − 1/(1 − t²)) on (−1, 1), zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}
