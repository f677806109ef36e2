//! Schottky groups in PSL(2, R): generators from disk pairs, reduced words,
//! translation lengths and the primitive length spectrum.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::fmt;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hyperbolic::{BoundaryPoint, HPoint};

/// Default cap on the number of words an enumeration may visit.
pub const DEFAULT_WORD_BUDGET: usize = 10_000_000;

/// Orientation-preserving isometry z ↦ (az + b)/(cz + d) with ad − bc = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub(crate) a: f64,
    pub(crate) b: f64,
    pub(crate) c: f64,
    pub(crate) d: f64,
}

impl MoebiusMap {
    /// Build from entries; the matrix is rescaled to unit determinant.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::Domain("moebius map needs positive determinant"));
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub const fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// The map z ↦ c_dst − r_src·r_dst/(z − c_src), sending the exterior of
    /// the source disk onto the interior of the target disk.
    pub fn pairing(src: Disk, dst: Disk) -> Self {
        let s = (src.radius * dst.radius).sqrt();
        let (c1, c2) = (src.center, dst.center);
        Self {
            a: c2 / s,
            b: (-src.radius * dst.radius - c1 * c2) / s,
            c: 1.0 / s,
            d: -c1 / s,
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// self ∘ other.
    pub fn compose(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn apply(&self, m: &HPoint<1>) -> HPoint<1> {
        let (x, y) = (m.y(), m.height());
        let u = self.c * x + self.d;
        let v = self.c * y;
        let den = u * u + v * v;
        let re = ((self.a * x + self.b) * u + self.a * self.c * y * y) / den;
        HPoint::raw(re, y / den)
    }

    pub fn apply_boundary(&self, p: &BoundaryPoint<1>) -> BoundaryPoint<1> {
        match p {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::at(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(y) => {
                let den = self.c * y[0] + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::at((self.a * y[0] + self.b) / den)
                }
            }
        }
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// Derivative of the boundary action at x, i.e. 1/(cx + d)².
    pub fn boundary_derivative(&self, x: f64) -> f64 {
        let u = self.c * x + self.d;
        1.0 / (u * u)
    }

    /// ℓ = 2 arccosh(|trace|/2).
    pub fn translation_length(&self) -> Result<f64> {
        let t = self.trace().abs();
        if t <= 2.0 {
            return Err(Error::NonHyperbolic { trace: t });
        }
        Ok(2.0 * (0.5 * t).acosh())
    }
}

pub fn compose(g: &MoebiusMap, h: &MoebiusMap) -> MoebiusMap {
    g.compose(h)
}

pub fn inverse(g: &MoebiusMap) -> MoebiusMap {
    g.inverse()
}

pub fn apply(g: &MoebiusMap, m: &HPoint<1>) -> HPoint<1> {
    g.apply(m)
}

pub fn translation_length(g: &MoebiusMap) -> Result<f64> {
    g.translation_length()
}

/// A disk on the boundary line, i.e. the half-disk bounded by a geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: f64,
    pub radius: f64,
}

impl Disk {
    pub const fn new(center: f64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }
}

/// First violated condition found by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    /// Disk index (0-based) with a non-positive or non-finite radius or center.
    BadDisk { disk: usize },
    /// Two closed disks intersect.
    Overlap { first: usize, second: usize },
    /// Generator does not map the exterior of its source disk onto its target disk.
    Pairing { generator: usize },
    /// Disk list does not hold two disks per generator.
    Shape,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadDisk { disk } => write!(f, "disk {disk} has invalid center or radius"),
            Violation::Overlap { first, second } => write!(f, "disks {first} and {second} intersect"),
            Violation::Pairing { generator } => {
                write!(f, "generator {generator} does not pair its disks")
            }
            Violation::Shape => write!(f, "expected two disks per generator"),
        }
    }
}

/// A classical Schottky group: generator i maps the exterior of disk 2i onto
/// the interior of disk 2i + 1 (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct SchottkyGroup {
    generators: Vec<MoebiusMap>,
    disks: Vec<Disk>,
    euler_char: i64,
    dk_values: Vec<f64>,
    letters: Vec<MoebiusMap>,
}

/// Letter ids: 2i is generator i, 2i + 1 its inverse.
pub type LetterId = u8;

#[inline]
pub(crate) fn inv_letter(l: LetterId) -> LetterId {
    l ^ 1
}

impl SchottkyGroup {
    /// Group from explicit generators and disks; validated.
    pub fn new(generators: Vec<MoebiusMap>, disks: Vec<Disk>) -> Result<Self> {
        let p = generators.len();
        let mut letters = Vec::with_capacity(2 * p);
        for g in &generators {
            letters.push(*g);
            letters.push(g.inverse());
        }
        let group = Self {
            generators,
            disks,
            euler_char: 1 - p as i64,
            dk_values: Vec::new(),
            letters,
        };
        validate(&group).map_err(Error::Schottky)?;
        Ok(group)
    }

    /// Group whose generators are built from (source, target) disk pairs.
    pub fn from_disk_pairs(pairs: &[(Disk, Disk)]) -> Result<Self> {
        let mut disks = Vec::with_capacity(2 * pairs.len());
        let mut gens = Vec::with_capacity(pairs.len());
        for (s, t) in pairs {
            disks.push(*s);
            disks.push(*t);
            if !(s.radius > 0.0 && t.radius > 0.0) {
                let idx = disks.len() - if s.radius > 0.0 { 1 } else { 2 };
                return Err(Error::Schottky(Violation::BadDisk { disk: idx }));
            }
            gens.push(MoebiusMap::pairing(*s, *t));
        }
        Self::new(gens, disks)
    }

    /// Hyperbolic cylinder with core geodesic of length ℓ₀.
    pub fn cylinder(ell0: f64) -> Result<Self> {
        if !(ell0 > 0.0) {
            return Err(Error::Domain("cylinder length must be positive"));
        }
        // trace 2c/r = 2 cosh(ℓ₀/2) with unit radii
        let c = (0.5 * ell0).cosh();
        Self::from_disk_pairs(&[(Disk::new(-c, 1.0), Disk::new(c, 1.0))])
    }

    /// Rank-2 group pairing D(−c1, r1) with D(c1, r1) and D(−c2, r2) with D(c2, r2).
    pub fn symmetric(c1: f64, r1: f64, c2: f64, r2: f64) -> Result<Self> {
        Self::from_disk_pairs(&[
            (Disk::new(-c1, r1), Disk::new(c1, r1)),
            (Disk::new(-c2, r2), Disk::new(c2, r2)),
        ])
    }

    pub fn with_euler_char(mut self, chi: i64) -> Self {
        self.euler_char = chi;
        self
    }

    pub fn with_dk_values(mut self, dk: Vec<f64>) -> Self {
        self.dk_values = dk;
        self
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[MoebiusMap] {
        &self.generators
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn euler_char(&self) -> i64 {
        self.euler_char
    }

    pub fn dk_values(&self) -> &[f64] {
        &self.dk_values
    }

    pub fn letter_count(&self) -> usize {
        self.letters.len()
    }

    pub fn letter(&self, l: LetterId) -> &MoebiusMap {
        &self.letters[l as usize]
    }

    /// The disk a letter maps into: target disk for a generator, source disk for an inverse.
    pub fn letter_disk(&self, l: LetterId) -> Disk {
        self.disks[(l ^ 1) as usize]
    }

    /// log(1 / max_{x ∈ D_b} |a'(x)|) for b ≠ a⁻¹.
    pub fn pair_log_contraction(&self, a: LetterId, b: LetterId) -> f64 {
        let m = self.letter(a);
        let disk = self.letter_disk(b);
        let u1 = (m.c * (disk.center - disk.radius) + m.d).abs();
        let u2 = (m.c * (disk.center + disk.radius) + m.d).abs();
        // |cx + d| is monotone on the disk since the pole lies in D_{a⁻¹}.
        2.0 * u1.min(u2).ln()
    }

    /// Minimum of [`Self::pair_log_contraction`] over admissible pairs.
    pub fn min_log_contraction(&self) -> f64 {
        let n = self.letter_count() as LetterId;
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in 0..n {
                if b != inv_letter(a) {
                    best = best.min(self.pair_log_contraction(a, b));
                }
            }
        }
        best
    }

    /// True if m lies outside every closed half-disk over the Schottky disks.
    pub fn in_fundamental_domain(&self, m: &HPoint<1>) -> bool {
        self.disks.iter().all(|k| {
            let dy = m.y() - k.center;
            dy * dy + m.height() * m.height() > k.radius * k.radius
        })
    }

    /// Conjugate every generator by h (disks are carried along).
    pub fn conjugate(&self, h: &MoebiusMap) -> Result<Self> {
        let hinv = h.inverse();
        let gens = self.generators.iter().map(|g| h.compose(g).compose(&hinv)).collect();
        let mut disks = Vec::with_capacity(self.disks.len());
        for disk in &self.disks {
            let p = h.apply_boundary(&BoundaryPoint::at(disk.center - disk.radius));
            let q = h.apply_boundary(&BoundaryPoint::at(disk.center + disk.radius));
            let (Some(p), Some(q)) = (p.coord(), q.coord()) else {
                return Err(Error::Domain("conjugating map sends a disk through infinity"));
            };
            let pole = -h.d / h.c;
            if h.c != 0.0 && disk.contains(pole) {
                return Err(Error::Domain("conjugating map sends a disk through infinity"));
            }
            disks.push(Disk::new(0.5 * (p + q), 0.5 * (p - q).abs()));
        }
        Ok(Self::new(gens, disks)?
            .with_euler_char(self.euler_char)
            .with_dk_values(self.dk_values.clone()))
    }
}

/// Check disk validity, pairwise disjointness and the pairing property.
pub fn validate(group: &SchottkyGroup) -> core::result::Result<(), Violation> {
    let disks = &group.disks;
    if disks.len() != 2 * group.generators.len() {
        return Err(Violation::Shape);
    }
    for (i, d) in disks.iter().enumerate() {
        if !(d.radius > 0.0) || !d.radius.is_finite() || !d.center.is_finite() {
            return Err(Violation::BadDisk { disk: i });
        }
    }
    for i in 0..disks.len() {
        for j in i + 1..disks.len() {
            if (disks[i].center - disks[j].center).abs() <= disks[i].radius + disks[j].radius {
                return Err(Violation::Overlap { first: i, second: j });
            }
        }
    }
    for (k, g) in group.generators.iter().enumerate() {
        let (src, dst) = (disks[2 * k], disks[2 * k + 1]);
        let tol = 1e-9 * dst.radius.max(1.0);
        for s in 0..8 {
            let th = 2.0 * PI * s as f64 / 8.0 + 0.1;
            let z = Complex64::new(src.center + src.radius * th.cos(), src.radius * th.sin());
            let w = g.apply_complex(z);
            if ((w - dst.center).norm() - dst.radius).abs() > tol {
                return Err(Violation::Pairing { generator: k });
            }
        }
        // exterior → interior: ∞ must land strictly inside the target disk
        match g.apply_boundary(&BoundaryPoint::Infinity) {
            BoundaryPoint::Finite(y) if dst.contains(y[0]) => {}
            _ => return Err(Violation::Pairing { generator: k }),
        }
    }
    Ok(())
}

/// A reduced word in the generators; letters are signed 1-based generator
/// indices (−i for the inverse of generator i).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<i8>,
}

pub(crate) fn id_to_signed(l: LetterId) -> i8 {
    let g = (l / 2) as i8 + 1;
    if l.is_multiple_of(2) {
        g
    } else {
        -g
    }
}

pub(crate) fn signed_to_id(s: i8) -> LetterId {
    let g = (s.unsigned_abs() - 1) * 2;
    if s > 0 {
        g
    } else {
        g + 1
    }
}

impl Word {
    pub fn identity() -> Self {
        Self { letters: Vec::new() }
    }

    /// Build from signed letters; rejects zero letters and unreduced words.
    pub fn from_signed(letters: Vec<i8>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::Domain("letter 0 is not a generator"));
        }
        if letters.windows(2).any(|w| w[0] == -w[1]) {
            return Err(Error::Domain("word is not reduced"));
        }
        Ok(Self { letters })
    }

    pub(crate) fn from_ids(ids: &[LetterId]) -> Self {
        Self { letters: ids.iter().map(|l| id_to_signed(*l)).collect() }
    }

    pub(crate) fn ids(&self) -> Vec<LetterId> {
        self.letters.iter().map(|s| signed_to_id(*s)).collect()
    }

    pub fn letters(&self) -> &[i8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(a), Some(b)) => self.letters.len() == 1 || *a != -*b,
            _ => true,
        }
    }

    pub fn inverse(&self) -> Self {
        Self { letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    /// Least rotation of the word or of its inverse (letter order g₁ < g₁⁻¹ < g₂ < …).
    pub fn canonical(&self) -> Self {
        let ids = self.ids();
        Self::from_ids(&canonical_ids(&ids))
    }

    /// True when the word is not a proper power.
    pub fn is_primitive(&self) -> bool {
        is_primitive_ids(&self.ids())
    }

    /// Matrix of the word as a product of generator matrices.
    pub fn map(&self, group: &SchottkyGroup) -> MoebiusMap {
        let mut m = MoebiusMap::identity();
        for s in &self.letters {
            m = m.compose(group.letter(signed_to_id(*s)));
        }
        m
    }
}

fn rotations_less(w: &[LetterId], cand: &[LetterId]) -> bool {
    // true if some rotation of cand is lexicographically smaller than w
    let k = w.len();
    for r in 0..k {
        for i in 0..k {
            match cand[(r + i) % k].cmp(&w[i]) {
                Ordering::Less => return true,
                Ordering::Greater => break,
                Ordering::Equal => {}
            }
        }
    }
    false
}

fn inverse_ids(w: &[LetterId]) -> Vec<LetterId> {
    w.iter().rev().map(|l| inv_letter(*l)).collect()
}

/// True when w is the least among its rotations and those of its inverse.
pub(crate) fn is_canonical_ids(w: &[LetterId]) -> bool {
    !rotations_less(w, w) && !rotations_less(w, &inverse_ids(w))
}

pub(crate) fn canonical_ids(w: &[LetterId]) -> Vec<LetterId> {
    let k = w.len();
    let inv = inverse_ids(w);
    let mut best: Vec<LetterId> = w.to_vec();
    for src in [w, &inv[..]] {
        for r in 0..k {
            let rot: Vec<LetterId> = (0..k).map(|i| src[(r + i) % k]).collect();
            if rot < best {
                best = rot;
            }
        }
    }
    best
}

pub(crate) fn is_primitive_ids(w: &[LetterId]) -> bool {
    let k = w.len();
    for p in 1..k {
        if k.is_multiple_of(p) && (0..k).all(|i| w[i] == w[(i + p) % k]) {
            return false;
        }
    }
    k > 0
}

/// Number of reduced words of length exactly k in a free group of rank p.
pub fn word_count(p: usize, k: usize) -> usize {
    if k == 0 {
        1
    } else {
        2 * p * (2 * p - 1).pow((k - 1) as u32)
    }
}

/// Depth-first walk over reduced words of length 1..=max_len in lexicographic
/// order. The visitor returns false to skip the subtree below a word.
pub(crate) fn walk_words<F>(group: &SchottkyGroup, max_len: usize, mut visit: F)
where
    F: FnMut(&[LetterId], &MoebiusMap) -> bool,
{
    let n = group.letter_count() as LetterId;
    if max_len == 0 || n == 0 {
        return;
    }
    let cap = max_len.min(64);
    let mut letters: Vec<LetterId> = Vec::with_capacity(cap);
    let mut maps: Vec<MoebiusMap> = Vec::with_capacity(cap);
    // next candidate letter at each depth
    let mut next: Vec<LetterId> = vec![0; cap + 1];
    let mut depth = 0usize;
    loop {
        let mut cand = next[depth];
        if depth > 0 {
            let forbidden = inv_letter(letters[depth - 1]);
            if cand == forbidden {
                cand += 1;
            }
        }
        if cand >= n {
            if depth == 0 {
                return;
            }
            depth -= 1;
            letters.pop();
            maps.pop();
            continue;
        }
        next[depth] = cand + 1;
        let m = match maps.last() {
            Some(prev) => prev.compose(group.letter(cand)),
            None => *group.letter(cand),
        };
        letters.push(cand);
        maps.push(m);
        let descend = visit(&letters, &m);
        if descend && depth + 1 < max_len {
            depth += 1;
            if depth == next.len() {
                next.push(0);
            } else {
                next[depth] = 0;
            }
        } else {
            letters.pop();
            maps.pop();
        }
    }
}

/// Iterator over all reduced words of length ≤ L in shortlex order.
pub struct WordIter<'a> {
    group: &'a SchottkyGroup,
    max_len: usize,
    len: usize,
    letters: Vec<LetterId>,
    maps: Vec<MoebiusMap>,
    started: bool,
}

impl<'a> WordIter<'a> {
    fn push(&mut self, l: LetterId) {
        let m = match self.maps.last() {
            Some(prev) => prev.compose(self.group.letter(l)),
            None => *self.group.letter(l),
        };
        self.letters.push(l);
        self.maps.push(m);
    }

    fn smallest_after(&self, prev: Option<LetterId>, from: LetterId) -> Option<LetterId> {
        let n = self.group.letter_count() as LetterId;
        (from..n).find(|c| prev.is_none_or(|p| *c != inv_letter(p)))
    }

    /// Advance to the next word of the same length; false when exhausted.
    fn advance(&mut self) -> bool {
        let k = self.letters.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            let cur = self.letters[i];
            self.letters.truncate(i);
            self.maps.truncate(i);
            let prev = if i > 0 { Some(self.letters[i - 1]) } else { None };
            if let Some(c) = self.smallest_after(prev, cur + 1) {
                self.push(c);
                while self.letters.len() < k {
                    let p = self.letters.last().copied();
                    let c = self.smallest_after(p, 0).expect("rank ≥ 1 leaves a letter");
                    self.push(c);
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for WordIter<'_> {
    type Item = (Word, MoebiusMap);

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            self.len = 0;
            return Some((Word::identity(), MoebiusMap::identity()));
        }
        if self.len == 0 || !self.advance() {
            self.len += 1;
            if self.len > self.max_len || self.group.letter_count() == 0 {
                return None;
            }
            self.letters.clear();
            self.maps.clear();
            while self.letters.len() < self.len {
                let p = self.letters.last().copied();
                let c = self.smallest_after(p, 0)?;
                self.push(c);
            }
        }
        let m = *self.maps.last()?;
        Some((Word::from_ids(&self.letters), m))
    }
}

/// Error unless all reduced words of length ≤ L fit in the budget.
pub fn check_word_budget(p: usize, max_len: usize, budget: usize) -> Result<()> {
    let mut total: usize = 0;
    for k in 0..=max_len {
        total = total.saturating_add(word_count(p, k));
        if total > budget {
            return Err(Error::Budget { budget });
        }
    }
    Ok(())
}

/// Orbit points w·m grouped by word length 0..=L, in lexicographic word order.
pub fn orbit_layers(group: &SchottkyGroup, m: &HPoint<1>, max_len: usize, budget: usize) -> Result<Vec<Vec<HPoint<1>>>> {
    check_word_budget(group.rank(), max_len, budget)?;
    let mut layers: Vec<Vec<HPoint<1>>> = (0..=max_len)
        .map(|k| Vec::with_capacity(word_count(group.rank(), k)))
        .collect();
    layers[0].push(*m);
    walk_words(group, max_len, |w, g| {
        layers[w.len()].push(g.apply(m));
        true
    });
    Ok(layers)
}

/// Distances d(m, w·m2) ≤ radius over all reduced words w, sorted.
///
/// Both points must lie in the fundamental domain. The orbit points of all
/// extensions of a word ending in a lie in the half-disk over the image of
/// the disk boundary of a⁻¹, and a branch is pruned once that half-disk is
/// farther than `radius` from m.
pub fn orbit_distances_within(
    group: &SchottkyGroup,
    m: &HPoint<1>,
    m2: &HPoint<1>,
    radius: f64,
    budget: usize,
) -> Result<Vec<f64>> {
    if !group.in_fundamental_domain(m) || !group.in_fundamental_domain(m2) {
        return Err(Error::Domain("orbit ball needs points in the fundamental domain"));
    }
    let mut out = Vec::new();
    let d0 = crate::hyperbolic::hyp_dist(m, m2);
    if d0 <= radius {
        out.push(d0);
    }
    let mut visited = 0usize;
    let mut over = false;
    walk_words(group, usize::MAX >> 1, |w, g| {
        visited += 1;
        if visited > budget {
            over = true;
            return false;
        }
        let last = w[w.len() - 1];
        let k = group.letter_disk(inv_letter(last));
        let x1 = g.apply_complex(Complex64::new(k.center - k.radius, 0.0)).re;
        let x2 = g.apply_complex(Complex64::new(k.center + k.radius, 0.0)).re;
        let c = 0.5 * (x1 + x2);
        let r = 0.5 * (x2 - x1).abs();
        let dy = m.y() - c;
        let h = m.height();
        let gap = (dy * dy + h * h - r * r) / (2.0 * r * h);
        if gap > 0.0 && gap.asinh() > radius {
            return false;
        }
        let d = crate::hyperbolic::hyp_dist(m, &g.apply(m2));
        if d <= radius {
            out.push(d);
        }
        true
    });
    if over {
        return Err(Error::Budget { budget });
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(out)
}

/// Stream all reduced words of length ≤ L with their matrices.
pub fn enumerate_words(group: &SchottkyGroup, max_len: usize, budget: usize) -> Result<WordIter<'_>> {
    check_word_budget(group.rank(), max_len, budget)?;
    Ok(WordIter {
        group,
        max_len,
        len: 0,
        letters: Vec::new(),
        maps: Vec::new(),
        started: false,
    })
}

/// A primitive closed geodesic, represented by its canonical word.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedGeodesic {
    pub word: Word,
    pub length: f64,
    /// Rotation angles of the holonomy; empty on surfaces.
    pub rotation_angles: Vec<f64>,
}

/// Primitive closed geodesics sorted by length.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthSpectrum {
    pub geodesics: Vec<ClosedGeodesic>,
    pub cutoff: f64,
    /// Every primitive class shorter than this is present.
    pub complete_below: f64,
}

impl LengthSpectrum {
    pub fn lengths(&self) -> Vec<f64> {
        self.geodesics.iter().map(|g| g.length).collect()
    }

    pub fn shortest(&self) -> Option<f64> {
        self.geodesics.first().map(|g| g.length)
    }

    fn sort(&mut self) {
        self.geodesics.sort_by(|x, y| {
            x.length
                .partial_cmp(&y.length)
                .unwrap_or(Ordering::Equal)
                .then_with(|| x.word.ids().cmp(&y.word.ids()))
        });
    }
}

/// All primitive classes with ℓ ≤ ell_max.
///
/// Words are pruned with the certified bound ℓ(a₁…a_k) ≥ Σ log(1/κ(a_i, a_{i+1}))
/// (cyclic indices), κ(a, b) being the largest derivative of a on D_b, so the
/// result is complete below ell_max.
pub fn primitive_geodesics(group: &SchottkyGroup, ell_max: f64, budget: usize) -> Result<LengthSpectrum> {
    let lc_min = group.min_log_contraction();
    if !(lc_min > 0.0) {
        return Err(Error::Unsupported("generators are not contracting on the disks"));
    }
    let n = group.letter_count() as LetterId;
    let mut lc = vec![0.0; (n as usize) * (n as usize)];
    for a in 0..n {
        for b in 0..n {
            if b != inv_letter(a) {
                lc[(a as usize) * (n as usize) + b as usize] = group.pair_log_contraction(a, b);
            }
        }
    }
    let max_len = (ell_max / lc_min).floor() as usize + 1;
    let mut out = Vec::new();
    let mut visited = 0usize;
    let mut bound: Vec<f64> = vec![0.0; max_len + 1];
    let mut over_budget = false;
    walk_words(group, max_len, |w, m| {
        visited += 1;
        if visited > budget {
            over_budget = true;
            return false;
        }
        let k = w.len();
        let a1 = w[0];
        let last = w[k - 1];
        // canonical words start with their least letter, also against inverses
        if last < a1 || inv_letter(last) < a1 {
            return false;
        }
        if k >= 2 {
            bound[k - 1] = bound[k - 2] + lc[(w[k - 2] as usize) * (n as usize) + last as usize];
        } else {
            bound[0] = 0.0;
        }
        if bound[k - 1] + lc_min > ell_max {
            return false;
        }
        let cyclic = k == 1 || last != inv_letter(a1);
        if cyclic {
            let closing = lc[(last as usize) * (n as usize) + a1 as usize];
            if bound[k - 1] + closing <= ell_max {
                if let Ok(ell) = m.translation_length() {
                    if ell <= ell_max && is_canonical_ids(w) && is_primitive_ids(w) {
                        out.push(ClosedGeodesic {
                            word: Word::from_ids(w),
                            length: ell,
                            rotation_angles: Vec::new(),
                        });
                    }
                }
            }
        }
        true
    });
    if over_budget {
        return Err(Error::Budget { budget });
    }
    let mut spec = LengthSpectrum { geodesics: out, cutoff: ell_max, complete_below: ell_max };
    spec.sort();
    Ok(spec)
}

/// All primitive classes of word length ≤ L; complete below L·log(1/κ_max).
pub fn primitive_geodesics_by_word_length(group: &SchottkyGroup, max_len: usize, budget: usize) -> Result<LengthSpectrum> {
    let mut out = Vec::new();
    let mut visited = 0usize;
    let mut over = false;
    walk_words(group, max_len, |w, m| {
        visited += 1;
        if visited > budget {
            over = true;
            return false;
        }
        let k = w.len();
        let (a1, last) = (w[0], w[k - 1]);
        if last < a1 || inv_letter(last) < a1 {
            return false;
        }
        if (k == 1 || last != inv_letter(a1)) && is_canonical_ids(w) && is_primitive_ids(w) {
            if let Ok(ell) = m.translation_length() {
                out.push(ClosedGeodesic { word: Word::from_ids(w), length: ell, rotation_angles: Vec::new() });
            }
        }
        true
    });
    if over {
        return Err(Error::Budget { budget });
    }
    let lc_min = group.min_log_contraction().max(0.0);
    let cutoff = out.iter().map(|g| g.length).fold(0.0, f64::max);
    let mut spec = LengthSpectrum { geodesics: out, cutoff, complete_below: max_len as f64 * lc_min };
    spec.sort();
    Ok(spec)
}
