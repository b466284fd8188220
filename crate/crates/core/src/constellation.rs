//! 2D and 4D constellations and their geometric metrics.
//!
//! Integer-lattice constellations (cross QAM, square QAM, the D4 ball) are
//! kept in natural units: odd-integer coordinates for QAM, integer
//! coordinates for D4. Coordinates are stored as `f64`, which represents
//! these integers exactly, so distance comparisons on them are exact until a
//! normalization is applied.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{invalid, Result};

/// Relative tolerance used when deciding whether two distances are equal.
pub const DISTANCE_RTOL: f64 = 1e-9;

/// A point of a 2D integer constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point2D {
    pub x: i64,
    pub y: i64,
}

impl Point2D {
    pub const fn new(x: i64, y: i64) -> Self {
        Point2D { x, y }
    }

    pub fn power(&self) -> i64 {
        self.x * self.x + self.y * self.y
    }

    /// Whether the point belongs to the cross-QAM constellation of parameter `m`:
    /// odd coordinates of magnitude at most `2^(m+1) - 1`, outside the removed
    /// corner quarter.
    pub fn in_cross_qam(&self, m: u32) -> bool {
        let lim = (1i64 << (m + 1)) - 1;
        let half = 1i64 << m;
        let (ax, ay) = (self.x.abs(), self.y.abs());
        self.x.rem_euclid(2) == 1
            && self.y.rem_euclid(2) == 1
            && ax <= lim
            && ay <= lim
            && !(ax > half && ay > half)
    }
}

/// A finite set of 2D points, optionally with one label per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation2D {
    pub name: String,
    pub points: Vec<Point2D>,
    /// Cross-QAM parameter `m`, when the constellation is a cross QAM.
    pub scale_m: Option<u32>,
    /// Bit labels, `labels[i]` belongs to `points[i]`.
    pub labels: Option<Vec<u32>>,
    /// Number of bits per label when `labels` is present.
    pub label_bits: u32,
}

impl Constellation2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Average symbol power under a uniform distribution over the points.
    pub fn mean_power(&self) -> f64 {
        let total: i64 = self.points.iter().map(Point2D::power).sum();
        total as f64 / self.points.len() as f64
    }

    /// Writes one point per row: `x,y` followed by the label bits when present.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match &self.labels {
            Some(_) => writeln!(w, "x,y,bits")?,
            None => writeln!(w, "x,y")?,
        }
        for (i, p) in self.points.iter().enumerate() {
            match &self.labels {
                Some(labels) => writeln!(
                    w,
                    "{},{},{}",
                    p.x,
                    p.y,
                    format_label(labels[i], self.label_bits)
                )?,
                None => writeln!(w, "{},{}", p.x, p.y)?,
            }
        }
        Ok(())
    }
}

/// Formats a label MSB first, i.e. bit `nbits-1` is the leftmost character.
pub fn format_label(label: u32, nbits: u32) -> String {
    (0..nbits)
        .rev()
        .map(|i| if label >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// One 2-symbol sequence `(x1, y1, x2, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector4D {
    pub coords: [f64; 4],
}

impl Vector4D {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Vector4D {
            coords: [x1, y1, x2, y2],
        }
    }

    pub fn from_symbols(a: Point2D, b: Point2D) -> Self {
        Vector4D::new(a.x as f64, a.y as f64, b.x as f64, b.y as f64)
    }

    pub fn norm2(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    /// Powers of the two 2D symbols.
    pub fn symbol_powers(&self) -> [f64; 2] {
        let [x1, y1, x2, y2] = self.coords;
        [x1 * x1 + y1 * y1, x2 * x2 + y2 * y2]
    }

    pub fn peak_symbol_power(&self) -> f64 {
        let [a, b] = self.symbol_powers();
        a.max(b)
    }

    pub fn dist2(&self, other: &Vector4D) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Vector4D {
        Vector4D {
            coords: self.coords.map(|c| c * s),
        }
    }

    /// Lexicographic comparison on `(x1, y1, x2, y2)`.
    pub fn lex_cmp(&self, other: &Vector4D) -> Ordering {
        for (a, b) in self.coords.iter().zip(other.coords.iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// A finite set of 4D vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation4D {
    pub name: String,
    pub vectors: Vec<Vector4D>,
    /// Factor that scales the constellation to unit average 2D-symbol energy
    /// under a uniform distribution over its vectors.
    pub normalization: f64,
}

impl Constellation4D {
    pub fn new(name: impl Into<String>, vectors: Vec<Vector4D>) -> Result<Self> {
        if vectors.is_empty() {
            return invalid("empty 4D constellation");
        }
        let es2d = mean_symbol_energy(&vectors);
        if es2d <= 0.0 {
            return invalid("4D constellation has zero energy");
        }
        Ok(Constellation4D {
            name: name.into(),
            vectors,
            normalization: 1.0 / es2d.sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1,y1,x2,y2")?;
        for v in &self.vectors {
            let [a, b, c, d] = v.coords;
            writeln!(w, "{a},{b},{c},{d}")?;
        }
        Ok(())
    }
}

/// Average 2D-symbol energy under the uniform distribution over `vectors`.
pub fn mean_symbol_energy(vectors: &[Vector4D]) -> f64 {
    vectors.iter().map(Vector4D::norm2).sum::<f64>() / (2.0 * vectors.len() as f64)
}

/// Builds the `(3·4^m)`-ary cross QAM: the `4^(m+1)`-QAM grid with the
/// outer quarter of each quadrant's corner removed. Points are in
/// lexicographic `(x, y)` order.
pub fn build_cross_qam(m: u32) -> Result<Constellation2D> {
    if m < 1 {
        return invalid("cross QAM needs m >= 1");
    }
    if m > 12 {
        return invalid(format!("cross QAM parameter m = {m} is too large"));
    }
    let lim = (1i64 << (m + 1)) - 1;
    let points: Vec<Point2D> = odd_range(lim)
        .flat_map(|x| odd_range(lim).map(move |y| Point2D::new(x, y)))
        .filter(|p| p.in_cross_qam(m))
        .collect();
    debug_assert_eq!(points.len(), 3 << (2 * m));
    Ok(Constellation2D {
        name: format!("{}-cross-qam", points.len()),
        points,
        scale_m: Some(m),
        labels: None,
        label_bits: 0,
    })
}

fn odd_range(lim: i64) -> impl Iterator<Item = i64> + Clone {
    (-lim..=lim).step_by(2)
}

/// Reflected binary Gray code of `i`.
pub fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

/// Builds a square QAM of the given order with the usual product Gray
/// labeling (row Gray code in the high bits, column Gray code in the low bits,
/// row 0 at the top).
pub fn build_square_qam(order: u32) -> Result<Constellation2D> {
    if !matches!(order, 4 | 16 | 64 | 256) {
        return invalid(format!(
            "square QAM order {order} not in {{4, 16, 64, 256}}"
        ));
    }
    let half_bits = order.trailing_zeros() / 2;
    let side = 1i64 << half_bits;
    let lim = side - 1;
    let mut points = Vec::with_capacity(order as usize);
    let mut labels = Vec::with_capacity(order as usize);
    for x in odd_range(lim) {
        for y in odd_range(lim) {
            let col = ((x + lim) / 2) as u32;
            let row = ((lim - y) / 2) as u32;
            points.push(Point2D::new(x, y));
            labels.push(gray(row) << half_bits | gray(col));
        }
    }
    Ok(Constellation2D {
        name: format!("{order}-qam"),
        points,
        scale_m: None,
        labels: Some(labels),
        label_bits: 2 * half_bits,
    })
}

/// Builds the 145-point ball of the D4 lattice (integer 4-tuples with even
/// coordinate sum and squared norm at most 6), ordered by shell then
/// lexicographically.
pub fn build_welti_class1() -> Constellation4D {
    let mut pts: Vec<[i64; 4]> = Vec::new();
    for a in -2..=2i64 {
        for b in -2..=2i64 {
            for c in -2..=2i64 {
                for d in -2..=2i64 {
                    let n = a * a + b * b + c * c + d * d;
                    if (a + b + c + d).rem_euclid(2) == 0 && n <= 6 {
                        pts.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    pts.sort_by_key(|p| (p.iter().map(|c| c * c).sum::<i64>(), *p));
    let vectors = pts
        .into_iter()
        .map(|p| Vector4D {
            coords: p.map(|c| c as f64),
        })
        .collect();
    Constellation4D::new("class1-145", vectors).expect("non-empty")
}

/// Removes `|c| - target` vectors with the highest per-symbol peak power.
/// Ties go to the lexicographically largest vector. The surviving vectors
/// keep their original order.
pub fn trim_high_power(c: &Constellation4D, target: usize) -> Result<Constellation4D> {
    if target > c.len() {
        return invalid(format!(
            "trim target {target} exceeds constellation size {}",
            c.len()
        ));
    }
    if target == 0 {
        return invalid("trim target must be positive");
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&c.vectors[i], &c.vectors[j]);
        b.peak_symbol_power()
            .total_cmp(&a.peak_symbol_power())
            .then_with(|| b.lex_cmp(a))
    });
    let mut removed = vec![false; c.len()];
    for &i in &order[..c.len() - target] {
        removed[i] = true;
    }
    let vectors = c
        .vectors
        .iter()
        .zip(removed)
        .filter(|(_, r)| !r)
        .map(|(v, _)| *v)
        .collect();
    let name = if target == c.len() {
        c.name.clone()
    } else {
        format!("{}-trim{target}", c.name)
    };
    Constellation4D::new(name, vectors)
}

/// Builds the dicyclic constellation: two orthogonal PSK rings of
/// `size / 2` points each, one per 2D symbol, with radius chosen for unit
/// average 2D-symbol energy.
pub fn build_dicyclic(size: usize) -> Result<Constellation4D> {
    if size == 0 || size % 2 == 1 {
        return invalid(format!(
            "dicyclic size must be even and positive, got {size}"
        ));
    }
    let ring = size / 2;
    // All energy sits in one of the two symbols, so E2D = rho^2 / 2.
    let rho = 2f64.sqrt();
    let phase = |j: usize| 2.0 * PI * j as f64 / ring as f64;
    let first = (0..ring).map(|j| {
        let (s, c) = phase(j).sin_cos();
        Vector4D::new(rho * c, rho * s, 0.0, 0.0)
    });
    let second = (0..ring).map(|j| {
        let (s, c) = phase(j).sin_cos();
        Vector4D::new(0.0, 0.0, rho * c, rho * s)
    });
    Constellation4D::new(format!("dicyclic-{size}"), first.chain(second).collect())
}

/// Uniform distribution over a set of vectors.
pub fn uniform(vectors: &[Vector4D]) -> Vec<(Vector4D, f64)> {
    let p = 1.0 / vectors.len() as f64;
    vectors.iter().map(|v| (*v, p)).collect()
}

/// Constellation PAPR in dB: the largest 2D-symbol power that occurs with
/// nonzero probability over the average 2D-symbol power under `dist`.
pub fn constellation_papr(dist: &[(Vector4D, f64)]) -> Result<f64> {
    if dist.is_empty() {
        return invalid("empty distribution");
    }
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-12 || dist.iter().any(|(_, p)| *p < 0.0) {
        return invalid(format!("probabilities sum to {total}, not 1"));
    }
    let mut peak = 0.0f64;
    let mut avg = 0.0;
    for (v, p) in dist {
        if *p > 0.0 {
            peak = peak.max(v.peak_symbol_power());
        }
        avg += p * v.norm2() / 2.0;
    }
    if avg <= 0.0 {
        return invalid("distribution has zero average power");
    }
    Ok(10.0 * (peak / avg).log10())
}

/// Minimum-distance neighbor census of a constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborStats {
    pub min_distance: f64,
    pub per_point_counts: Vec<usize>,
    pub avg: f64,
    pub max: usize,
}

impl NeighborStats {
    /// Histogram of per-point counts as `(count, number of points)`.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for &c in &self.per_point_counts {
            *h.entry(c).or_insert(0) += 1;
        }
        h.into_iter().collect()
    }
}

pub fn neighbor_stats(c: &Constellation4D) -> Result<NeighborStats> {
    neighbor_stats_of(&c.vectors)
}

pub fn neighbor_stats_of(vectors: &[Vector4D]) -> Result<NeighborStats> {
    if vectors.len() < 2 {
        return invalid("neighbor statistics need at least two vectors");
    }
    let (min_distance, pairs) = min_distance_pairs(vectors);
    let mut counts = vec![0usize; vectors.len()];
    for (i, j) in pairs {
        counts[i] += 1;
        counts[j] += 1;
    }
    let avg = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let max = counts.iter().copied().max().unwrap_or(0);
    Ok(NeighborStats {
        min_distance,
        per_point_counts: counts,
        avg,
        max,
    })
}

/// Exact minimum pairwise distance and every unordered pair `(i, j)`, `i < j`,
/// at that distance.
///
/// Uses a uniform hash grid whose cell size is an upper bound on the minimum
/// distance, so each candidate pair lies in adjacent cells. Panics on
/// duplicate vectors or fewer than two vectors.
pub fn min_distance_pairs(vectors: &[Vector4D]) -> (f64, Vec<(usize, usize)>) {
    assert!(vectors.len() >= 2, "need at least two vectors");
    let bound2 = vectors[1..]
        .iter()
        .map(|v| v.dist2(&vectors[0]))
        .fold(f64::INFINITY, f64::min);
    assert!(bound2 > 0.0, "duplicate vectors");
    let cell = bound2.sqrt();
    let key = |v: &Vector4D| v.coords.map(|c| (c / cell).floor() as i64);

    let mut grid: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
    for (i, v) in vectors.iter().enumerate() {
        grid.entry(key(v)).or_default().push(i);
    }

    let for_each_candidate = |f: &mut dyn FnMut(usize, usize, f64)| {
        for (i, v) in vectors.iter().enumerate() {
            let k = key(v);
            for off in 0..81usize {
                let mut nk = k;
                let mut o = off;
                for c in nk.iter_mut() {
                    *c += (o % 3) as i64 - 1;
                    o /= 3;
                }
                if let Some(bucket) = grid.get(&nk) {
                    for &j in bucket {
                        if j > i {
                            f(i, j, v.dist2(&vectors[j]));
                        }
                    }
                }
            }
        }
    };

    let mut d2min = f64::INFINITY;
    for_each_candidate(&mut |_, _, d2| d2min = d2min.min(d2));
    assert!(d2min > 0.0, "duplicate vectors");
    let limit = d2min * (1.0 + 2.0 * DISTANCE_RTOL);
    let mut pairs = Vec::new();
    for_each_candidate(&mut |i, j, d2| {
        if d2 <= limit {
            pairs.push((i, j));
        }
    });
    pairs.sort_unstable();
    (d2min.sqrt(), pairs)
}
