//! Bits-to-signal mappings for the 4D cross QAM and the labelings they are
//! compared against.
//!
//! A labeling maps a `k`-bit sequence `b_0 .. b_{k-1}` to a 4D vector. Bit
//! sequences are stored as integers with bit `i` holding `b_i`.
//!
//! The cross-QAM Gray mapping for parameter `m` (`k = 3 + 4m`) works in two
//! steps:
//!
//! 1. The top seven bits select a pair of 12-QAM "skeleton" symbols. The
//!    three bits `(b_{k-1}, b_{k-2}, b_{k-3})` pick a first-quadrant pattern
//!    from a fixed eight-entry table, and the next four bits
//!    `(b_{k-4}, .., b_{k-7})` set the signs of `(x1, y1, x2, y2)`. The pair
//!    is scaled by `2^(m-1)` and gives the two cluster centers.
//! 2. The remaining `4m - 4` bits pick one point inside each cluster, a
//!    uniform `4^(m-1)`-QAM Gray grid that is mirrored vertically and/or
//!    horizontally depending on where the cluster sits, so that two facing
//!    clusters carry identical labels across their shared boundary.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::constellation::{
    format_label, gray, mean_symbol_energy, min_distance_pairs, Constellation2D, Point2D, Vector4D,
};
use crate::error::{invalid, Error, Result};

/// Largest supported cross-QAM parameter (`k = 31` bits per 4D vector).
pub const MAX_M: u32 = 7;

/// Number of bits carried by one 4D vector of the `(3·4^m)`-ary cross QAM.
pub const fn bits_per_vector(m: u32) -> u32 {
    3 + 4 * m
}

/// Bits per 2D symbol of the `(3·4^m)`-ary cross QAM, `2m + 1.5`.
pub fn bits_per_2d(m: u32) -> f64 {
    bits_per_vector(m) as f64 / 2.0
}

/// An ordered bit sequence `b_0 .. b_{k-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitSeq {
    bits: u64,
    k: u32,
}

impl BitSeq {
    /// Builds a sequence from an integer whose bit `i` is `b_i`.
    pub fn new(bits: u64, k: u32) -> Self {
        assert!(k <= 64);
        let mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        BitSeq {
            bits: bits & mask,
            k,
        }
    }

    /// Builds a sequence from `bits[i] = b_i`.
    pub fn from_slice(bits: &[u8]) -> Self {
        let v = bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b & 1) << i));
        BitSeq::new(v, bits.len() as u32)
    }

    pub fn value(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> u32 {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn bit(&self, i: u32) -> u8 {
        (self.bits >> i & 1) as u8
    }

    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.k).map(|i| self.bit(i)).collect()
    }
}

/// Written as `b_{k-1} .. b_0`, most significant first.
impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.k).rev() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

/// The 12-QAM skeleton pair `(x1, y1, x2, y2)`, entries in `{±1, ±3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseTuple(pub [i64; 4]);

/// First-quadrant patterns indexed by `4·b_{k-1} + 2·b_{k-2} + b_{k-3}`.
const BASIC_TABLE: [[i64; 4]; 8] = [
    [1, 3, 1, 3], // 000
    [1, 3, 1, 1], // 001
    [1, 1, 3, 1], // 010
    [1, 3, 3, 1], // 011
    [1, 1, 1, 3], // 100
    [3, 1, 1, 3], // 101
    [3, 1, 3, 1], // 110
    [3, 1, 1, 1], // 111
];

/// The basic first-quadrant mapping, arguments in the order
/// `(b_{k-1}, b_{k-2}, b_{k-3})`.
pub fn basic_map_f(first: u8, second: u8, third: u8) -> BaseTuple {
    let idx = usize::from(first & 1) << 2 | usize::from(second & 1) << 1 | usize::from(third & 1);
    BaseTuple(BASIC_TABLE[idx])
}

fn basic_index(t: [i64; 4]) -> Option<u64> {
    BASIC_TABLE.iter().position(|e| *e == t).map(|i| i as u64)
}

/// Applies the sign diagonal. `signs` holds four bits; bit 3 negates `x1`,
/// bit 2 `y1`, bit 1 `x2` and bit 0 `y2`.
pub fn sign_apply_d(t: BaseTuple, signs: u8) -> BaseTuple {
    let mut out = t.0;
    for (j, c) in out.iter_mut().enumerate() {
        if signs >> (3 - j) & 1 == 1 {
            *c = -*c;
        }
    }
    BaseTuple(out)
}

/// The `k = 7` mapping onto 12-QAM pairs.
pub fn map12(b: BitSeq) -> Result<Vector4D> {
    if b.len() != 7 {
        return invalid(format!("map12 expects 7 bits, got {}", b.len()));
    }
    let t = sign_apply_d(
        basic_map_f(b.bit(6), b.bit(5), b.bit(4)),
        (b.value() & 0xf) as u8,
    );
    Ok(Vector4D {
        coords: t.0.map(|c| c as f64),
    })
}

/// Gray labeling of the implicit uniform `4^(m-1)`-QAM inside one cluster.
///
/// Row 0 is the top row (largest y), column 0 the leftmost (smallest x).
/// Entry `(r, c)` is `gray(r)` in the high `m-1` bits followed by `gray(c)`
/// in the low `m-1` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerGray {
    side: usize,
    nbits: u32,
    grid: Vec<u32>,
    pos: Vec<(usize, usize)>,
}

impl InnerGray {
    fn from_grid(side: usize, nbits: u32, grid: Vec<u32>) -> Self {
        let mut pos = vec![(usize::MAX, usize::MAX); grid.len()];
        for (i, &l) in grid.iter().enumerate() {
            pos[l as usize] = (i / side, i % side);
        }
        InnerGray {
            side,
            nbits,
            grid,
            pos,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Label bits per point, `2m - 2`.
    pub fn nbits(&self) -> u32 {
        self.nbits
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.grid[row * self.side + col]
    }

    /// Position of a label in the unflipped grid.
    pub fn position(&self, label: u32) -> (usize, usize) {
        self.pos[label as usize]
    }

    /// Coordinates of grid cell `(row, col)` in the implicit QAM centered at
    /// the origin.
    pub fn point_at(&self, row: usize, col: usize) -> Point2D {
        let s = self.side as i64 - 1;
        Point2D::new(2 * col as i64 - s, s - 2 * row as i64)
    }

    /// `U·G`: the grid mirrored top to bottom.
    pub fn flip_vertical(&self) -> InnerGray {
        let s = self.side;
        let grid = (0..s * s)
            .map(|i| self.entry(s - 1 - i / s, i % s))
            .collect();
        InnerGray::from_grid(s, self.nbits, grid)
    }

    /// `G·U`: the grid mirrored left to right.
    pub fn flip_horizontal(&self) -> InnerGray {
        let s = self.side;
        let grid = (0..s * s)
            .map(|i| self.entry(i / s, s - 1 - i % s))
            .collect();
        InnerGray::from_grid(s, self.nbits, grid)
    }

    /// Point carrying `label` in `U^ev · G · U^eh`.
    pub fn lookup(&self, label: u32, ev: bool, eh: bool) -> Point2D {
        let (r, c) = self.position(label);
        let r = if ev { self.side - 1 - r } else { r };
        let c = if eh { self.side - 1 - c } else { c };
        self.point_at(r, c)
    }

    /// Label at `offset` in `U^ev · G · U^eh`, or `None` if the offset is
    /// not a grid point.
    pub fn label_at(&self, offset: Point2D, ev: bool, eh: bool) -> Option<u32> {
        let s = self.side as i64 - 1;
        let (cx, ry) = (offset.x + s, s - offset.y);
        if cx < 0 || ry < 0 || cx % 2 != 0 || ry % 2 != 0 || cx > 2 * s || ry > 2 * s {
            return None;
        }
        let (mut r, mut c) = ((ry / 2) as usize, (cx / 2) as usize);
        if ev {
            r = self.side - 1 - r;
        }
        if eh {
            c = self.side - 1 - c;
        }
        Some(self.entry(r, c))
    }
}

/// Builds the cluster Gray grid for parameter `m`; `m = 1` gives the single
/// empty label.
pub fn inner_gray(m: u32) -> Result<InnerGray> {
    if !(1..=MAX_M).contains(&m) {
        return invalid(format!("cross QAM parameter m = {m} outside 1..={MAX_M}"));
    }
    let half = m - 1;
    let side = 1usize << half;
    let grid = (0..side * side)
        .map(|i| gray((i / side) as u32) << half | gray((i % side) as u32))
        .collect();
    Ok(InnerGray::from_grid(side, 2 * half, grid))
}

/// Flip exponents `(vertical, horizontal)` for a cluster whose skeleton
/// coordinates are `(x̃, ỹ)`: `mod2(|ỹ-1|/2)` and `mod2(|x̃-1|/2)`.
pub fn flip_exponents(xt: i64, yt: i64) -> (bool, bool) {
    let e = |c: i64| ((c - 1).abs() / 2) % 2 == 1;
    (e(yt), e(xt))
}

/// Offset of the point labeled `bits` inside the cluster with skeleton
/// coordinates `(x̃, ỹ)`.
pub fn cluster_point_s(xt: i64, yt: i64, bits: u32, g: &InnerGray) -> Point2D {
    assert!((bits as usize) < g.grid.len(), "cluster label out of range");
    let (ev, eh) = flip_exponents(xt, yt);
    g.lookup(bits, ev, eh)
}

/// Reads `n` bits `b_lo, .., b_{lo+n-1}` as a cluster label, with `b_lo` as
/// the most significant label bit.
fn seq_to_label(bits: u64, lo: u32, n: u32) -> u32 {
    (0..n).fold(0u32, |acc, t| acc << 1 | (bits >> (lo + t) & 1) as u32)
}

fn label_to_seq(label: u32, lo: u32, n: u32) -> u64 {
    (0..n).fold(0u64, |acc, t| {
        acc | u64::from(label >> (n - 1 - t) & 1) << (lo + t)
    })
}

/// The cross-QAM Gray mapping for one value of `m`.
#[derive(Debug, Clone)]
pub struct CrossQamMapper {
    m: u32,
    inner: InnerGray,
}

impl CrossQamMapper {
    pub fn new(m: u32) -> Result<Self> {
        Ok(CrossQamMapper {
            m,
            inner: inner_gray(m)?,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        bits_per_vector(self.m)
    }

    pub fn inner(&self) -> &InnerGray {
        &self.inner
    }

    /// Skeleton tuple `t` from the top seven bits.
    pub fn skeleton(&self, bits: u64) -> BaseTuple {
        let k = self.k();
        let bit = |i: u32| (bits >> i & 1) as u8;
        let signs = (bits >> (k - 7) & 0xf) as u8;
        sign_apply_d(basic_map_f(bit(k - 1), bit(k - 2), bit(k - 3)), signs)
    }

    /// Maps an integer bit pattern (bit `i` = `b_i`) to integer coordinates.
    pub fn map_value(&self, bits: u64) -> [i64; 4] {
        let t = self.skeleton(bits).0;
        let scale = 1i64 << (self.m - 1);
        let n = self.inner.nbits;
        let first = seq_to_label(bits, n, n);
        let second = seq_to_label(bits, 0, n);
        let s1 = cluster_point_s(t[0], t[1], first, &self.inner);
        let s2 = cluster_point_s(t[2], t[3], second, &self.inner);
        [
            scale * t[0] + s1.x,
            scale * t[1] + s1.y,
            scale * t[2] + s2.x,
            scale * t[3] + s2.y,
        ]
    }

    pub fn map(&self, b: BitSeq) -> Result<Vector4D> {
        if b.len() != self.k() {
            return invalid(format!(
                "m = {} needs {} bits, got {}",
                self.m,
                self.k(),
                b.len()
            ));
        }
        Ok(Vector4D {
            coords: self.map_value(b.value()).map(|c| c as f64),
        })
    }

    /// Exact inverse of [`CrossQamMapper::map`] on its image.
    pub fn demap(&self, v: &Vector4D) -> Result<BitSeq> {
        let not_codeword = || Error::NotACodeword(v.coords);
        if v.coords.iter().any(|c| c.fract() != 0.0 || c.abs() > 1e15) {
            return Err(not_codeword());
        }
        let c = v.coords.map(|c| c as i64);
        let scale = 1i64 << (self.m - 1);
        // Cluster centers sit at scale·t with t odd; offsets are below scale.
        let t = c.map(|x| 2 * x.div_euclid(2 * scale) + 1);
        if t.iter().any(|x| x.abs() > 3) {
            return Err(not_codeword());
        }
        let k = self.k();
        let signs = t.iter().fold(0u64, |acc, &x| acc << 1 | u64::from(x < 0));
        let idx = basic_index(t.map(i64::abs)).ok_or_else(not_codeword)?;
        let n = self.inner.nbits;
        let label = |tx: i64, ty: i64, ox: i64, oy: i64| {
            let (ev, eh) = flip_exponents(tx, ty);
            self.inner.label_at(Point2D::new(ox, oy), ev, eh)
        };
        let l1 =
            label(t[0], t[1], c[0] - scale * t[0], c[1] - scale * t[1]).ok_or_else(not_codeword)?;
        let l2 =
            label(t[2], t[3], c[2] - scale * t[2], c[3] - scale * t[3]).ok_or_else(not_codeword)?;
        let bits =
            idx << (k - 3) | signs << (k - 7) | label_to_seq(l1, n, n) | label_to_seq(l2, 0, n);
        if self.map_value(bits) != c {
            return Err(not_codeword());
        }
        Ok(BitSeq::new(bits, k))
    }

    /// All `2^k` vectors ordered by input bit pattern.
    pub fn enumerate(&self) -> Vec<Vector4D> {
        (0..1u64 << self.k())
            .map(|b| Vector4D {
                coords: self.map_value(b).map(|c| c as f64),
            })
            .collect()
    }

    pub fn labeling(&self) -> Labeling4D {
        Labeling4D::new(
            format!("{}-cross-qam-4d-gray", 3u64 << (2 * self.m)),
            self.k(),
            self.enumerate(),
        )
        .expect("cross-QAM mapping is injective")
    }
}

/// The general cross-QAM Gray mapping for parameter `m`.
pub fn map_general(b: BitSeq, m: u32) -> Result<Vector4D> {
    CrossQamMapper::new(m)?.map(b)
}

/// Inverse of [`map_general`].
pub fn demap_hard(v: &Vector4D, m: u32) -> Result<BitSeq> {
    CrossQamMapper::new(m)?.demap(v)
}

/// The `2^(3+4m)` vectors used by the cross-QAM labeling.
pub fn enumerate_used(m: u32) -> Result<Vec<Vector4D>> {
    Ok(CrossQamMapper::new(m)?.enumerate())
}

fn vector_key(v: &Vector4D) -> [i64; 4] {
    v.coords.map(|c| (c * 1e9).round() as i64)
}

/// A bijection between `k`-bit labels and a set of `2^k` 4D vectors.
#[derive(Debug, Clone)]
pub struct Labeling4D {
    pub name: String,
    k: u32,
    vectors: Vec<Vector4D>,
    inverse: HashMap<[i64; 4], u32>,
}

impl Labeling4D {
    /// `vectors[label]` is the vector carrying `label`.
    pub fn new(name: impl Into<String>, k: u32, vectors: Vec<Vector4D>) -> Result<Self> {
        if k == 0 || k > 31 || vectors.len() != 1usize << k {
            return invalid(format!(
                "labeling with k = {k} needs 2^k vectors, got {}",
                vectors.len()
            ));
        }
        let mut inverse = HashMap::with_capacity(vectors.len());
        for (label, v) in vectors.iter().enumerate() {
            if inverse.insert(vector_key(v), label as u32).is_some() {
                return invalid(format!("labeling is not injective at {:?}", v.coords));
            }
        }
        Ok(Labeling4D {
            name: name.into(),
            k,
            vectors,
            inverse,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vector4D] {
        &self.vectors
    }

    pub fn forward(&self, b: BitSeq) -> Vector4D {
        assert_eq!(b.len(), self.k);
        self.vectors[b.value() as usize]
    }

    pub fn vector(&self, label: u32) -> Vector4D {
        self.vectors[label as usize]
    }

    pub fn inverse(&self, v: &Vector4D) -> Option<BitSeq> {
        self.inverse
            .get(&vector_key(v))
            .map(|&l| BitSeq::new(u64::from(l), self.k))
    }

    /// Average 2D-symbol energy with uniformly distributed labels.
    pub fn es2d(&self) -> f64 {
        mean_symbol_energy(&self.vectors)
    }

    /// The same labeling scaled to unit average 2D-symbol energy.
    pub fn normalized(&self) -> Labeling4D {
        let s = 1.0 / self.es2d().sqrt();
        Labeling4D::new(
            self.name.clone(),
            self.k,
            self.vectors.iter().map(|v| v.scaled(s)).collect(),
        )
        .expect("scaling preserves injectivity")
    }

    /// Distribution over vectors induced by uniform input bits.
    pub fn induced_distribution(&self) -> Vec<(Vector4D, f64)> {
        crate::constellation::uniform(&self.vectors)
    }

    /// Writes `bits,x1,y1,x2,y2` rows, bits written `b_{k-1}` first.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bits,x1,y1,x2,y2")?;
        for (l, v) in self.vectors.iter().enumerate() {
            let [a, b, c, d] = v.coords;
            writeln!(w, "{},{a},{b},{c},{d}", format_label(l as u32, self.k))?;
        }
        Ok(())
    }
}

/// The Gray labeling of a pair of square-QAM symbols: the first symbol's
/// label occupies the high bits.
pub fn square_qam_labeling(c: &Constellation2D) -> Result<Labeling4D> {
    let labels = match &c.labels {
        Some(l) => l,
        None => return invalid(format!("{} has no labels", c.name)),
    };
    let nb = c.label_bits;
    let mut by_label = vec![Point2D::new(0, 0); c.len()];
    for (p, &l) in c.points.iter().zip(labels) {
        by_label[l as usize] = *p;
    }
    let vectors = (0..1usize << (2 * nb))
        .map(|l| Vector4D::from_symbols(by_label[l >> nb], by_label[l & ((1 << nb) - 1)]))
        .collect();
    Labeling4D::new(format!("{}-pair-gray", c.name), 2 * nb, vectors)
}

/// Non-Gray baseline: sorts the vectors lexicographically and gives the
/// `i`-th vector the label `i` (`b_{k-1}` most significant).
pub fn progressive_labeling(vectors: &[Vector4D], k: u32, name: &str) -> Result<Labeling4D> {
    if k == 0 || k > 31 || vectors.len() != 1usize << k {
        return invalid(format!(
            "progressive labeling needs 2^{k} vectors, got {}",
            vectors.len()
        ));
    }
    let mut sorted = vectors.to_vec();
    sorted.sort_by(Vector4D::lex_cmp);
    Labeling4D::new(format!("{name}-progressive"), k, sorted)
}

/// One minimum-distance pair whose labels are not at Hamming distance 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub a: String,
    pub b: String,
    pub hamming: u32,
}

/// Outcome of an exhaustive Gray check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrayReport {
    pub labeling: String,
    pub vectors: usize,
    pub min_distance: f64,
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl GrayReport {
    pub fn is_gray(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for GrayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "violations: {}, min_distance: {}, pairs_checked: {}",
            self.violations.len(),
            self.min_distance,
            self.pairs_checked
        )
    }
}

/// Checks every unordered pair at the minimum distance and reports those
/// whose labels differ in other than exactly one bit.
pub fn verify_gray(labeling: &Labeling4D) -> GrayReport {
    let (min_distance, pairs) = min_distance_pairs(labeling.vectors());
    let violations = pairs
        .iter()
        .filter_map(|&(i, j)| {
            let hamming = (i ^ j).count_ones();
            (hamming != 1).then(|| Violation {
                a: format_label(i as u32, labeling.k),
                b: format_label(j as u32, labeling.k),
                hamming,
            })
        })
        .collect();
    GrayReport {
        labeling: labeling.name.clone(),
        vectors: labeling.len(),
        min_distance,
        pairs_checked: pairs.len(),
        violations,
    }
}

/// For each bit position `i` (index = `b_i`), the fraction of
/// minimum-distance pairs whose labels differ in that position.
pub fn per_bit_reliability(labeling: &Labeling4D) -> Vec<f64> {
    let (_, pairs) = min_distance_pairs(labeling.vectors());
    let mut counts = vec![0usize; labeling.k as usize];
    for &(i, j) in &pairs {
        let diff = i ^ j;
        for (b, c) in counts.iter_mut().enumerate() {
            *c += diff >> b & 1;
        }
    }
    counts
        .into_iter()
        .map(|c| c as f64 / pairs.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bits(s: &str) -> BitSeq {
        // s is written b_{k-1} .. b_0
        let v: Vec<u8> = s.bytes().rev().map(|c| c - b'0').collect();
        BitSeq::from_slice(&v)
    }

    #[test]
    fn table_entries() {
        assert_eq!(basic_map_f(0, 0, 0), BaseTuple([1, 3, 1, 3]));
        assert_eq!(basic_map_f(1, 0, 0), BaseTuple([1, 1, 1, 3]));
        assert_eq!(basic_map_f(1, 1, 0), BaseTuple([3, 1, 3, 1]));
        assert_eq!(basic_map_f(0, 1, 1), BaseTuple([1, 3, 3, 1]));
        assert_eq!(basic_map_f(1, 0, 1), BaseTuple([3, 1, 1, 3]));
    }

    #[test]
    fn table_cycle_is_gray() {
        let order = ["000", "001", "011", "010", "110", "111", "101", "100"];
        for w in 0..order.len() {
            let a = bits(order[w]);
            let b = bits(order[(w + 1) % order.len()]);
            let ta = basic_map_f(a.bit(2), a.bit(1), a.bit(0)).0;
            let tb = basic_map_f(b.bit(2), b.bit(1), b.bit(0)).0;
            let d2: i64 = ta.iter().zip(tb).map(|(x, y)| (x - y) * (x - y)).sum();
            assert_eq!(d2, 4, "{} -> {}", order[w], order[(w + 1) % 8]);
            assert_eq!((a.value() ^ b.value()).count_ones(), 1);
        }
    }

    #[test]
    fn sign_diagonal_order() {
        let t = BaseTuple([1, 3, 1, 3]);
        assert_eq!(sign_apply_d(t, 0b0000), BaseTuple([1, 3, 1, 3]));
        assert_eq!(sign_apply_d(t, 0b0001), BaseTuple([1, 3, 1, -3]));
        assert_eq!(sign_apply_d(t, 0b1000), BaseTuple([-1, 3, 1, 3]));
    }

    #[test]
    fn map12_examples() {
        assert_eq!(
            map12(bits("0000000")).unwrap(),
            Vector4D::new(1.0, 3.0, 1.0, 3.0)
        );
        assert_eq!(
            map12(bits("1000000")).unwrap(),
            Vector4D::new(1.0, 1.0, 1.0, 3.0)
        );
        assert!(map12(bits("000000")).is_err());
    }

    #[test]
    fn map12_image_excludes_all_inner() {
        let image: HashSet<[i64; 4]> = (0..128u64)
            .map(|b| map12(BitSeq::new(b, 7)).unwrap().coords.map(|c| c as i64))
            .collect();
        assert_eq!(image.len(), 128);
        let qam = crate::constellation::build_cross_qam(1).unwrap();
        let mut excluded = Vec::new();
        for a in &qam.points {
            for b in &qam.points {
                let v = [a.x, a.y, b.x, b.y];
                if !image.contains(&v) {
                    excluded.push(v);
                }
            }
        }
        assert_eq!(excluded.len(), 144 - 128);
        assert!(excluded.iter().all(|v| v.iter().all(|c| c.abs() == 1)));
    }

    #[test]
    fn inner_gray_grids() {
        let g1 = inner_gray(1).unwrap();
        assert_eq!((g1.side(), g1.nbits()), (1, 0));
        assert_eq!(g1.point_at(0, 0), Point2D::new(0, 0));

        let g2 = inner_gray(2).unwrap();
        assert_eq!(
            [
                g2.entry(0, 0),
                g2.entry(0, 1),
                g2.entry(1, 0),
                g2.entry(1, 1)
            ],
            [0b00, 0b01, 0b10, 0b11]
        );
        assert_eq!(g2.point_at(0, 0), Point2D::new(-1, 1));
        assert_eq!(g2.point_at(0, 1), Point2D::new(1, 1));
        assert_eq!(g2.point_at(1, 0), Point2D::new(-1, -1));
        assert_eq!(g2.point_at(1, 1), Point2D::new(1, -1));

        for m in 2..=5 {
            let g = inner_gray(m).unwrap();
            let s = g.side();
            let labels: HashSet<_> = (0..s * s).map(|i| g.entry(i / s, i % s)).collect();
            assert_eq!(labels.len(), s * s);
            for r in 0..s {
                for c in 0..s {
                    if r + 1 < s {
                        assert_eq!((g.entry(r, c) ^ g.entry(r + 1, c)).count_ones(), 1);
                    }
                    if c + 1 < s {
                        assert_eq!((g.entry(r, c) ^ g.entry(r, c + 1)).count_ones(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn flips_are_involutions_and_match_lookup() {
        for m in 2..=4 {
            let g = inner_gray(m).unwrap();
            assert_eq!(g.flip_vertical().flip_vertical(), g);
            assert_eq!(g.flip_horizontal().flip_horizontal(), g);
            for (ev, eh) in [(false, false), (true, false), (false, true), (true, true)] {
                let mut f = g.clone();
                if ev {
                    f = f.flip_vertical();
                }
                if eh {
                    f = f.flip_horizontal();
                }
                for label in 0..(1u32 << g.nbits()) {
                    let (r, c) = f.position(label);
                    assert_eq!(g.lookup(label, ev, eh), f.point_at(r, c));
                    assert_eq!(g.label_at(f.point_at(r, c), ev, eh), Some(label));
                }
            }
        }
    }

    #[test]
    fn cluster_point_examples() {
        let g = inner_gray(2).unwrap();
        for l in 0..4 {
            let (r, c) = g.position(l);
            assert_eq!(cluster_point_s(1, 1, l, &g), g.point_at(r, c));
        }
        assert_eq!(cluster_point_s(1, 3, 0b00, &g), Point2D::new(-1, -1));
        assert_eq!(flip_exponents(-3, 1), (false, false));
        assert_eq!(flip_exponents(-1, 1), (false, true));
        assert_eq!(flip_exponents(3, -3), (false, true));
        let g1 = inner_gray(1).unwrap();
        assert_eq!(cluster_point_s(3, -1, 0, &g1), Point2D::new(0, 0));
    }

    #[test]
    fn general_reduces_to_map12() {
        let mapper = CrossQamMapper::new(1).unwrap();
        for b in 0..128 {
            let b = BitSeq::new(b, 7);
            assert_eq!(mapper.map(b).unwrap(), map12(b).unwrap());
        }
    }

    #[test]
    fn m2_examples() {
        let zero = BitSeq::new(0, 11);
        assert_eq!(
            map_general(zero, 2).unwrap(),
            Vector4D::new(1.0, 5.0, 1.0, 5.0)
        );
        assert_eq!(
            demap_hard(&Vector4D::new(1.0, 5.0, 1.0, 5.0), 2).unwrap(),
            zero
        );
        assert_eq!(
            demap_hard(&Vector4D::new(1.0, 3.0, 1.0, 3.0), 1).unwrap(),
            BitSeq::new(0, 7)
        );
        assert!(map_general(BitSeq::new(0, 7), 2).is_err());
        assert!(map_general(zero, 0).is_err());
    }

    #[test]
    fn m2_outputs_are_48_qam_pairs() {
        let used = enumerate_used(2).unwrap();
        assert_eq!(used.len(), 2048);
        for v in &used {
            let c = v.coords.map(|c| c as i64);
            assert!(Point2D::new(c[0], c[1]).in_cross_qam(2));
            assert!(Point2D::new(c[2], c[3]).in_cross_qam(2));
        }
        let set: HashSet<_> = used.iter().map(|v| v.coords.map(|c| c as i64)).collect();
        assert_eq!(set.len(), 2048);
    }

    #[test]
    fn demap_rejects_non_codewords() {
        // All-inner pair is excluded from the image.
        assert!(matches!(
            demap_hard(&Vector4D::new(1.0, 1.0, -1.0, 1.0), 1),
            Err(Error::NotACodeword(_))
        ));
        assert!(demap_hard(&Vector4D::new(3.0, 3.0, 1.0, 1.0), 1).is_err());
        assert!(demap_hard(&Vector4D::new(0.5, 3.0, 1.0, 1.0), 1).is_err());
        assert!(demap_hard(&Vector4D::new(9.0, 1.0, 1.0, 3.0), 2).is_err());
        assert!(demap_hard(&Vector4D::new(2.0, 5.0, 1.0, 5.0), 2).is_err());
    }

    #[test]
    fn label_sequence_order() {
        // b_lo is the most significant bit of the cluster label.
        assert_eq!(seq_to_label(0b01, 0, 2), 0b10);
        assert_eq!(label_to_seq(0b10, 0, 2), 0b01);
        for l in 0..16 {
            assert_eq!(seq_to_label(label_to_seq(l, 3, 4), 3, 4), l);
        }
    }

    #[test]
    fn gray_m1_m2() {
        for m in 1..=2 {
            let r = verify_gray(&CrossQamMapper::new(m).unwrap().labeling());
            assert_eq!(r.min_distance, 2.0);
            assert!(r.is_gray(), "{r}");
        }
    }

    #[test]
    fn progressive_is_not_gray() {
        let used = enumerate_used(1).unwrap();
        let p = progressive_labeling(&used, 7, "12qam").unwrap();
        assert!(!verify_gray(&p).is_gray());
        let again = progressive_labeling(&used, 7, "12qam").unwrap();
        assert_eq!(p.vectors(), again.vectors());
        assert!(progressive_labeling(&used, 6, "x").is_err());

        let two = [
            Vector4D::new(1.0, 0.0, 0.0, 0.0),
            Vector4D::new(-1.0, 0.0, 0.0, 0.0),
        ];
        let p = progressive_labeling(&two, 1, "two").unwrap();
        assert_eq!(p.vector(0), two[1]);
        assert_eq!(p.vector(1), two[0]);
    }

    #[test]
    fn reliability_unbalanced_and_sums_to_one() {
        let l = CrossQamMapper::new(1).unwrap().labeling();
        let r = per_bit_reliability(&l);
        assert_eq!(r.len(), 7);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.iter().any(|&x| (x - r[0]).abs() > 1e-9));
    }

    #[test]
    fn reliability_of_balanced_labeling() {
        // 4 points on a square with a 2-bit Gray labeling: each bit flips on
        // half of the edges.
        let v = vec![
            Vector4D::new(0.0, 0.0, 0.0, 0.0),
            Vector4D::new(1.0, 0.0, 0.0, 0.0),
            Vector4D::new(0.0, 1.0, 0.0, 0.0),
            Vector4D::new(1.0, 1.0, 0.0, 0.0),
        ];
        let l = Labeling4D::new("square", 2, v).unwrap();
        assert_eq!(per_bit_reliability(&l), vec![0.5, 0.5]);
    }

    #[test]
    fn square_pair_labeling_is_gray() {
        let q = crate::constellation::build_square_qam(16).unwrap();
        let l = square_qam_labeling(&q).unwrap();
        assert_eq!(l.k(), 8);
        assert!(verify_gray(&l).is_gray());
    }

    #[test]
    fn labeling_inverse_and_csv() {
        let l = CrossQamMapper::new(1).unwrap().labeling();
        for b in 0..128 {
            let b = BitSeq::new(b, 7);
            assert_eq!(l.inverse(&l.forward(b)), Some(b));
        }
        let n = l.normalized();
        assert!((n.es2d() - 1.0).abs() < 1e-12);
        assert_eq!(n.inverse(&n.vector(77)).unwrap().value(), 77);
        let mut out = Vec::new();
        l.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().nth(1), Some("0000000,1,3,1,3"));
        assert_eq!(text.lines().count(), 129);
        assert!(Labeling4D::new("dup", 1, vec![Vector4D::default(); 2]).is_err());
    }

    #[test]
    fn bitseq_display() {
        let b = BitSeq::from_slice(&[1, 0, 0]);
        assert_eq!(b.to_string(), "001");
        assert_eq!(b.to_vec(), vec![1, 0, 0]);
    }
}
