//! Regular LDPC codes: seeded (3,6) construction without 4-cycles, a
//! systematic encoder obtained by GF(2) elimination, and a flooding
//! sum-product decoder.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Codeword length of the default code.
pub const DEFAULT_N: usize = 2394;
/// Seed of the published default code.
pub const DEFAULT_SEED: u64 = 2394;
/// LLR magnitude clip used by the decoder.
pub const LLR_CLIP: f64 = 30.0;

/// A sparse binary parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds the matrix from per-row column indices.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &c in row {
                if c >= n {
                    return invalid(format!("column {c} out of range in row {r}"));
                }
                if cols[c].last() == Some(&r) {
                    return invalid(format!("duplicate entry ({r}, {c})"));
                }
                cols[c].push(r);
            }
        }
        let mut rows = rows;
        for row in rows.iter_mut() {
            row.sort_unstable();
        }
        Ok(ParityCheckMatrix { n, rows, cols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Number of row pairs that share two or more columns.
    pub fn four_cycles(&self) -> usize {
        let mut shared = vec![0u32; self.rows.len()];
        let mut count = 0;
        for (r, row) in self.rows.iter().enumerate() {
            let mut touched = Vec::new();
            for &c in row {
                for &r2 in &self.cols[c] {
                    if r2 > r {
                        if shared[r2] == 0 {
                            touched.push(r2);
                        }
                        shared[r2] += 1;
                    }
                }
            }
            for r2 in touched {
                if shared[r2] >= 2 {
                    count += 1;
                }
                shared[r2] = 0;
            }
        }
        count
    }

    /// `H · bits` over GF(2), one entry per row.
    pub fn syndrome(&self, bits: &[u8]) -> Vec<u8> {
        assert_eq!(bits.len(), self.n);
        self.rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)) == 0)
    }

    /// GF(2) rank.
    pub fn rank(&self) -> usize {
        Elimination::run(self).pivots.len()
    }

    /// Writes the matrix in alist format.
    pub fn write_alist<W: Write>(&self, mut w: W) -> Result<()> {
        let col_w = self.column_weights();
        let row_w = self.row_weights();
        let join = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(w, "{} {}", self.n, self.rows.len())?;
        writeln!(
            w,
            "{} {}",
            col_w.iter().max().unwrap_or(&0),
            row_w.iter().max().unwrap_or(&0)
        )?;
        writeln!(w, "{}", join(&col_w))?;
        writeln!(w, "{}", join(&row_w))?;
        for col in &self.cols {
            let one_based: Vec<_> = col.iter().map(|r| r + 1).collect();
            writeln!(w, "{}", join(&one_based))?;
        }
        for row in &self.rows {
            let one_based: Vec<_> = row.iter().map(|c| c + 1).collect();
            writeln!(w, "{}", join(&one_based))?;
        }
        Ok(())
    }
}

/// Builds the default rate-1/2 (3,6)-regular code of length 2394.
pub fn build_h(seed: u64) -> Result<ParityCheckMatrix> {
    build_regular(DEFAULT_N, 3, 6, seed)
}

/// Seeded `(col_weight, row_weight)`-regular construction. Sockets are
/// matched by a random permutation, then every edge on a double edge or a
/// 4-cycle is swapped with a random partner edge until none remain.
pub fn build_regular(
    n: usize,
    col_weight: usize,
    row_weight: usize,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    if col_weight == 0 || row_weight == 0 || !(n * col_weight).is_multiple_of(row_weight) {
        return invalid(format!(
            "no ({col_weight}, {row_weight})-regular matrix with {n} columns"
        ));
    }
    let m = n * col_weight / row_weight;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sockets: Vec<usize> = (0..n * col_weight).map(|e| e / col_weight).collect();
    sockets.shuffle(&mut rng);
    // Edge e connects row e / row_weight to column sockets[e].
    let mut g = Graph::new(n, m, row_weight, sockets);

    const MAX_ROUNDS: usize = 200;
    for _ in 0..MAX_ROUNDS {
        let bad = g.bad_edges();
        if bad.is_empty() {
            let rows = (0..m).map(|r| g.row_cols(r).to_vec()).collect();
            return ParityCheckMatrix::from_rows(n, rows);
        }
        for e in bad {
            if !g.edge_is_bad(e) {
                continue;
            }
            for _ in 0..50 {
                let f = rng.gen_range(0..g.edge_col.len());
                if g.edge_row(f) == g.edge_row(e) {
                    continue;
                }
                let (re, rf) = (g.edge_row(e), g.edge_row(f));
                let before = g.row_conflicts(re) + g.row_conflicts(rf);
                g.swap(e, f);
                if g.row_conflicts(re) + g.row_conflicts(rf) < before {
                    break;
                }
                g.swap(e, f);
            }
        }
    }
    Err(Error::ConstructionFailed(format!(
        "4-cycles remain after {MAX_ROUNDS} rounds (seed {seed})"
    )))
}

/// Edge list view used during construction.
struct Graph {
    row_weight: usize,
    edge_col: Vec<usize>,
    col_edges: Vec<Vec<usize>>,
    scratch: Vec<u32>,
}

impl Graph {
    fn new(n: usize, m: usize, row_weight: usize, edge_col: Vec<usize>) -> Self {
        let mut col_edges = vec![Vec::new(); n];
        for (e, &c) in edge_col.iter().enumerate() {
            col_edges[c].push(e);
        }
        Graph {
            row_weight,
            edge_col,
            col_edges,
            scratch: vec![0; m],
        }
    }

    fn edge_row(&self, e: usize) -> usize {
        e / self.row_weight
    }

    fn row_cols(&self, r: usize) -> &[usize] {
        &self.edge_col[r * self.row_weight..(r + 1) * self.row_weight]
    }

    fn swap(&mut self, e: usize, f: usize) {
        let (ce, cf) = (self.edge_col[e], self.edge_col[f]);
        let pos = self.col_edges[ce].iter().position(|&x| x == e).unwrap();
        self.col_edges[ce][pos] = f;
        let pos = self.col_edges[cf].iter().position(|&x| x == f).unwrap();
        self.col_edges[cf][pos] = e;
        self.edge_col.swap(e, f);
    }

    /// Repeated columns in the row plus rows sharing two or more columns
    /// with it.
    fn row_conflicts(&mut self, r: usize) -> usize {
        let cols = self.row_cols(r).to_vec();
        let mut conflicts = 0;
        let mut touched = Vec::new();
        for (i, &c) in cols.iter().enumerate() {
            if cols[..i].contains(&c) {
                conflicts += 1;
            }
            for &e in &self.col_edges[c] {
                let r2 = e / self.row_weight;
                if r2 != r {
                    self.scratch[r2] += 1;
                    touched.push(r2);
                }
            }
        }
        for r2 in touched {
            if self.scratch[r2] >= 2 {
                conflicts += 1;
            }
            self.scratch[r2] = 0;
        }
        conflicts
    }

    fn edge_is_bad(&mut self, e: usize) -> bool {
        let r = self.edge_row(e);
        let c = self.edge_col[e];
        let row = self.row_cols(r).to_vec();
        if row.iter().filter(|&&x| x == c).count() > 1 {
            return true;
        }
        // Another row shares c and at least one more column of r.
        self.col_edges[c].iter().any(|&f| {
            let r2 = f / self.row_weight;
            r2 != r
                && self
                    .row_cols(r2)
                    .iter()
                    .filter(|&&x| x != c)
                    .any(|x| row.contains(x))
        })
    }

    fn bad_edges(&mut self) -> Vec<usize> {
        (0..self.edge_col.len())
            .filter(|&e| self.edge_is_bad(e))
            .collect()
    }
}

/// Row-reduced echelon form of `H` over GF(2), bit-packed.
struct Elimination {
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Elimination {
    fn run(h: &ParityCheckMatrix) -> Self {
        let words = h.n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = h
            .rows
            .iter()
            .map(|row| {
                let mut w = vec![0u64; words];
                for &c in row {
                    w[c / 64] ^= 1 << (c % 64);
                }
                w
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..h.n {
            let (wi, bit) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][wi] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[wi] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows.truncate(rank);
        Elimination { rows, pivots }
    }
}

/// Systematic encoder. Information bits occupy the non-pivot columns of the
/// reduced `H`; each pivot column is the parity of the information bits its
/// reduced row touches.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// For each parity bit, a mask over information-bit indices.
    parity_masks: Vec<Vec<u64>>,
}

impl Encoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let elim = Elimination::run(h);
        let mut is_pivot = vec![false; h.n];
        for &p in &elim.pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..h.n).filter(|&c| !is_pivot[c]).collect();
        let k = info_positions.len();
        let words = k.div_ceil(64);
        let parity_masks = elim
            .rows
            .iter()
            .map(|row| {
                let mut mask = vec![0u64; words];
                for (i, &c) in info_positions.iter().enumerate() {
                    if row[c / 64] >> (c % 64) & 1 == 1 {
                        mask[i / 64] |= 1 << (i % 64);
                    }
                }
                mask
            })
            .collect();
        Encoder {
            n: h.n,
            info_positions,
            parity_positions: elim.pivots,
            parity_masks,
        }
    }

    /// Number of information bits, `n - rank(H)`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Codeword positions that carry the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return invalid(format!(
                "encoder takes {} information bits, got {}",
                self.k(),
                info.len()
            ));
        }
        let mut packed = vec![0u64; self.k().div_ceil(64)];
        for (i, &b) in info.iter().enumerate() {
            packed[i / 64] |= u64::from(b & 1) << (i % 64);
        }
        let mut cw = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            cw[pos] = b & 1;
        }
        for (&pos, mask) in self.parity_positions.iter().zip(&self.parity_masks) {
            let ones: u32 = mask
                .iter()
                .zip(&packed)
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            cw[pos] = (ones & 1) as u8;
        }
        Ok(cw)
    }

    /// Extracts the information bits from a codeword.
    pub fn info_bits(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

/// Result of one decoding attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Flooding sum-product decoder with tanh-rule check updates.
#[derive(Debug, Clone)]
pub struct BpDecoder<'a> {
    h: &'a ParityCheckMatrix,
    /// Edge indices of each column, edges numbered in row order.
    col_edges: Vec<Vec<usize>>,
    row_start: Vec<usize>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(h: &'a ParityCheckMatrix) -> Self {
        let mut row_start = Vec::with_capacity(h.num_rows() + 1);
        let mut col_edges = vec![Vec::new(); h.n];
        let mut e = 0;
        for row in &h.rows {
            row_start.push(e);
            for &c in row {
                col_edges[c].push(e);
                e += 1;
            }
        }
        row_start.push(e);
        BpDecoder {
            h,
            col_edges,
            row_start,
        }
    }

    /// Decodes channel LLRs (positive favors 0). Stops as soon as the hard
    /// decisions satisfy every check.
    pub fn decode(&self, llrs: &[f64], max_iter: usize) -> DecodeOutput {
        let h = self.h;
        assert_eq!(llrs.len(), h.n);
        assert!(max_iter >= 1);
        let ch: Vec<f64> = llrs.iter().map(|l| l.clamp(-LLR_CLIP, LLR_CLIP)).collect();
        let edges = h.num_edges();
        let mut edge_col = vec![0usize; edges];
        for (c, es) in self.col_edges.iter().enumerate() {
            for &e in es {
                edge_col[e] = c;
            }
        }
        // Variable-to-check messages start at the channel LLRs.
        let mut v2c: Vec<f64> = edge_col.iter().map(|&c| ch[c]).collect();
        let mut c2v = vec![0.0f64; edges];
        let mut bits = vec![0u8; h.n];
        let mut t = Vec::new();
        for iter in 1..=max_iter {
            for r in 0..h.num_rows() {
                let (lo, hi) = (self.row_start[r], self.row_start[r + 1]);
                t.clear();
                t.extend(v2c[lo..hi].iter().map(|x| (x / 2.0).tanh()));
                // Products excluding each position, via prefix/suffix.
                let deg = hi - lo;
                let mut prefix = 1.0;
                for i in 0..deg {
                    c2v[lo + i] = prefix;
                    prefix *= t[i];
                }
                let mut suffix = 1.0;
                for i in (0..deg).rev() {
                    let p = (c2v[lo + i] * suffix).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                    c2v[lo + i] = (2.0 * p.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
                    suffix *= t[i];
                }
            }
            for (c, es) in self.col_edges.iter().enumerate() {
                let total: f64 = ch[c] + es.iter().map(|&e| c2v[e]).sum::<f64>();
                bits[c] = u8::from(total < 0.0);
                for &e in es {
                    v2c[e] = (total - c2v[e]).clamp(-LLR_CLIP, LLR_CLIP);
                }
            }
            if h.is_codeword(&bits) {
                return DecodeOutput {
                    bits,
                    converged: true,
                    iterations: iter,
                };
            }
        }
        DecodeOutput {
            bits,
            converged: false,
            iterations: max_iter,
        }
    }
}

/// One-shot decode with a fresh decoder.
pub fn decode_bp(llrs: &[f64], h: &ParityCheckMatrix, max_iter: usize) -> DecodeOutput {
    BpDecoder::new(h).decode(llrs, max_iter)
}
