//! Binary expansion of copula-transformed margins.
//!
//! Each margin is rank-transformed onto `(-1, 1]` and expanded into ±1 bits
//! `A_d`, so that `u ≈ Σ_d A_d / 2^d`. Products of bits across the two
//! margins are the interactions `A_Λ`; their sample means are the symmetry
//! statistics. Bits are stored column-wise as packed "negative" flags, which
//! turns every interaction into an XOR of columns and every sum into a
//! popcount.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest supported expansion (masks are `u32`).
pub const MAX_DEPTH: u32 = 32;

/// Rank-transformed values of one margin.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaSample {
    ranks: Vec<u64>,
    values: Vec<f64>,
}

impl CopulaSample {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Ranks in `1..=n`.
    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }
}

/// Empirical copula transform: `u_i = 2 r_i / (n + 1) - 1`.
///
/// Ties are broken by first occurrence, so the ranks are always a
/// permutation of `1..=n`.
pub fn rank_to_copula(raw: &[f64]) -> Result<CopulaSample> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::InsufficientSample { required: 2, got: n });
    }
    if let Some(index) = raw.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort: equal values keep their input order
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let mut ranks = vec![0u64; n];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos as u64 + 1;
    }
    let denom = (n + 1) as f64;
    let values = ranks.iter().map(|&r| 2.0 * r as f64 / denom - 1.0).collect();
    Ok(CopulaSample { ranks, values })
}

/// First `depth` bits of `u ∈ (-1, 1]`, left-open convention.
///
/// Dyadic rationals expand with trailing `+1`s, e.g. `u = 0` gives
/// `[-1, +1, +1, ...]`.
pub fn binary_bits(u: f64, depth: u32) -> Result<Vec<i8>> {
    check_depth(depth)?;
    if !(u > -1.0 && u <= 1.0) {
        return Err(Error::CopulaOutOfRange(u));
    }
    let mut c = (u + 1.0) * 0.5;
    let mut bits = Vec::with_capacity(depth as usize);
    for _ in 0..depth {
        let b = c > 0.5;
        c = 2.0 * c - if b { 1.0 } else { 0.0 };
        bits.push(if b { 1 } else { -1 });
    }
    Ok(bits)
}

/// Bits of the rational `num / den ∈ (0, 1]` in exact integer arithmetic.
fn rational_bits(num: u64, den: u64, depth: u32) -> impl Iterator<Item = bool> {
    let mut c = num as u128;
    let den = den as u128;
    (0..depth).map(move |_| {
        let b = 2 * c > den;
        c = 2 * c - if b { den } else { 0 };
        b
    })
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        Err(Error::InvalidDepth(depth))
    } else {
        Ok(())
    }
}

/// `n × depth` matrix of ±1 bits, one column per depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    depth: u32,
    /// `neg[d][w]` bit `i % 64` of word `i / 64` is set when `A_{d+1,i} = -1`.
    neg: Vec<Vec<u64>>,
}

impl BitMatrix {
    fn empty(n: usize, depth: u32) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, depth, neg: vec![vec![0u64; words]; depth as usize] }
    }

    fn set_negative(&mut self, i: usize, d: usize) {
        self.neg[d][i / 64] |= 1u64 << (i % 64);
    }

    /// Expands a rank-transformed margin. Uses the integer ranks, so bits are
    /// exact even where `r / (n + 1)` is a dyadic rational.
    pub fn from_copula(sample: &CopulaSample, depth: u32) -> Result<Self> {
        check_depth(depth)?;
        let den = sample.n() as u64 + 1;
        let mut m = Self::empty(sample.n(), depth);
        for (i, &r) in sample.ranks.iter().enumerate() {
            for (d, b) in rational_bits(r, den, depth).enumerate() {
                if !b {
                    m.set_negative(i, d);
                }
            }
        }
        Ok(m)
    }

    /// Expands arbitrary values in `(-1, 1]`.
    pub fn from_values(values: &[f64], depth: u32) -> Result<Self> {
        check_depth(depth)?;
        let mut m = Self::empty(values.len(), depth);
        for (i, &u) in values.iter().enumerate() {
            for (d, b) in binary_bits(u, depth)?.into_iter().enumerate() {
                if b < 0 {
                    m.set_negative(i, d);
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Bit `A_d` of observation `i`, `d` counted from 1.
    pub fn bit(&self, i: usize, d: u32) -> i8 {
        let d = d as usize - 1;
        if self.neg[d][i / 64] >> (i % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn row(&self, i: usize) -> Vec<i8> {
        (1..=self.depth).map(|d| self.bit(i, d)).collect()
    }

    /// Sum of column `d` over all observations.
    pub fn column_sum(&self, d: u32) -> i64 {
        let negatives: u32 = self.neg[d as usize - 1].iter().map(|w| w.count_ones()).sum();
        self.n as i64 - 2 * negatives as i64
    }

    /// Leading `k` bits of observation `i` as an integer, most significant
    /// first, with `+1 ↦ 1` and `-1 ↦ 0`.
    pub fn prefix_code(&self, i: usize, k: u32) -> u32 {
        (1..=k).fold(0u32, |acc, d| (acc << 1) | u32::from(self.bit(i, d) > 0))
    }

    /// Packed negative flags of `Π_{d ∈ mask} A_d` for every mask in
    /// `0..2^depth`.
    pub(crate) fn mask_products(&self, depth: u32) -> Vec<Vec<u64>> {
        let words = self.n.div_ceil(64);
        let size = 1usize << depth;
        let mut out = vec![vec![0u64; words]; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let (done, todo) = out.split_at_mut(mask);
            for (w, slot) in todo[0].iter_mut().enumerate() {
                *slot = done[rest][w] ^ self.neg[low][w];
            }
        }
        out
    }

    /// Debug CSV: one row per observation, one `-1`/`1` column per depth.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.depth).map(|d| format!("d{d}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|b| b.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Interaction index `Λ`: which bits of each margin enter the product.
/// Bit `d - 1` of a mask selects depth `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LambdaIndex {
    pub x_mask: u32,
    pub y_mask: u32,
}

impl LambdaIndex {
    pub const CONSTANT: LambdaIndex = LambdaIndex { x_mask: 0, y_mask: 0 };

    pub fn new(x_mask: u32, y_mask: u32) -> Self {
        LambdaIndex { x_mask, y_mask }
    }

    /// Builds an index from 1-based depth lists.
    pub fn from_depths(x: &[u32], y: &[u32]) -> Self {
        let fold = |ds: &[u32]| ds.iter().fold(0u32, |m, &d| m | 1 << (d - 1));
        LambdaIndex { x_mask: fold(x), y_mask: fold(y) }
    }

    pub fn is_constant(&self) -> bool {
        self.x_mask == 0 && self.y_mask == 0
    }

    pub fn is_cross(&self) -> bool {
        self.x_mask != 0 && self.y_mask != 0
    }

    /// Deepest bit used on each side.
    pub fn depths_needed(&self) -> (u32, u32) {
        (32 - self.x_mask.leading_zeros(), 32 - self.y_mask.leading_zeros())
    }

    /// Mask as a string of `0`/`1`, depth 1 first, `depth` characters.
    pub fn mask_string(mask: u32, depth: u32) -> String {
        (0..depth).map(|d| if mask >> d & 1 == 1 { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for LambdaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list =
            |m: u32| (0..32).filter(|d| m >> d & 1 == 1).map(|d| (d + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(f, "x{{{}}}y{{{}}}", list(self.x_mask), list(self.y_mask))
    }
}

/// `A_Λ` for one observation given its bit rows.
pub fn interaction_value(x_bits: &[i8], y_bits: &[i8], lambda: LambdaIndex) -> Result<i8> {
    let (dx, dy) = lambda.depths_needed();
    if dx as usize > x_bits.len() {
        return Err(Error::DepthOverflow { needed: dx, available: x_bits.len() as u32 });
    }
    if dy as usize > y_bits.len() {
        return Err(Error::DepthOverflow { needed: dy, available: y_bits.len() as u32 });
    }
    let pick = |bits: &[i8], mask: u32| {
        bits.iter().enumerate().filter(|(d, _)| mask >> d & 1 == 1).map(|(_, &b)| b).product::<i8>()
    };
    Ok(pick(x_bits, lambda.x_mask) * pick(y_bits, lambda.y_mask))
}

/// Symmetry statistic `S̄_Λ = S_Λ / n` with `S_Λ = Σ_i A_{Λ,i}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryStat {
    pub lambda: LambdaIndex,
    pub s_sum: i64,
    pub s_bar: f64,
    pub n: usize,
}

impl SymmetryStat {
    pub fn new(lambda: LambdaIndex, s_sum: i64, n: usize) -> Self {
        SymmetryStat { lambda, s_sum, s_bar: s_sum as f64 / n as f64, n }
    }
}

fn check_pair(x: &BitMatrix, y: &BitMatrix, lambda: LambdaIndex) -> Result<()> {
    if x.n != y.n {
        return Err(Error::DimensionMismatch(format!("x has {} observations, y has {}", x.n, y.n)));
    }
    let (dx, dy) = lambda.depths_needed();
    if dx > x.depth {
        return Err(Error::DepthOverflow { needed: dx, available: x.depth });
    }
    if dy > y.depth {
        return Err(Error::DepthOverflow { needed: dy, available: y.depth });
    }
    Ok(())
}

pub fn symmetry_statistic(x: &BitMatrix, y: &BitMatrix, lambda: LambdaIndex) -> Result<SymmetryStat> {
    check_pair(x, y, lambda)?;
    let words = x.n.div_ceil(64);
    let mut negatives = 0u64;
    for w in 0..words {
        let mut acc = 0u64;
        for d in 0..x.depth as usize {
            if lambda.x_mask >> d & 1 == 1 {
                acc ^= x.neg[d][w];
            }
        }
        for d in 0..y.depth as usize {
            if lambda.y_mask >> d & 1 == 1 {
                acc ^= y.neg[d][w];
            }
        }
        negatives += acc.count_ones() as u64;
    }
    Ok(SymmetryStat::new(lambda, x.n as i64 - 2 * negatives as i64, x.n))
}

/// Every `Λ` with nonzero masks on both sides, `x_mask`-major ascending.
pub fn all_cross_interactions(d1: u32, d2: u32) -> Vec<LambdaIndex> {
    let mut out = Vec::with_capacity(((1usize << d1) - 1) * ((1usize << d2) - 1));
    for xm in 1..(1u32 << d1) {
        for ym in 1..(1u32 << d2) {
            out.push(LambdaIndex::new(xm, ym));
        }
    }
    out
}

/// Unnormalized sums `S_Λ` for every `Λ` over depths `d1 × d2`, including
/// `Λ = 0`, indexed by `x_mask · 2^{d2} + y_mask`.
pub fn symmetry_sums(x: &BitMatrix, y: &BitMatrix, d1: u32, d2: u32) -> Result<Vec<i64>> {
    check_depth(d1)?;
    check_depth(d2)?;
    let probe = LambdaIndex::new(1 << (d1 - 1), 1 << (d2 - 1));
    check_pair(x, y, probe)?;
    let xp = x.mask_products(d1);
    let yp = y.mask_products(d2);
    let n = x.n as i64;
    let mut out = Vec::with_capacity(xp.len() * yp.len());
    for xc in &xp {
        for yc in &yp {
            let negatives: u32 = xc.iter().zip(yc).map(|(a, b)| (a ^ b).count_ones()).sum();
            out.push(n - 2 * negatives as i64);
        }
    }
    Ok(out)
}
