//! Multiscale cuboid testing over all pairs of margins.
//!
//! A cuboid is a dyadic rectangle of the copula square of one `(x_j, y_k)`
//! margin pair, fixed by the first `k1` bits of `x_j` and the first `k2` bits
//! of `y_k`. Inside it, the next bit of each margin splits the points into a
//! 2×2 table that gets a Fisher exact test. The global p-value is the minimum
//! multiplicity-adjusted p-value over every enumerated cuboid.

mod weights;

pub use weights::{
    analyze_weight_favorability, count_path_statistic, cuboid_weight_vector, max_quadratic_statistic, Basis,
    FavorabilityDiagnostic, SymmetryVector, WeightMatrix,
};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binex::{rank_to_copula, BitMatrix, CopulaSample};
use crate::error::{Error, Result};
use crate::exact::{adjust_pvalues, fisher_exact_2x2, Correction, PValue, Table2x2};

/// Deepest resolution `k1 + k2` accepted by [`multifit_test`].
pub const MAX_RESOLUTION: u32 = 20;

/// A dyadic rectangle on the copula square of margin pair `(j, k)` (1-based).
///
/// Prefixes are stored as integers over their `k1` (resp. `k2`) leading bits,
/// most significant first, with bit value 1 for `A = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cuboid {
    pub margin_pair: (usize, usize),
    pub k1: u32,
    pub k2: u32,
    pub prefix_x: u32,
    pub prefix_y: u32,
}

fn code_to_signs(code: u32, len: u32) -> Vec<i8> {
    (0..len).map(|i| if code >> (len - 1 - i) & 1 == 1 { 1 } else { -1 }).collect()
}

impl Cuboid {
    /// The whole square of a margin pair.
    pub fn full(margin_pair: (usize, usize)) -> Self {
        Cuboid { margin_pair, k1: 0, k2: 0, prefix_x: 0, prefix_y: 0 }
    }

    /// Builds a cuboid from ±1 prefixes.
    pub fn from_signs(margin_pair: (usize, usize), prefix_x: &[i8], prefix_y: &[i8]) -> Self {
        let code = |s: &[i8]| s.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b > 0));
        Cuboid {
            margin_pair,
            k1: prefix_x.len() as u32,
            k2: prefix_y.len() as u32,
            prefix_x: code(prefix_x),
            prefix_y: code(prefix_y),
        }
    }

    pub fn resolution(&self) -> u32 {
        self.k1 + self.k2
    }

    pub fn prefix_x_signs(&self) -> Vec<i8> {
        code_to_signs(self.prefix_x, self.k1)
    }

    pub fn prefix_y_signs(&self) -> Vec<i8> {
        code_to_signs(self.prefix_y, self.k2)
    }

    /// Extent on each copula axis as `(lower, upper]` intervals in `(-1, 1]`.
    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let side = |code: u32, k: u32| {
            let w = 2.0 / (1u64 << k) as f64;
            (-1.0 + code as f64 * w, -1.0 + (code + 1) as f64 * w)
        };
        (side(self.prefix_x, self.k1), side(self.prefix_y, self.k2))
    }
}

/// Number of cuboids per margin pair: `Σ_{r=0}^{R} (r + 1) 2^r`.
pub fn cuboids_per_pair(r_max: u32) -> usize {
    (0..=r_max as usize).map(|r| (r + 1) << r).sum()
}

/// All cuboids, pair-major, then by resolution, `k1` ascending, then prefixes.
pub fn enumerate_cuboids(p: usize, q: usize, r_max: u32) -> Vec<Cuboid> {
    let mut out = Vec::with_capacity(p * q * cuboids_per_pair(r_max));
    for j in 1..=p {
        for k in 1..=q {
            for_each_cuboid((j, k), r_max, |c| out.push(c));
        }
    }
    out
}

fn for_each_cuboid(pair: (usize, usize), r_max: u32, mut f: impl FnMut(Cuboid)) {
    for r in 0..=r_max {
        for k1 in 0..=r {
            let k2 = r - k1;
            for prefix_x in 0..(1u32 << k1) {
                for prefix_y in 0..(1u32 << k2) {
                    f(Cuboid { margin_pair: pair, k1, k2, prefix_x, prefix_y });
                }
            }
        }
    }
}

/// Rows split on bit `k1 + 1` of x, columns on bit `k2 + 1` of y, `-1` first:
/// `a = (−,−)`, `b = (−,+)`, `c = (+,−)`, `d = (+,+)`.
pub fn cuboid_table(xc: &CopulaSample, yc: &CopulaSample, c: &Cuboid) -> Result<Table2x2> {
    if xc.n() != yc.n() {
        return Err(Error::DimensionMismatch(format!("x has {} observations, y has {}", xc.n(), yc.n())));
    }
    let xb = BitMatrix::from_copula(xc, c.k1 + 1)?;
    let yb = BitMatrix::from_copula(yc, c.k2 + 1)?;
    let mut t = Table2x2::default();
    for i in 0..xc.n() {
        if xb.prefix_code(i, c.k1) != c.prefix_x || yb.prefix_code(i, c.k2) != c.prefix_y {
            continue;
        }
        match (xb.bit(i, c.k1 + 1) > 0, yb.bit(i, c.k2 + 1) > 0) {
            (false, false) => t.a += 1,
            (false, true) => t.b += 1,
            (true, false) => t.c += 1,
            (true, true) => t.d += 1,
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exhaustive,
    Adaptive,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "adaptive" => Ok(Mode::Adaptive),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiFitConfig {
    pub r_max: u32,
    pub alpha: f64,
    pub mode: Mode,
    /// Cuboids holding fewer points are counted in the denominator but not tested.
    pub min_count: u64,
    /// Adaptive mode refines only cuboids with raw p at or below this.
    pub p_expand: f64,
    pub correction: Correction,
}

impl Default for MultiFitConfig {
    fn default() -> Self {
        MultiFitConfig {
            r_max: 4,
            alpha: 0.05,
            mode: Mode::Exhaustive,
            min_count: 16,
            p_expand: 0.1,
            correction: Correction::Bonferroni,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuboidTest {
    pub cuboid: Cuboid,
    pub table: Table2x2,
    pub p: PValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiFitReport {
    pub global_p: f64,
    pub alpha: f64,
    pub rejected: bool,
    pub mode: Mode,
    pub correction: Correction,
    pub r_max: u32,
    pub n: usize,
    pub dims: (usize, usize),
    /// `g`: every enumerated cuboid, tested or not.
    pub total_tests: usize,
    /// Cuboids actually tested, in enumeration order.
    pub tests: Vec<CuboidTest>,
    /// Index into `tests` of the smallest adjusted p-value.
    pub strongest: Option<usize>,
}

impl MultiFitReport {
    pub fn strongest(&self) -> Option<&CuboidTest> {
        self.strongest.map(|i| &self.tests[i])
    }
}

/// One observation inside a cuboid, with its copula coordinates and cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuboidPoint {
    pub index: usize,
    pub u: f64,
    pub v: f64,
    pub x_bit: i8,
    pub y_bit: i8,
}

/// Observations of `(X, Y)` that fall in `c`, for scatter views of a finding.
pub fn cuboid_points(x: &DMatrix<f64>, y: &DMatrix<f64>, c: &Cuboid) -> Result<Vec<CuboidPoint>> {
    let (j, k) = c.margin_pair;
    if j == 0 || j > x.ncols() || k == 0 || k > y.ncols() {
        return Err(Error::DimensionMismatch(format!("margin pair {:?} outside data", c.margin_pair)));
    }
    let xc = rank_to_copula(x.column(j - 1).as_slice())?;
    let yc = rank_to_copula(y.column(k - 1).as_slice())?;
    let xb = BitMatrix::from_copula(&xc, c.k1 + 1)?;
    let yb = BitMatrix::from_copula(&yc, c.k2 + 1)?;
    Ok((0..xc.n())
        .filter(|&i| xb.prefix_code(i, c.k1) == c.prefix_x && yb.prefix_code(i, c.k2) == c.prefix_y)
        .map(|i| CuboidPoint {
            index: i,
            u: xc.values()[i],
            v: yc.values()[i],
            x_bit: xb.bit(i, c.k1 + 1),
            y_bit: yb.bit(i, c.k2 + 1),
        })
        .collect())
}

fn validate(x: &DMatrix<f64>, y: &DMatrix<f64>, alpha: f64) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch(format!("X has {} rows, Y has {}", x.nrows(), y.nrows())));
    }
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::DimensionMismatch("X and Y need at least one column".into()));
    }
    if x.nrows() < 8 {
        return Err(Error::InsufficientSample { required: 8, got: x.nrows() });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Leading `depth` bits of every observation of every column.
pub(crate) fn column_codes(m: &DMatrix<f64>, depth: u32) -> Result<Vec<Vec<u32>>> {
    m.column_iter()
        .map(|col| {
            let c = rank_to_copula(col.as_slice())?;
            let bits = BitMatrix::from_copula(&c, depth)?;
            Ok((0..c.n()).map(|i| bits.prefix_code(i, depth)).collect())
        })
        .collect()
}

/// Tables of every cuboid at depth pair `(k1, k2)`, indexed `px · 2^{k2} + py`.
fn depth_tables(xcodes: &[u32], ycodes: &[u32], depth: u32, k1: u32, k2: u32) -> Vec<Table2x2> {
    let mut counts = vec![[0u64; 4]; 1usize << (k1 + k2)];
    for (&xc, &yc) in xcodes.iter().zip(ycodes) {
        let xs = xc >> (depth - k1 - 1);
        let ys = yc >> (depth - k2 - 1);
        let cell = (((xs >> 1) << k2) | (ys >> 1)) as usize;
        counts[cell][((xs & 1) << 1 | (ys & 1)) as usize] += 1;
    }
    counts.into_iter().map(|[a, b, c, d]| Table2x2 { a, b, c, d }).collect()
}

fn test_pair(pair: (usize, usize), xcodes: &[u32], ycodes: &[u32], cfg: &MultiFitConfig) -> Vec<CuboidTest> {
    let depth = cfg.r_max + 1;
    let mut out = Vec::new();
    // raw p-values of the previous resolution, per k1, for adaptive refinement
    let mut previous: Vec<Vec<Option<f64>>> = Vec::new();
    for r in 0..=cfg.r_max {
        let mut current = Vec::with_capacity(r as usize + 1);
        for k1 in 0..=r {
            let k2 = r - k1;
            let tables = depth_tables(xcodes, ycodes, depth, k1, k2);
            let mut level_p = vec![None; tables.len()];
            for (cell, table) in tables.into_iter().enumerate() {
                let prefix_x = (cell >> k2) as u32;
                let prefix_y = (cell & ((1 << k2) - 1)) as u32;
                let selected = match cfg.mode {
                    Mode::Exhaustive => true,
                    Mode::Adaptive if r == 0 => true,
                    Mode::Adaptive => {
                        let expands = |p: Option<f64>| p.is_some_and(|p| p <= cfg.p_expand);
                        let from_x =
                            k1 > 0 && expands(previous[(k1 - 1) as usize][((prefix_x >> 1) << k2 | prefix_y) as usize]);
                        let from_y =
                            k2 > 0 && expands(previous[k1 as usize][(prefix_x << (k2 - 1) | prefix_y >> 1) as usize]);
                        from_x || from_y
                    }
                };
                if !selected || table.total() < cfg.min_count {
                    continue;
                }
                let p = fisher_exact_2x2(table);
                level_p[cell] = Some(p.value);
                out.push(CuboidTest { cuboid: Cuboid { margin_pair: pair, k1, k2, prefix_x, prefix_y }, table, p });
            }
            current.push(level_p);
        }
        previous = current;
    }
    out
}

/// Runs the multiscale test of independence between the columns of `x` and `y`.
pub fn multifit_test(x: &DMatrix<f64>, y: &DMatrix<f64>, cfg: &MultiFitConfig) -> Result<MultiFitReport> {
    validate(x, y, cfg.alpha)?;
    if cfg.r_max > MAX_RESOLUTION {
        return Err(Error::InvalidParameter(format!("r_max must be at most {MAX_RESOLUTION}")));
    }
    let depth = cfg.r_max + 1;
    let xcodes = column_codes(x, depth)?;
    let ycodes = column_codes(y, depth)?;
    let (p, q) = (x.ncols(), y.ncols());
    let pairs: Vec<(usize, usize)> = (1..=p).flat_map(|j| (1..=q).map(move |k| (j, k))).collect();
    let tests: Vec<CuboidTest> = pairs
        .par_iter()
        .map(|&(j, k)| test_pair((j, k), &xcodes[j - 1], &ycodes[k - 1], cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let total_tests = p * q * cuboids_per_pair(cfg.r_max);
    let raw: Vec<PValue> = tests.iter().map(|t| t.p).collect();
    let adjusted = adjust_pvalues(&raw, cfg.correction, total_tests)?;
    let tests: Vec<CuboidTest> = tests.into_iter().zip(adjusted).map(|(t, p)| CuboidTest { p, ..t }).collect();

    let mut strongest: Option<usize> = None;
    for (i, t) in tests.iter().enumerate() {
        if strongest.is_none_or(|s| t.p.effective() < tests[s].p.effective()) {
            strongest = Some(i);
        }
    }
    let global_p = strongest.map_or(1.0, |s| tests[s].p.effective().min(1.0));
    Ok(MultiFitReport {
        global_p,
        alpha: cfg.alpha,
        rejected: global_p <= cfg.alpha,
        mode: cfg.mode,
        correction: cfg.correction,
        r_max: cfg.r_max,
        n: x.nrows(),
        dims: (p, q),
        total_tests,
        tests,
        strongest,
    })
}
