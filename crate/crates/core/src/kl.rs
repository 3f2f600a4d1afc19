//! Karhunen-Loève projection of discretized curves.
//!
//! Curves observed on a grid of `[0, 1]` are treated as elements of `L₂[0, 1]`
//! with a quadrature inner product `⟨f, g⟩_w = Σ_j w_j f(t_j) g(t_j)`. A fit
//! estimates the mean `ν`, the singular values `λ_j` (square roots of the
//! covariance eigenvalues) and eigenfunctions `φ_j`, so that
//! `X ≈ ν + Σ_j Z_j λ_j φ_j` with standardized scores `Z_j`. The scores are
//! an ordinary `n × k` sample that any of the finite-dimensional tests accept.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::TestReport;
use crate::sim::TestMethod;

/// Covariance eigenvalues below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Curves `X_i(t_j)` on a common grid with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    pub grid: Vec<f64>,
    /// `n × m`, one curve per row.
    pub values: DMatrix<f64>,
    pub weights: Vec<f64>,
}

/// Trapezoid weights on an increasing grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let m = grid.len();
    (0..m)
        .map(|j| {
            let left = if j > 0 { grid[j] - grid[j - 1] } else { 0.0 };
            let right = if j + 1 < m { grid[j + 1] - grid[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

impl CurveSet {
    /// Curves with trapezoid weights.
    pub fn new(grid: Vec<f64>, values: DMatrix<f64>) -> Result<Self> {
        let weights = trapezoid_weights(&grid);
        Self::with_weights(grid, values, weights)
    }

    pub fn with_weights(grid: Vec<f64>, values: DMatrix<f64>, weights: Vec<f64>) -> Result<Self> {
        let m = grid.len();
        if m < 2 {
            return Err(Error::GridMismatch("grid needs at least two points".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 || grid[m - 1] > 1.0 {
            return Err(Error::GridMismatch("grid must be strictly increasing within [0, 1]".into()));
        }
        if weights.len() != m || weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
            return Err(Error::GridMismatch("need one positive quadrature weight per grid point".into()));
        }
        if values.ncols() != m {
            return Err(Error::GridMismatch(format!("curves have {} values, grid has {m} points", values.ncols())));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(CurveSet { grid, values, weights })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.grid.len()
    }

    /// `⟨f, g⟩_w`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    fn same_grid(&self, grid: &[f64]) -> Result<()> {
        if self.grid.len() != grid.len() || self.grid.iter().zip(grid).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::GridMismatch("curves and model use different grids".into()));
        }
        Ok(())
    }
}

/// Mean, singular values and eigenfunctions of a set of curves, truncated
/// at `k` components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlModel {
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub mean: Vec<f64>,
    /// `λ_1 ≥ … ≥ λ_k > 0`.
    pub lambdas: Vec<f64>,
    /// `m × k`, column `j` is `φ_j` on the grid.
    #[serde(skip)]
    pub eigenfunctions: DMatrix<f64>,
    /// Total weighted variance `Σ_all λ²`.
    pub total_variance: f64,
    /// Numerical rank of the centred curves.
    pub rank: usize,
}

impl KlModel {
    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    /// Fraction of the total weighted variance kept by the first `k` components.
    pub fn energy_fraction(&self) -> f64 {
        self.lambdas.iter().map(|l| l * l).sum::<f64>() / self.total_variance
    }

    pub fn eigenfunction(&self, j: usize) -> Vec<f64> {
        self.eigenfunctions.column(j).iter().copied().collect()
    }
}

struct Spectrum {
    mean: Vec<f64>,
    sigmas: Vec<f64>,
    /// `m × r` eigenfunctions for every retained singular value.
    phis: DMatrix<f64>,
    total_variance: f64,
}

fn spectrum(cs: &CurveSet) -> Result<Spectrum> {
    let (n, m) = (cs.n(), cs.m());
    let mean: Vec<f64> = (0..m).map(|j| cs.values.column(j).sum() / n as f64).collect();
    let root_w: Vec<f64> = cs.weights.iter().map(|w| w.sqrt()).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let a = DMatrix::from_fn(n, m, |i, j| (cs.values[(i, j)] - mean[j]) * root_w[j] * scale);
    let total_variance = a.norm_squared();

    // eigenvectors of the smaller Gram matrix
    let wide = n < m;
    let gram = if wide { &a * a.transpose() } else { a.transpose() * &a };
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let magnitude = cs.values.amax().max(1.0);
    let top = order.first().map_or(0.0, |&i| eig.eigenvalues[i]).max(0.0);
    if top.sqrt() <= 1e-12 * magnitude {
        return Err(Error::ZeroVariance);
    }
    let kept: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > RANK_TOLERANCE * top).collect();
    let sigmas: Vec<f64> = kept.iter().map(|&i| eig.eigenvalues[i].sqrt()).collect();
    let mut phis = DMatrix::zeros(m, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        let psi: Vec<f64> = if wide {
            let u = eig.eigenvectors.column(i);
            (0..m).map(|j| a.column(j).dot(&u) / sigmas[c]).collect()
        } else {
            eig.eigenvectors.column(i).iter().copied().collect()
        };
        for j in 0..m {
            phis[(j, c)] = psi[j] / root_w[j];
        }
        // largest-magnitude entry positive
        let (arg, _) =
            phis.column(c).iter().enumerate().fold(
                (0, 0.0f64),
                |best, (j, v)| {
                    if v.abs() > best.1 {
                        (j, v.abs())
                    } else {
                        best
                    }
                },
            );
        if phis[(arg, c)] < 0.0 {
            phis.column_mut(c).neg_mut();
        }
    }
    Ok(Spectrum { mean, sigmas, phis, total_variance })
}

/// Fits a `k`-term expansion. Fails when `k` exceeds the numerical rank.
pub fn kl_fit(cs: &CurveSet, k: usize) -> Result<KlModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("truncation k must be at least 1".into()));
    }
    if cs.n() < k + 1 {
        return Err(Error::InsufficientSample { required: k + 1, got: cs.n() });
    }
    let sp = spectrum(cs)?;
    let rank = sp.sigmas.len();
    if k > rank {
        return Err(Error::RankDeficient { requested: k, attainable: rank });
    }
    Ok(KlModel {
        grid: cs.grid.clone(),
        weights: cs.weights.clone(),
        mean: sp.mean,
        lambdas: sp.sigmas[..k].to_vec(),
        eigenfunctions: sp.phis.columns(0, k).into_owned(),
        total_variance: sp.total_variance,
        rank,
    })
}

/// Smallest `k` whose components carry at least `tau` of the total variance.
pub fn smallest_k_for_energy(cs: &CurveSet, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("energy fraction must lie in (0, 1], got {tau}")));
    }
    let sp = spectrum(cs)?;
    let mut acc = 0.0;
    for (j, s) in sp.sigmas.iter().enumerate() {
        acc += s * s;
        if acc >= tau * sp.total_variance * (1.0 - 1e-12) {
            return Ok((j + 1).min(cs.n().saturating_sub(1)).max(1));
        }
    }
    Ok(sp.sigmas.len().min(cs.n().saturating_sub(1)).max(1))
}

/// Fit with `k` chosen by [`smallest_k_for_energy`].
pub fn kl_fit_energy(cs: &CurveSet, tau: f64) -> Result<KlModel> {
    kl_fit(cs, smallest_k_for_energy(cs, tau)?)
}

/// Standardized scores, `n × k`, columns `Z1..Zk`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub scores: DMatrix<f64>,
}

impl ScoreMatrix {
    pub fn k(&self) -> usize {
        self.scores.ncols()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.k()).map(|j| format!("Z{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.scores.nrows() {
            let row: Vec<String> = self.scores.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `Z_ij = ⟨X_i − ν, φ_j⟩_w / λ_j`.
pub fn kl_scores(cs: &CurveSet, model: &KlModel) -> Result<ScoreMatrix> {
    cs.same_grid(&model.grid)?;
    let (n, m, k) = (cs.n(), cs.m(), model.k());
    let scores = DMatrix::from_fn(n, k, |i, j| {
        (0..m)
            .map(|t| model.weights[t] * (cs.values[(i, t)] - model.mean[t]) * model.eigenfunctions[(t, j)])
            .sum::<f64>()
            / model.lambdas[j]
    });
    Ok(ScoreMatrix { scores })
}

/// `X_k = ν + Σ_j Z_j λ_j φ_j`.
pub fn kl_reconstruct(model: &KlModel, scores: &ScoreMatrix) -> Result<CurveSet> {
    if scores.k() != model.k() {
        return Err(Error::DimensionMismatch(format!(
            "scores have {} columns, model has k = {}",
            scores.k(),
            model.k()
        )));
    }
    let (n, m) = (scores.scores.nrows(), model.grid.len());
    let values = DMatrix::from_fn(n, m, |i, t| {
        model.mean[t]
            + (0..model.k())
                .map(|j| scores.scores[(i, j)] * model.lambdas[j] * model.eigenfunctions[(t, j)])
                .sum::<f64>()
    });
    Ok(CurveSet { grid: model.grid.clone(), values, weights: model.weights.clone() })
}

/// Root mean squared `‖X_i − X_{k,i}‖_w` over the curves.
pub fn reconstruction_error(cs: &CurveSet, model: &KlModel) -> Result<f64> {
    let rec = kl_reconstruct(model, &kl_scores(cs, model)?)?;
    let diff = &cs.values - &rec.values;
    let mut total = 0.0;
    for i in 0..cs.n() {
        let row: Vec<f64> = diff.row(i).iter().copied().collect();
        total += cs.inner(&row, &row);
    }
    Ok((total / cs.n() as f64).sqrt())
}

/// The second argument of a functional test.
#[derive(Debug, Clone, Copy)]
pub enum FunctionalTarget<'a> {
    Vectors(&'a DMatrix<f64>),
    /// Curves projected onto their first `k` components.
    Curves(&'a CurveSet, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalReport {
    pub k_x: usize,
    pub k_y: Option<usize>,
    pub report: TestReport,
}

/// Projects the curves onto `k_x` standardized scores (and the target, if
/// functional, onto its own) and runs `method` on the score samples.
pub fn functional_independence_test(
    x: &CurveSet,
    y: FunctionalTarget<'_>,
    k_x: usize,
    method: &TestMethod,
    seed: u64,
) -> Result<FunctionalReport> {
    let zx = kl_scores(x, &kl_fit(x, k_x)?)?.scores;
    let (zy, k_y) = match y {
        FunctionalTarget::Vectors(m) => (m.clone(), None),
        FunctionalTarget::Curves(cs, k) => (kl_scores(cs, &kl_fit(cs, k)?)?.scores, Some(k)),
    };
    let report = method.run(&zx, &zy, seed)?;
    Ok(FunctionalReport { k_x, k_y, report })
}
