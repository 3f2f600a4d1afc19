//! Random-projection ensemble of binary expansion tests.
//!
//! Each of `m` projection pairs `(s, t)` reduces `X` and `Y` to the univariate
//! samples `sᵀX_i` and `tᵀY_i`. Those are rank-transformed, expanded to depth
//! `d_max`, and every cross interaction gets an exact binomial p-value. The
//! ensemble is Bonferroni-corrected over all `m (2^{d_max} - 1)²` tests.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::binex::{all_cross_interactions, rank_to_copula, BitMatrix, LambdaIndex, SymmetryStat, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::exact::{adjust_pvalues, BinomialTail, Correction, PMethod, PValue};
use crate::rng;

/// Unit projection directions for `X` and `Y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionPair {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub seed_id: u64,
}

fn unit_direction<R: rand::Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    if dim == 1 {
        return vec![1.0];
    }
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        // first nonzero coordinate positive
        let flip = v.iter().find(|a| **a != 0.0).is_some_and(|a| *a < 0.0);
        let k = if flip { -1.0 / norm } else { 1.0 / norm };
        v.iter_mut().for_each(|a| *a *= k);
        return v;
    }
}

/// `m` projection pairs, each from its own stream `(seed, seed_id)`.
pub fn sample_projections(p: usize, q: usize, m: usize, seed: u64) -> Vec<ProjectionPair> {
    (0..m as u64)
        .map(|id| {
            let mut r = rng::stream(seed, &[id]);
            let s = unit_direction(p, &mut r);
            let t = unit_direction(q, &mut r);
            ProjectionPair { s, t, seed_id: id }
        })
        .collect()
}

fn project(m: &DMatrix<f64>, dir: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| m.row(i).iter().zip(dir).map(|(a, b)| a * b).sum()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeretConfig {
    /// Number of projection pairs.
    pub m: usize,
    pub d_max: u32,
    pub alpha: f64,
    pub seed: u64,
    pub correction: Correction,
}

impl Default for BeretConfig {
    fn default() -> Self {
        BeretConfig { m: 30, d_max: 4, alpha: 0.05, seed: 0, correction: Correction::Bonferroni }
    }
}

/// One symmetry statistic of one projected pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeretFinding {
    pub projection: usize,
    pub stat: SymmetryStat,
    pub p: PValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeretReport {
    pub global_p: f64,
    pub alpha: f64,
    pub rejected: bool,
    pub d_max: u32,
    pub correction: Correction,
    pub n: usize,
    pub dims: (usize, usize),
    pub total_tests: usize,
    pub projections: Vec<ProjectionPair>,
    /// Projection-major, cross interactions in enumeration order.
    pub findings: Vec<BeretFinding>,
    pub strongest: usize,
}

impl BeretReport {
    pub fn strongest(&self) -> &BeretFinding {
        &self.findings[self.strongest]
    }

    pub fn strongest_projection(&self) -> &ProjectionPair {
        &self.projections[self.strongest().projection]
    }
}

/// A projected observation with its region (`A_Λ = ±1`) under the strongest
/// interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectedPoint {
    pub s_proj: f64,
    pub t_proj: f64,
    pub u: f64,
    pub v: f64,
    pub a_lambda: i8,
}

pub fn projected_points(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    pair: &ProjectionPair,
    lambda: LambdaIndex,
) -> Result<Vec<ProjectedPoint>> {
    check_dims(x, y)?;
    if pair.s.len() != x.ncols() || pair.t.len() != y.ncols() {
        return Err(Error::DimensionMismatch("projection does not match data dimensions".into()));
    }
    let (dx, dy) = lambda.depths_needed();
    let sp = project(x, &pair.s);
    let tp = project(y, &pair.t);
    let uc = rank_to_copula(&sp)?;
    let vc = rank_to_copula(&tp)?;
    let ub = BitMatrix::from_copula(&uc, dx.max(1))?;
    let vb = BitMatrix::from_copula(&vc, dy.max(1))?;
    Ok((0..sp.len())
        .map(|i| ProjectedPoint {
            s_proj: sp[i],
            t_proj: tp[i],
            u: uc.values()[i],
            v: vc.values()[i],
            a_lambda: crate::binex::interaction_value(&ub.row(i), &vb.row(i), lambda).expect("depths checked"),
        })
        .collect())
}

fn check_dims(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch(format!("X has {} rows, Y has {}", x.nrows(), y.nrows())));
    }
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::DimensionMismatch("X and Y need at least one column".into()));
    }
    if x.nrows() < 8 {
        return Err(Error::InsufficientSample { required: 8, got: x.nrows() });
    }
    Ok(())
}

pub fn beret_test(x: &DMatrix<f64>, y: &DMatrix<f64>, cfg: &BeretConfig) -> Result<BeretReport> {
    check_dims(x, y)?;
    if cfg.m == 0 {
        return Err(Error::InvalidParameter("need at least one projection".into()));
    }
    if cfg.d_max == 0 || cfg.d_max > 12.min(MAX_DEPTH) {
        return Err(Error::InvalidDepth(cfg.d_max));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    let n = x.nrows();
    let projections = sample_projections(x.ncols(), y.ncols(), cfg.m, cfg.seed);
    let lambdas = all_cross_interactions(cfg.d_max, cfg.d_max);
    let tail = BinomialTail::new(n as u64);

    let findings: Vec<BeretFinding> = projections
        .par_iter()
        .enumerate()
        .map(|(j, pair)| -> Result<Vec<BeretFinding>> {
            let ub = BitMatrix::from_copula(&rank_to_copula(&project(x, &pair.s))?, cfg.d_max)?;
            let vb = BitMatrix::from_copula(&rank_to_copula(&project(y, &pair.t))?, cfg.d_max)?;
            let sums = crate::binex::symmetry_sums(&ub, &vb, cfg.d_max, cfg.d_max)?;
            Ok(lambdas
                .iter()
                .map(|&l| {
                    let s_sum = sums[((l.x_mask as usize) << cfg.d_max) | l.y_mask as usize];
                    BeretFinding {
                        projection: j,
                        stat: SymmetryStat::new(l, s_sum, n),
                        p: PValue::new(tail.two_sided(s_sum), PMethod::BinomialTwoSided),
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let total_tests = findings.len();
    let raw: Vec<PValue> = findings.iter().map(|f| f.p).collect();
    let adjusted = adjust_pvalues(&raw, cfg.correction, total_tests)?;
    let findings: Vec<BeretFinding> =
        findings.into_iter().zip(adjusted).map(|(f, p)| BeretFinding { p, ..f }).collect();
    let mut strongest = 0;
    for (i, f) in findings.iter().enumerate() {
        if f.p.effective() < findings[strongest].p.effective() {
            strongest = i;
        }
    }
    let global_p = findings[strongest].p.effective().min(1.0);
    Ok(BeretReport {
        global_p,
        alpha: cfg.alpha,
        rejected: global_p <= cfg.alpha,
        d_max: cfg.d_max,
        correction: cfg.correction,
        n,
        dims: (x.ncols(), y.ncols()),
        total_tests,
        projections,
        findings,
        strongest,
    })
}

/// Plain binary expansion test of two univariate samples: the ensemble with
/// a single trivial projection.
pub fn bet_test(x: &[f64], y: &[f64], d_max: u32, alpha: f64) -> Result<BeretReport> {
    let xm = DMatrix::from_column_slice(x.len(), 1, x);
    let ym = DMatrix::from_column_slice(y.len(), 1, y);
    beret_test(&xm, &ym, &BeretConfig { m: 1, d_max, alpha, ..Default::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_projections_are_trivial() {
        for p in sample_projections(1, 1, 5, 3) {
            assert_eq!((p.s, p.t), (vec![1.0], vec![1.0]));
        }
    }

    #[test]
    fn projections_are_reproducible_unit_and_canonical() {
        let a = sample_projections(3, 2, 2, 11);
        let b = sample_projections(3, 2, 2, 11);
        assert_eq!(a, b);
        for p in &a {
            let ns: f64 = p.s.iter().map(|v| v * v).sum();
            let nt: f64 = p.t.iter().map(|v| v * v).sum();
            assert!((ns - 1.0).abs() < 1e-12 && (nt - 1.0).abs() < 1e-12);
            assert!(p.s[0] > 0.0 && p.t[0] > 0.0);
        }
        assert_ne!(a, sample_projections(3, 2, 2, 12));
    }

    #[test]
    fn identical_samples_reject() {
        let v: Vec<f64> = (0..128).map(|i| ((i * 53) % 128) as f64).collect();
        let r = bet_test(&v, &v, 2, 0.05).unwrap();
        assert!(r.rejected);
        assert_eq!(r.total_tests, 9);
        assert_eq!(r.strongest().stat.s_sum.abs(), 128);
    }

    #[test]
    fn configuration_errors() {
        let x = DMatrix::from_element(10, 1, 0.0);
        let cfg = BeretConfig { m: 0, ..Default::default() };
        assert!(beret_test(&x, &x, &cfg).is_err());
        let cfg = BeretConfig { d_max: 0, ..Default::default() };
        assert!(beret_test(&x, &x, &cfg).is_err());
        let short = DMatrix::from_element(5, 1, 0.0);
        assert!(matches!(beret_test(&short, &short, &BeretConfig::default()), Err(Error::InsufficientSample { .. })));
    }

    #[test]
    fn projected_points_follow_the_interaction() {
        let xs: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let x = DMatrix::from_column_slice(16, 1, &xs);
        let pair = ProjectionPair { s: vec![1.0], t: vec![1.0], seed_id: 0 };
        let pts = projected_points(&x, &x, &pair, LambdaIndex::from_depths(&[1], &[1])).unwrap();
        assert!(pts.iter().all(|p| p.a_lambda == 1));
        let pts = projected_points(&x, &x, &pair, LambdaIndex::from_depths(&[2], &[1])).unwrap();
        assert_eq!(pts.iter().filter(|p| p.a_lambda == 1).count(), 8);
    }
}
