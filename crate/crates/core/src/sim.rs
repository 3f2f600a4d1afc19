//! Scenario generators and Monte Carlo estimates of power and level.
//!
//! Every replicate draws its data from the stream `(seed, level, replicate)`
//! and its test randomness from `(seed, level, replicate, 1)`, so curves do
//! not depend on thread count, and different methods see identical datasets.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::beret::{beret_test, BeretConfig};
use crate::error::{Error, Result};
use crate::kl::CurveSet;
use crate::multifit::{multifit_test, MultiFitConfig};
use crate::report::TestReport;
use crate::rng;

pub const NOISE_LEVELS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Linear,
    Parabolic,
    Circular,
    Sine,
    Checkerboard,
    Local,
    /// Independent margins; the noise level is ignored.
    Null,
}

impl Shape {
    pub const SIGNALS: [Shape; 6] =
        [Shape::Linear, Shape::Parabolic, Shape::Circular, Shape::Sine, Shape::Checkerboard, Shape::Local];

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Linear => "linear",
            Shape::Parabolic => "parabolic",
            Shape::Circular => "circular",
            Shape::Sine => "sine",
            Shape::Checkerboard => "checkerboard",
            Shape::Local => "local",
            Shape::Null => "null",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Shape::SIGNALS
            .iter()
            .chain(&[Shape::Null])
            .find(|sh| sh.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Signal in coordinate 1 of both X and Y, noise elsewhere.
    Marginal,
    /// Signal mixed into every coordinate by a fixed orthogonal map.
    Spread,
}

impl Placement {
    pub fn name(&self) -> &'static str {
        match self {
            Placement::Marginal => "marginal",
            Placement::Spread => "spread",
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Placement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marginal" => Ok(Placement::Marginal),
            "spread" => Ok(Placement::Spread),
            other => Err(Error::InvalidParameter(format!("unknown placement '{other}'"))),
        }
    }
}

/// Per-shape multipliers of the noise standard deviation
/// `σ(level) = 0.05 · level · scale`.
///
/// The defaults put MultiFIT near half power at level 10 for `n = 128`,
/// `p = q = 2`, marginal placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseScales {
    pub linear: f64,
    pub parabolic: f64,
    pub circular: f64,
    pub sine: f64,
    pub checkerboard: f64,
    pub local: f64,
}

impl Default for NoiseScales {
    fn default() -> Self {
        NoiseScales { linear: 1.0, parabolic: 0.77, circular: 0.4, sine: 1.8, checkerboard: 0.13, local: 0.27 }
    }
}

impl NoiseScales {
    pub fn get(&self, shape: Shape) -> f64 {
        match shape {
            Shape::Linear => self.linear,
            Shape::Parabolic => self.parabolic,
            Shape::Circular => self.circular,
            Shape::Sine => self.sine,
            Shape::Checkerboard => self.checkerboard,
            Shape::Local => self.local,
            Shape::Null => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub shape: Shape,
    pub placement: Placement,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub noise_level: u32,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=NOISE_LEVELS).contains(&self.noise_level) {
            return Err(Error::InvalidParameter(format!("noise level {} outside 1..=20", self.noise_level)));
        }
        let min_dim = if self.shape == Shape::Null { 1 } else { 2 };
        if self.p < min_dim || self.q < min_dim {
            return Err(Error::InvalidParameter(format!(
                "{} placement needs p, q >= {min_dim}, got ({}, {})",
                self.placement, self.p, self.q
            )));
        }
        if self.n < 2 {
            return Err(Error::InsufficientSample { required: 2, got: self.n });
        }
        Ok(())
    }

    pub fn sigma(&self, scales: &NoiseScales) -> f64 {
        0.05 * self.noise_level as f64 * scales.get(self.shape)
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Centres and scales to unit sample variance, so the signal coordinate is on
/// the same scale as the standard normal coordinates it is mixed with.
fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    v.iter_mut().for_each(|a| *a = (*a - mean) / sd);
}

/// Folds `v` into `[0, 1]` by reflection at the edges.
fn reflect_unit(v: f64) -> f64 {
    let m = v.rem_euclid(2.0);
    if m > 1.0 {
        2.0 - m
    } else {
        m
    }
}

/// Draws `n` signal pairs `(x*, y*)` of `shape` with noise `sigma`.
pub fn signal_pair<R: Rng>(shape: Shape, n: usize, sigma: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = match shape {
            Shape::Linear => {
                let x: f64 = rng.random();
                (x, x + sigma * normal(rng))
            }
            Shape::Parabolic => {
                let x = 2.0 * rng.random::<f64>() - 1.0;
                (x, x * x + sigma * normal(rng))
            }
            Shape::Circular => {
                let theta = 2.0 * PI * rng.random::<f64>();
                (theta.cos() + sigma * normal(rng), theta.sin() + sigma * normal(rng))
            }
            Shape::Sine => {
                let x: f64 = rng.random();
                (x, (4.0 * PI * x).sin() + sigma * normal(rng))
            }
            Shape::Checkerboard => {
                // 8 cells of a 4×4 grid with (i + j) even
                let cell = rng.random_range(0..8u32);
                let i = cell / 2;
                let j = 2 * (cell % 2) + i % 2;
                let x = (i as f64 + rng.random::<f64>()) / 4.0;
                let y = (j as f64 + rng.random::<f64>()) / 4.0;
                (x, y + sigma * normal(rng))
            }
            Shape::Local => {
                // uniform square, except that points falling in the lower-right
                // quadrant follow a noisy diagonal band inside it
                let x: f64 = rng.random();
                let y: f64 = rng.random();
                let e = normal(rng);
                if x > 0.5 && y < 0.5 {
                    let u = 2.0 * (x - 0.5);
                    (x, 0.5 * reflect_unit(u + sigma * e))
                } else {
                    (x, y)
                }
            }
            Shape::Null => (rng.random(), rng.random()),
        };
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

/// Symmetric orthogonal reflection taking `e_1` to `(1, …, 1)/√d`.
/// For `d = 2` this is the normalized Hadamard matrix.
pub fn spread_rotation(d: usize) -> DMatrix<f64> {
    if d == 1 {
        return DMatrix::identity(1, 1);
    }
    let mut v = DMatrix::from_element(d, 1, -1.0 / (d as f64).sqrt());
    v[(0, 0)] += 1.0;
    let vv = (v.transpose() * &v)[(0, 0)];
    DMatrix::identity(d, d) - (&v * v.transpose()) * (2.0 / vv)
}

/// Generates `(X, Y)` with the default noise scales and spread rotations.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    generate_scenario_with(spec, &NoiseScales::default(), &spread_rotation(spec.p), &spread_rotation(spec.q))
}

/// Generates `(X, Y)`; `rot_x` / `rot_y` are applied to each row under the
/// spread placement.
pub fn generate_scenario_with(
    spec: &ScenarioSpec,
    scales: &NoiseScales,
    rot_x: &DMatrix<f64>,
    rot_y: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    spec.validate()?;
    if rot_x.shape() != (spec.p, spec.p) || rot_y.shape() != (spec.q, spec.q) {
        return Err(Error::DimensionMismatch("rotation size does not match dimensions".into()));
    }
    let mut r = rng::stream(spec.seed, &[]);
    let (mut xs, mut ys) = signal_pair(spec.shape, spec.n, spec.sigma(scales), &mut r);
    standardize(&mut xs);
    standardize(&mut ys);
    let mut x = DMatrix::zeros(spec.n, spec.p);
    let mut y = DMatrix::zeros(spec.n, spec.q);
    for i in 0..spec.n {
        x[(i, 0)] = xs[i];
        y[(i, 0)] = ys[i];
        for j in 1..spec.p {
            x[(i, j)] = normal(&mut r);
        }
        for k in 1..spec.q {
            y[(i, k)] = normal(&mut r);
        }
    }
    if spec.placement == Placement::Spread {
        x *= rot_x.transpose();
        y *= rot_y.transpose();
    }
    Ok((x, y))
}

/// Three-dimensional `X` and `Y` whose third coordinates lie on a noisy circle
/// rotated by π/4; the other coordinates are independent standard normals.
pub fn rotated_circle_3d(n: usize, noise_sd: f64, seed: u64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n < 8 {
        return Err(Error::InsufficientSample { required: 8, got: n });
    }
    let mut r = rng::stream(seed, &[]);
    let (c, s) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
    let mut x = DMatrix::zeros(n, 3);
    let mut y = DMatrix::zeros(n, 3);
    for i in 0..n {
        let theta = 2.0 * PI * r.random::<f64>();
        let a = theta.cos() + noise_sd * normal(&mut r);
        let b = theta.sin() + noise_sd * normal(&mut r);
        x[(i, 2)] = c * a - s * b;
        y[(i, 2)] = s * a + c * b;
        for k in 0..2 {
            x[(i, k)] = normal(&mut r);
            y[(i, k)] = normal(&mut r);
        }
    }
    Ok((x, y))
}

/// Curves `X = Σ_{j≤3} Z_j λ_j φ_j` on an `m`-point grid with `λ = (2, 1, 1/2)`
/// and Fourier eigenfunctions, paired with a univariate `Y`. With
/// `component = Some(j)`, `Y = Z_j + ε/2`; otherwise `Y` is independent noise.
pub fn planted_functional(n: usize, m: usize, component: Option<usize>, seed: u64) -> Result<(CurveSet, DMatrix<f64>)> {
    if m < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points".into()));
    }
    if component.is_some_and(|j| !(1..=3).contains(&j)) {
        return Err(Error::InvalidParameter("planted component must be 1, 2 or 3".into()));
    }
    let grid: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1) as f64).collect();
    let lambdas = [2.0, 1.0, 0.5];
    let phi = |j: usize, t: f64| match j {
        0 => 2f64.sqrt() * (2.0 * PI * t).sin(),
        1 => 2f64.sqrt() * (2.0 * PI * t).cos(),
        _ => 2f64.sqrt() * (4.0 * PI * t).sin(),
    };
    let mut r = rng::stream(seed, &[]);
    let mut values = DMatrix::zeros(n, m);
    let mut y = DMatrix::zeros(n, 1);
    for i in 0..n {
        let z: [f64; 3] = [normal(&mut r), normal(&mut r), normal(&mut r)];
        for (t, &g) in grid.iter().enumerate() {
            values[(i, t)] = (0..3).map(|j| z[j] * lambdas[j] * phi(j, g)).sum();
        }
        let e = normal(&mut r);
        y[(i, 0)] = match component {
            Some(j) => z[j - 1] + 0.5 * e,
            None => e,
        };
    }
    Ok((CurveSet::new(grid, values)?, y))
}

/// A test the harness can run on `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestMethod {
    MultiFit(MultiFitConfig),
    Beret(BeretConfig),
}

impl TestMethod {
    pub fn id(&self) -> &'static str {
        match self {
            TestMethod::MultiFit(_) => "multifit",
            TestMethod::Beret(_) => "beret",
        }
    }

    /// Runs the test; `seed` drives any internal randomness.
    pub fn run(&self, x: &DMatrix<f64>, y: &DMatrix<f64>, seed: u64) -> Result<TestReport> {
        match self {
            TestMethod::MultiFit(cfg) => multifit_test(x, y, cfg).map(TestReport::MultiFit),
            TestMethod::Beret(cfg) => beret_test(x, y, &BeretConfig { seed, ..*cfg }).map(TestReport::Beret),
        }
    }
}

/// Scenario parameters shared by every point of a power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioFamily {
    pub shape: Shape,
    pub placement: Placement,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub scales: NoiseScales,
}

impl ScenarioFamily {
    pub fn new(shape: Shape, placement: Placement, n: usize) -> Self {
        ScenarioFamily { shape, placement, p: 2, q: 2, n, scales: NoiseScales::default() }
    }

    pub fn spec(&self, noise_level: u32, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            shape: self.shape,
            placement: self.placement,
            p: self.p,
            q: self.q,
            n: self.n,
            noise_level,
            seed,
        }
    }

    pub fn generate(&self, noise_level: u32, seed: u64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        generate_scenario_with(
            &self.spec(noise_level, seed),
            &self.scales,
            &spread_rotation(self.p),
            &spread_rotation(self.q),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPoint {
    pub noise_level: u32,
    pub rejections: usize,
    pub replicates: usize,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurve {
    pub method: String,
    pub scenario: Shape,
    pub placement: Placement,
    pub alpha: f64,
    pub points: Vec<PowerPoint>,
}

impl PowerCurve {
    pub fn power_at(&self, level: u32) -> Option<f64> {
        self.points.iter().find(|p| p.noise_level == level).map(|p| p.power)
    }
}

fn rejects(report: &TestReport, alpha: f64) -> bool {
    alpha > 0.0 && report.global_p() <= alpha
}

/// Monte Carlo power of `method` on `family` at each noise level.
pub fn estimate_power(
    method: &TestMethod,
    family: &ScenarioFamily,
    levels: &[u32],
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<PowerCurve> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    let jobs: Vec<(u32, usize)> = levels.iter().flat_map(|&l| (0..replicates).map(move |r| (l, r))).collect();
    let outcomes: Vec<bool> = jobs
        .par_iter()
        .map(|&(level, rep)| {
            let data_seed = rng::derive_seed(seed, &[level as u64, rep as u64]);
            let (x, y) = family.generate(level, data_seed)?;
            let test_seed = rng::derive_seed(seed, &[level as u64, rep as u64, 1]);
            Ok(rejects(&method.run(&x, &y, test_seed)?, alpha))
        })
        .collect::<Result<_>>()?;
    let points = levels
        .iter()
        .enumerate()
        .map(|(li, &noise_level)| {
            let rejections = outcomes[li * replicates..(li + 1) * replicates].iter().filter(|&&r| r).count();
            PowerPoint { noise_level, rejections, replicates, power: rejections as f64 / replicates as f64 }
        })
        .collect();
    Ok(PowerCurve {
        method: method.id().to_string(),
        scenario: family.shape,
        placement: family.placement,
        alpha,
        points,
    })
}

/// Rejection rate over `replicates` independent-uniform datasets of size
/// `n` with dimensions `dims`.
pub fn type_i_error(
    method: &TestMethod,
    n: usize,
    dims: (usize, usize),
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    let family = ScenarioFamily { p: dims.0, q: dims.1, ..ScenarioFamily::new(Shape::Null, Placement::Marginal, n) };
    let curve = estimate_power(method, &family, &[1], replicates, alpha, seed)?;
    Ok(curve.points[0].power)
}

/// Writes curves as CSV with columns
/// `method,scenario,placement,noise_level,replicates,rejections,power`.
pub fn write_power_csv<W: Write>(curves: &[PowerCurve], mut out: W) -> std::io::Result<()> {
    writeln!(out, "method,scenario,placement,noise_level,replicates,rejections,power")?;
    for c in curves {
        for p in &c.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.method, c.scenario, c.placement, p.noise_level, p.replicates, p.rejections, p.power
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn noiseless_circle_is_exact() {
        let (x, y) = signal_pair(Shape::Circular, 500, 0.0, &mut rng::stream(1, &[]));
        for (a, b) in x.iter().zip(&y) {
            assert!((a * a + b * b - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn heavy_noise_kills_linear_signal() {
        let n = 20_000;
        let (x, y) = signal_pair(Shape::Linear, n, 1e4, &mut rng::stream(2, &[]));
        assert!(corr(&x, &y).abs() < 4.0 / (n as f64).sqrt());
        let (x, y) = signal_pair(Shape::Linear, n, 0.01, &mut rng::stream(2, &[]));
        assert!(corr(&x, &y) > 0.99);
    }

    #[test]
    fn identity_rotation_reduces_spread_to_marginal() {
        let spec = ScenarioSpec {
            shape: Shape::Sine,
            placement: Placement::Marginal,
            p: 3,
            q: 2,
            n: 64,
            noise_level: 4,
            seed: 9,
        };
        let id3 = DMatrix::identity(3, 3);
        let id2 = DMatrix::identity(2, 2);
        let marginal = generate_scenario_with(&spec, &NoiseScales::default(), &id3, &id2).unwrap();
        let spread_spec = ScenarioSpec { placement: Placement::Spread, ..spec };
        let spread = generate_scenario_with(&spread_spec, &NoiseScales::default(), &id3, &id2).unwrap();
        assert_eq!(marginal, spread);
    }

    #[test]
    fn spread_rotation_is_orthogonal_and_spreads_e1() {
        for d in 1..6 {
            let h = spread_rotation(d);
            let err = (&h * h.transpose() - DMatrix::<f64>::identity(d, d)).abs().max();
            assert!(err < 1e-12);
            for i in 0..d {
                assert!((h[(i, 0)] - 1.0 / (d as f64).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scenario_validation_and_determinism() {
        let spec = ScenarioFamily::new(Shape::Local, Placement::Spread, 50).spec(3, 4);
        assert_eq!(generate_scenario(&spec).unwrap(), generate_scenario(&spec).unwrap());
        assert!(generate_scenario(&ScenarioSpec { noise_level: 0, ..spec }).is_err());
        assert!(generate_scenario(&ScenarioSpec { noise_level: 21, ..spec }).is_err());
        assert!(generate_scenario(&ScenarioSpec { p: 1, ..spec }).is_err());
        assert!("wobbly".parse::<Shape>().is_err());
        assert_eq!("checkerboard".parse::<Shape>().unwrap(), Shape::Checkerboard);
        assert!("diagonal".parse::<Placement>().is_err());
    }

    #[test]
    fn checkerboard_occupies_even_cells() {
        let (x, y) = signal_pair(Shape::Checkerboard, 2000, 0.0, &mut rng::stream(5, &[]));
        for (a, b) in x.iter().zip(&y) {
            let (i, j) = ((a * 4.0) as u32, (b * 4.0) as u32);
            assert_eq!((i + j) % 2, 0);
        }
    }

    #[test]
    fn local_signal_stays_in_its_quadrant() {
        let (x, y) = signal_pair(Shape::Local, 4000, 0.0, &mut rng::stream(6, &[]));
        let inside: Vec<(f64, f64)> =
            x.iter().zip(&y).filter(|(a, b)| **a > 0.5 && **b < 0.5).map(|(a, b)| (*a, *b)).collect();
        let frac = inside.len() as f64 / 4000.0;
        assert!((frac - 0.25).abs() < 0.03);
        for (a, b) in inside {
            assert!((2.0 * (a - 0.5) - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_circle_noiseless() {
        let (x, y) = rotated_circle_3d(300, 0.0, 3).unwrap();
        for i in 0..300 {
            let r = (x[(i, 2)].powi(2) + y[(i, 2)].powi(2)).sqrt();
            assert!((r - 1.0).abs() <= 1e-12);
        }
        assert!(rotated_circle_3d(4, 0.1, 0).is_err());
    }

    #[test]
    fn alpha_zero_never_rejects() {
        let m = TestMethod::MultiFit(MultiFitConfig::default());
        assert_eq!(type_i_error(&m, 64, (1, 1), 100, 0.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn csv_layout() {
        let curve = PowerCurve {
            method: "multifit".into(),
            scenario: Shape::Sine,
            placement: Placement::Marginal,
            alpha: 0.05,
            points: vec![PowerPoint { noise_level: 1, rejections: 3, replicates: 4, power: 0.75 }],
        };
        let mut buf = Vec::new();
        write_power_csv(&[curve], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "method,scenario,placement,noise_level,replicates,rejections,power\nmultifit,sine,marginal,1,4,3,0.75\n"
        );
    }
}
