//! BERET on a multivariate dependence that only shows along a direction
//! mixing both coordinates, plus BET on univariate data.
//!
//! cargo run --release --example beret_projection

use bexdep::{beret_test, bet_test, BeretConfig};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> bexdep::Result<()> {
    let n = 300;
    let mut r = bexdep::rng::stream(23, &[]);
    let x = DMatrix::from_fn(n, 2, |_, _| r.sample::<f64, _>(StandardNormal));
    let y = DMatrix::from_fn(n, 2, |i, j| {
        let s = (x[(i, 0)] + x[(i, 1)]) / 2f64.sqrt();
        let noise: f64 = r.sample(StandardNormal);
        if j == 0 {
            s.abs() + 0.3 * noise
        } else {
            noise
        }
    });

    let report = beret_test(&x, &y, &BeretConfig { seed: 5, ..Default::default() })?;
    let best = report.strongest();
    let pair = report.strongest_projection();
    println!("BERET global p = {:.3e} over {} tests", report.global_p, report.total_tests);
    println!("  projection {}: s = {:?}, t = {:?}", best.projection, pair.s, pair.t);
    println!("  interaction {} with S̄ = {:+.3}", best.stat.lambda, best.stat.s_bar);

    let a: Vec<f64> = (0..n).map(|_| r.random()).collect();
    let b: Vec<f64> = a.iter().map(|v| (v - 0.5).abs() + 0.05 * r.random::<f64>()).collect();
    let bet = bet_test(&a, &b, 4, 0.05)?;
    println!("\nBET on v-shaped data: p = {:.3e}, rejected = {}", bet.global_p, bet.rejected);
    Ok(())
}
