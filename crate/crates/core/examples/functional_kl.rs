//! Karhunen-Loève projection of curves and an independence test on the
//! leading scores.
//!
//! cargo run --release --example functional_kl

use bexdep::kl::{functional_independence_test, reconstruction_error, smallest_k_for_energy, FunctionalTarget};
use bexdep::sim::planted_functional;
use bexdep::{kl_fit, kl_scores, MultiFitConfig, TestMethod};

fn main() -> bexdep::Result<()> {
    // Y depends on the second score only
    let (cs, y) = planted_functional(200, 101, Some(2), 3)?;
    let full = kl_fit(&cs, 3)?;
    println!("λ = {:.4?}, rank {}, energy {:.6}", full.lambdas, full.rank, full.energy_fraction());
    println!("k for 90% energy: {}", smallest_k_for_energy(&cs, 0.9)?);

    for k in 1..=3 {
        let model = kl_fit(&cs, k)?;
        println!("k = {k}: reconstruction error {:.3e}", reconstruction_error(&cs, &model)?);
    }

    let z = kl_scores(&cs, &full)?;
    let first: Vec<f64> = z.scores.row(0).iter().copied().collect();
    println!("first scores {first:.3?}");

    let method = TestMethod::MultiFit(MultiFitConfig::default());
    for k in [1, 2] {
        let r = functional_independence_test(&cs, FunctionalTarget::Vectors(&y), k, &method, 0)?;
        println!("test with k = {k}: p = {:.3e}", r.report.global_p());
    }
    Ok(())
}
