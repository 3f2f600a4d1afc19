//! A noisy circle rotated in three dimensions: each coordinate pair looks
//! unremarkable, the joint structure does not.
//!
//! cargo run --release --example rotated_circle

use bexdep::sim::rotated_circle_3d;
use bexdep::{beret_test, multifit_test, BeretConfig, MultiFitConfig};

fn main() -> bexdep::Result<()> {
    let (x, y) = rotated_circle_3d(600, 0.05, 31)?;
    println!("x: {}×{}, y: {}×{}", x.nrows(), x.ncols(), y.nrows(), y.ncols());

    let mf = multifit_test(&x, &y, &MultiFitConfig::default())?;
    println!("MultiFIT p = {:.3e}", mf.global_p);
    if let Some(t) = mf.strongest() {
        println!("  margins {:?} depth ({}, {})", t.cuboid.margin_pair, t.cuboid.k1, t.cuboid.k2);
    }

    let br = beret_test(&x, &y, &BeretConfig { seed: 1, ..Default::default() })?;
    println!("BERET    p = {:.3e}", br.global_p);
    Ok(())
}
