//! Every cuboid statistic is a quadratic form in the symmetry statistics.
//! Prints the weight vectors of a few cuboids and checks the identity on
//! random data.
//!
//! cargo run --example quadratic_forms

use bexdep::multifit::{
    count_path_statistic, cuboid_table, cuboid_weight_vector, enumerate_cuboids, Basis, Cuboid, SymmetryVector,
};
use bexdep::rank_to_copula;
use rand::Rng;

fn main() -> bexdep::Result<()> {
    for c in [Cuboid::full((1, 1)), Cuboid::from_signs((1, 1), &[-1], &[]), Cuboid::from_signs((1, 1), &[1], &[-1])] {
        let w = cuboid_weight_vector(&c, 3, 3)?;
        let terms: Vec<String> = w.terms().iter().map(|(l, c)| format!("{c:+}·{l}")).collect();
        println!("depth ({}, {}): 2^{} · ({})²", c.k1, c.k2, w.scale_log2, terms.join(" "));
    }

    let mut r = bexdep::rng::stream(7, &[]);
    let x: Vec<f64> = (0..100).map(|_| r.random()).collect();
    let y: Vec<f64> = x.iter().map(|v| (6.0 * v).sin() + 0.3 * r.random::<f64>()).collect();
    let (xc, yc) = (rank_to_copula(&x)?, rank_to_copula(&y)?);
    let s = SymmetryVector::from_copula(&xc, &yc, Basis::new(3, 3)?)?;

    let mut agree = 0;
    let cuboids = enumerate_cuboids(1, 1, 2);
    for c in &cuboids {
        let counted = count_path_statistic(c, &cuboid_table(&xc, &yc, c)?);
        let (num, e) = cuboid_weight_vector(c, 3, 3)?.quadratic_form_exact(&s)?;
        if counted << (-e) as u32 == num {
            agree += 1;
        }
    }
    println!("\ncounting and quadratic form agree on {agree}/{} cuboids", cuboids.len());
    Ok(())
}
