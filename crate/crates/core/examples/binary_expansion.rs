//! Copula transform, bit expansion and symmetry statistics for one pair of
//! margins.
//!
//! cargo run --example binary_expansion

use bexdep::binex::{binary_bits, symmetry_statistic, LambdaIndex};
use bexdep::{rank_to_copula, BitMatrix};

fn main() -> bexdep::Result<()> {
    let x = [0.3, -1.2, 2.5, 0.9, -0.4, 1.7, -2.1, 0.0];
    let y: Vec<f64> = x.iter().map(|v| v * v).collect();

    let u = rank_to_copula(&x)?;
    println!("ranks  {:?}", u.ranks());
    println!("copula {:?}", u.values());

    for &v in &u.values()[..3] {
        let bits = binary_bits(v, 4)?;
        let approx: f64 = bits.iter().enumerate().map(|(d, &a)| a as f64 / 2f64.powi(d as i32 + 1)).sum();
        println!("u = {v:+.4}  bits {bits:?}  recombined {approx:+.4}");
    }

    let bx = BitMatrix::from_copula(&u, 3)?;
    let by = BitMatrix::from_copula(&rank_to_copula(&y)?, 3)?;
    println!("\nbits of x (depth 3):");
    bx.write_csv(std::io::stdout()).expect("stdout");

    // y = x² folds the line: A1 of y should track A1·A2 of x
    for l in [LambdaIndex::from_depths(&[1], &[1]), LambdaIndex::from_depths(&[1, 2], &[1])] {
        let s = symmetry_statistic(&bx, &by, l)?;
        println!("{l}: S = {:+}, S̄ = {:+.3}", s.s_sum, s.s_bar);
    }
    Ok(())
}
