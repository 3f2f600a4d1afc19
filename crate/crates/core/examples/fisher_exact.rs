//! Fisher's exact test on 2×2 tables and the multiplicity corrections.
//!
//! cargo run --example fisher_exact

use bexdep::exact::PMethod;
use bexdep::{adjust_pvalues, fisher_exact_2x2, Correction, PValue, Table2x2};

fn main() -> bexdep::Result<()> {
    let tables = [
        Table2x2::new(3, 1, 1, 3),
        Table2x2::new(10, 2, 3, 9),
        Table2x2::new(20, 20, 21, 19),
        Table2x2::new(0, 12, 11, 1),
    ];
    let ps: Vec<PValue> = tables.iter().map(|&t| fisher_exact_2x2(t)).collect();
    for (t, p) in tables.iter().zip(&ps) {
        println!("{:?}  p = {:.6}", t.rows(), p.value);
    }

    // pretend 50 hypotheses were enumerated, only these four had enough data
    let bon = adjust_pvalues(&ps, Correction::Bonferroni, 50)?;
    let holm = adjust_pvalues(&ps, Correction::Holm, 50)?;
    println!("\n{:>10} {:>10} {:>10}", "raw", "bonferroni", "holm");
    for i in 0..ps.len() {
        println!("{:>10.6} {:>10.6} {:>10.6}", ps[i].value, bon[i].effective(), holm[i].effective());
    }

    let binom = PValue::new(0.5, PMethod::BinomialTwoSided);
    println!("\nuntouched p carries no adjustment: {:?}", binom.adjusted);
    Ok(())
}
