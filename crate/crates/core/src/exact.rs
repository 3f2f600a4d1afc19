//! Exact finite-sample p-values: Fisher's 2×2 test, the binomial null of a
//! symmetry statistic, and Bonferroni/Holm adjustment.
//!
//! All probabilities are assembled in log space from a shared table of
//! `ln k!`, so tables with totals in the millions stay finite.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::binex::SymmetryStat;
use crate::error::{Error, Result};

/// Relative slack when comparing table probabilities against the observed one.
pub const FISHER_TIE_TOLERANCE: f64 = 1e-7;

const LN_FACT_TABLE: usize = 1 << 16;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..LN_FACT_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln k!`; tabulated below 2^16, Stirling series above.
pub fn ln_factorial(k: u64) -> f64 {
    let table = ln_fact_table();
    if (k as usize) < table.len() {
        return table[k as usize];
    }
    let x = k as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// 2×2 contingency table `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Table2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Table2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Table2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn rows(&self) -> [[u64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    /// Pearson's χ² statistic without continuity correction. Diagnostic only.
    pub fn chi_square(&self) -> f64 {
        let m = self.total() as f64;
        let (r1, r2) = ((self.a + self.b) as f64, (self.c + self.d) as f64);
        let (c1, c2) = ((self.a + self.c) as f64, (self.b + self.d) as f64);
        let denom = r1 * r2 * c1 * c2;
        if denom == 0.0 {
            return 0.0;
        }
        let cross = self.a as f64 * self.d as f64 - self.b as f64 * self.c as f64;
        m * cross * cross / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    FisherTwoSided,
    BinomialTwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub value: f64,
    pub method: PMethod,
    pub adjusted: Option<f64>,
}

impl PValue {
    pub fn new(value: f64, method: PMethod) -> Self {
        PValue { value, method, adjusted: None }
    }

    /// Adjusted value if present, raw value otherwise.
    pub fn effective(&self) -> f64 {
        self.adjusted.unwrap_or(self.value)
    }
}

/// Two-sided Fisher exact test by the minimum-likelihood rule: the p-value
/// sums the probabilities of all tables with the observed margins that are no
/// more likely than the observed table.
pub fn fisher_exact_2x2(t: Table2x2) -> PValue {
    let m = t.total();
    let r1 = t.a + t.b;
    let c1 = t.a + t.c;
    let r2 = m - r1;
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    if lo == hi {
        return PValue::new(1.0, PMethod::FisherTwoSided);
    }
    let base = ln_choose(m, c1);
    let ln_p = |a: u64| ln_choose(r1, a) + ln_choose(r2, c1 - a) - base;
    let threshold = ln_p(t.a) + FISHER_TIE_TOLERANCE.ln_1p();

    // The hypergeometric pmf is unimodal: the included tables form a lower
    // and an upper tail, each walked inward until the threshold is crossed.
    let mut total = 0.0;
    let mut left = lo;
    while left <= hi {
        let lp = ln_p(left);
        if lp > threshold {
            break;
        }
        total += lp.exp();
        left += 1;
    }
    if left <= hi {
        let mut right = hi;
        while right > left {
            let lp = ln_p(right);
            if lp > threshold {
                break;
            }
            total += lp.exp();
            right -= 1;
        }
    }
    PValue::new(total.min(1.0), PMethod::FisherTwoSided)
}

/// Upper-tail probabilities `P(Bin(n, 1/2) ≥ k)` for every `k ∈ 0..=n`.
#[derive(Debug, Clone)]
pub struct BinomialTail {
    n: u64,
    tail: Vec<f64>,
}

impl BinomialTail {
    pub fn new(n: u64) -> Self {
        let ln_half_n = n as f64 * std::f64::consts::LN_2;
        let mut tail = vec![0.0; n as usize + 2];
        for k in (0..=n).rev() {
            let term = (ln_choose(n, k) - ln_half_n).exp();
            tail[k as usize] = tail[k as usize + 1] + term;
        }
        tail.truncate(n as usize + 1);
        BinomialTail { n, tail }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn upper(&self, k: u64) -> f64 {
        self.tail.get(k as usize).copied().unwrap_or(0.0)
    }

    /// Two-sided p-value for a sum of `n` fair ±1 signs equal to `s_sum`.
    pub fn two_sided(&self, s_sum: i64) -> f64 {
        let k = (self.n + s_sum.unsigned_abs()) / 2;
        (2.0 * self.upper(k)).min(1.0)
    }
}

/// `p = min(1, 2 P(Bin(n, 1/2) ≥ (n + |S_Λ|)/2))`.
pub fn binomial_symmetry_pvalue(stat: &SymmetryStat) -> PValue {
    let tail = BinomialTail::new(stat.n as u64);
    PValue::new(tail.two_sided(stat.s_sum), PMethod::BinomialTwoSided)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    #[default]
    Bonferroni,
    Holm,
}

impl std::str::FromStr for Correction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bonferroni" => Ok(Correction::Bonferroni),
            "holm" => Ok(Correction::Holm),
            other => Err(Error::InvalidParameter(format!("unknown correction '{other}'"))),
        }
    }
}

/// Multiplicity adjustment over `total_tests` hypotheses, of which `ps` were
/// actually tested. Untested hypotheses still count in the denominator.
pub fn adjust_pvalues(ps: &[PValue], method: Correction, total_tests: usize) -> Result<Vec<PValue>> {
    if total_tests < ps.len() {
        return Err(Error::TotalTestsTooSmall { tests: ps.len(), total: total_tests });
    }
    let total = total_tests as f64;
    let mut out = ps.to_vec();
    match method {
        Correction::Bonferroni => {
            for p in &mut out {
                p.adjusted = Some((p.value * total).min(1.0));
            }
        }
        Correction::Holm => {
            let mut order: Vec<usize> = (0..ps.len()).collect();
            order.sort_by(|&i, &j| ps[i].value.total_cmp(&ps[j].value));
            let mut running = 0.0f64;
            for (rank, &i) in order.iter().enumerate() {
                let step = (ps[i].value * (total - rank as f64)).min(1.0);
                running = running.max(step);
                out[i].adjusted = Some(running);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binex::LambdaIndex;

    fn stat(n: usize, s: i64) -> SymmetryStat {
        SymmetryStat::new(LambdaIndex::new(1, 1), s, n)
    }

    #[test]
    fn fisher_examples() {
        assert!((fisher_exact_2x2(Table2x2::new(1, 0, 0, 1)).value - 1.0).abs() < 1e-12);
        assert!((fisher_exact_2x2(Table2x2::new(3, 1, 1, 3)).value - 0.4857142857142857).abs() < 1e-6);
        assert!((fisher_exact_2x2(Table2x2::new(5, 0, 0, 5)).value - 2.0 / 252.0).abs() < 1e-12);
        assert_eq!(fisher_exact_2x2(Table2x2::default()).value, 1.0);
        assert_eq!(fisher_exact_2x2(Table2x2::new(4, 0, 0, 0)).value, 1.0);
    }

    #[test]
    fn fisher_large_tables_stay_finite() {
        let p = fisher_exact_2x2(Table2x2::new(250_400, 249_600, 249_600, 250_400)).value;
        assert!(p > 0.0 && p < 1.0, "{p}");
        let p = fisher_exact_2x2(Table2x2::new(500_000, 0, 0, 500_000)).value;
        assert_eq!(p, 0.0);
        let p = fisher_exact_2x2(Table2x2::new(250_000, 250_000, 250_000, 250_000)).value;
        assert!((p - 1.0).abs() < 1e-9, "{p}");
    }

    #[test]
    fn ln_factorial_continuity_at_table_edge() {
        let k = LN_FACT_TABLE as u64;
        let direct = ln_factorial(k - 1) + (k as f64).ln();
        assert!((ln_factorial(k) - direct).abs() < 1e-8);
    }

    #[test]
    fn binomial_examples() {
        assert!((binomial_symmetry_pvalue(&stat(10, 10)).value - 2.0 / 1024.0).abs() < 1e-15);
        assert_eq!(binomial_symmetry_pvalue(&stat(10, 0)).value, 1.0);
        assert!((binomial_symmetry_pvalue(&stat(4, 2)).value - 0.625).abs() < 1e-15);
        assert_eq!(binomial_symmetry_pvalue(&stat(9, 1)).value, 1.0);
        assert_eq!(binomial_symmetry_pvalue(&stat(12, -6)).value, binomial_symmetry_pvalue(&stat(12, 6)).value);
    }

    #[test]
    fn adjustment_examples() {
        let p = |v| PValue::new(v, PMethod::FisherTwoSided);
        let bonf = adjust_pvalues(&[p(0.01)], Correction::Bonferroni, 5).unwrap();
        assert!((bonf[0].adjusted.unwrap() - 0.05).abs() < 1e-15);
        let bonf = adjust_pvalues(&[p(0.5)], Correction::Bonferroni, 3).unwrap();
        assert_eq!(bonf[0].adjusted, Some(1.0));
        let holm = adjust_pvalues(&[p(0.01), p(0.04)], Correction::Holm, 2).unwrap();
        assert_eq!(holm[0].adjusted, Some(0.02));
        assert_eq!(holm[1].adjusted, Some(0.04));
        // order preserved when input is unsorted
        let holm = adjust_pvalues(&[p(0.04), p(0.01)], Correction::Holm, 2).unwrap();
        assert_eq!(holm[0].adjusted, Some(0.04));
        assert_eq!(holm[1].adjusted, Some(0.02));
        assert_eq!(
            adjust_pvalues(&[p(0.1), p(0.2)], Correction::Holm, 1),
            Err(Error::TotalTestsTooSmall { tests: 2, total: 1 })
        );
    }

    #[test]
    fn chi_square_diagnostic() {
        assert_eq!(Table2x2::new(5, 5, 5, 5).chi_square(), 0.0);
        assert!((Table2x2::new(5, 0, 0, 5).chi_square() - 10.0).abs() < 1e-12);
        assert_eq!(Table2x2::new(3, 0, 2, 0).chi_square(), 0.0);
    }
}
