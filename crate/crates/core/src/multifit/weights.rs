//! Cuboid statistics as rank-one quadratic forms in symmetry statistics.
//!
//! The indicator of a cuboid is `Π_{d ≤ k1} (1 + s_d A_{1,d})/2 ·
//! Π_{d ≤ k2} (1 + t_d A_{2,d})/2` for prefix signs `s`, `t`. Multiplying by
//! the two splitting bits and expanding the product gives
//! `D_c = Σ_{i ∈ c} A_{1,k1+1,i} A_{2,k2+1,i} = 2^{-(k1+k2)} w·S`, with `w`
//! a ±1 vector over the interaction basis and `S` the unnormalized sums
//! `S_Λ`. The count statistic `2^{k1+k2} D_c²` is therefore
//! `2^{-(k1+k2)} (w·S)² = Sᵀ W S` with `W = 2^{-(k1+k2)} w wᵀ`.

use serde::Serialize;

use super::Cuboid;
use crate::binex::{symmetry_sums, BitMatrix, CopulaSample, LambdaIndex};
use crate::error::{Error, Result};
use crate::exact::Table2x2;

/// Every interaction over depths `d1 × d2`, `Λ = 0` included, ordered
/// `x_mask`-major: index `x_mask · 2^{d2} + y_mask`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Basis {
    pub d1: u32,
    pub d2: u32,
}

impl Basis {
    pub fn new(d1: u32, d2: u32) -> Result<Self> {
        if d1 == 0 || d2 == 0 || d1 + d2 > 24 {
            return Err(Error::InvalidParameter(format!("basis depths ({d1}, {d2}) out of range")));
        }
        Ok(Basis { d1, d2 })
    }

    pub fn len(&self) -> usize {
        1usize << (self.d1 + self.d2)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, l: LambdaIndex) -> Option<usize> {
        let (dx, dy) = l.depths_needed();
        (dx <= self.d1 && dy <= self.d2).then(|| ((l.x_mask as usize) << self.d2) | l.y_mask as usize)
    }

    pub fn lambda(&self, index: usize) -> LambdaIndex {
        LambdaIndex::new((index >> self.d2) as u32, (index & ((1 << self.d2) - 1)) as u32)
    }

    pub fn lambdas(&self) -> impl Iterator<Item = LambdaIndex> + '_ {
        (0..self.len()).map(|i| self.lambda(i))
    }

    fn check(&self, other: &Basis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch { left: (self.d1, self.d2), right: (other.d1, other.d2) });
        }
        Ok(())
    }
}

/// Unnormalized symmetry sums `S_Λ` over a basis; `S_0 = n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryVector {
    pub basis: Basis,
    pub sums: Vec<i64>,
    pub n: usize,
}

impl SymmetryVector {
    pub fn from_bits(x: &BitMatrix, y: &BitMatrix, basis: Basis) -> Result<Self> {
        let sums = symmetry_sums(x, y, basis.d1, basis.d2)?;
        Ok(SymmetryVector { basis, sums, n: x.n() })
    }

    pub fn from_copula(xc: &CopulaSample, yc: &CopulaSample, basis: Basis) -> Result<Self> {
        let x = BitMatrix::from_copula(xc, basis.d1)?;
        let y = BitMatrix::from_copula(yc, basis.d2)?;
        Self::from_bits(&x, &y, basis)
    }

    /// `S̄_Λ = S_Λ / n`.
    pub fn means(&self) -> Vec<f64> {
        self.sums.iter().map(|&s| s as f64 / self.n as f64).collect()
    }
}

/// Rank-one weight `W = 2^{scale_log2} · w wᵀ` with integer `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightMatrix {
    pub basis: Basis,
    pub coefficients: Vec<i64>,
    pub scale_log2: i32,
}

impl WeightMatrix {
    pub fn scale(&self) -> f64 {
        2f64.powi(self.scale_log2)
    }

    pub fn norm_sq(&self) -> i64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// `w · S`.
    pub fn project(&self, s: &SymmetryVector) -> Result<i64> {
        self.basis.check(&s.basis)?;
        Ok(self.coefficients.iter().zip(&s.sums).map(|(w, s)| w * s).sum())
    }

    /// `Sᵀ W S` as the exact pair `((w·S)², scale_log2)`.
    pub fn quadratic_form_exact(&self, s: &SymmetryVector) -> Result<(i128, i32)> {
        let ws = self.project(s)? as i128;
        Ok((ws * ws, self.scale_log2))
    }

    pub fn quadratic_form(&self, s: &SymmetryVector) -> Result<f64> {
        let (num, e) = self.quadratic_form_exact(s)?;
        Ok(num as f64 * 2f64.powi(e))
    }

    /// Nonzero entries of `w` with their interactions.
    pub fn terms(&self) -> Vec<(LambdaIndex, i64)> {
        self.coefficients.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (self.basis.lambda(i), c)).collect()
    }
}

/// Weight matrix whose quadratic form equals the cuboid's count statistic
/// `2^{k1+k2} D_c²`.
pub fn cuboid_weight_vector(c: &Cuboid, d1: u32, d2: u32) -> Result<WeightMatrix> {
    if c.k1 + 1 > d1 {
        return Err(Error::DepthOverflow { needed: c.k1 + 1, available: d1 });
    }
    if c.k2 + 1 > d2 {
        return Err(Error::DepthOverflow { needed: c.k2 + 1, available: d2 });
    }
    let basis = Basis::new(d1, d2)?;
    let mut w = vec![0i64; basis.len()];
    let sx = c.prefix_x_signs();
    let sy = c.prefix_y_signs();
    let split_x = 1u32 << c.k1;
    let split_y = 1u32 << c.k2;
    // subsets of the prefix bits; sign is the product of the selected prefix signs
    for xs in 0..(1u32 << c.k1) {
        let x_sign: i64 = (0..c.k1).filter(|d| xs >> d & 1 == 1).map(|d| sx[d as usize] as i64).product();
        for ys in 0..(1u32 << c.k2) {
            let y_sign: i64 = (0..c.k2).filter(|d| ys >> d & 1 == 1).map(|d| sy[d as usize] as i64).product();
            let l = LambdaIndex::new(xs | split_x, ys | split_y);
            w[basis.index(l).expect("within basis")] += x_sign * y_sign;
        }
    }
    Ok(WeightMatrix { basis, coefficients: w, scale_log2: -((c.k1 + c.k2) as i32) })
}

/// `2^{k1+k2} D_c²` from the cuboid's 2×2 table, `D_c = a + d - b - c`.
pub fn count_path_statistic(c: &Cuboid, t: &Table2x2) -> i128 {
    let dc = (t.a + t.d) as i128 - (t.b + t.c) as i128;
    (dc * dc) << (c.k1 + c.k2)
}

/// `max_j Sᵀ W_j S` and the first index attaining it.
pub fn max_quadratic_statistic(s: &SymmetryVector, weights: &[WeightMatrix]) -> Result<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (j, w) in weights.iter().enumerate() {
        let v = w.quadratic_form(s)?;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, j));
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no weight matrices given".into()))
}

/// How well a mean vector of symmetry statistics lines up with the top
/// eigenvector of a weight matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FavorabilityDiagnostic {
    pub mu: Vec<f64>,
    pub top_eigenvalue: f64,
    /// Cosine between `mu` and `w`.
    pub alignment: f64,
    /// `mu` was zero; `alignment` is reported as 0.
    pub degenerate: bool,
}

pub fn analyze_weight_favorability(w: &WeightMatrix, mu: &[f64]) -> Result<FavorabilityDiagnostic> {
    if mu.len() != w.basis.len() {
        return Err(Error::DimensionMismatch(format!("mu has {} entries, basis has {}", mu.len(), w.basis.len())));
    }
    let w_norm = (w.norm_sq() as f64).sqrt();
    let mu_norm = mu.iter().map(|m| m * m).sum::<f64>().sqrt();
    let degenerate = mu_norm == 0.0 || w_norm == 0.0;
    let alignment = if degenerate {
        0.0
    } else {
        let dot: f64 = w.coefficients.iter().zip(mu).map(|(&c, m)| c as f64 * m).sum();
        (dot / (w_norm * mu_norm)).clamp(-1.0, 1.0)
    };
    Ok(FavorabilityDiagnostic {
        mu: mu.to_vec(),
        top_eigenvalue: w.scale() * w.norm_sq() as f64,
        alignment,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binex::rank_to_copula;
    use crate::multifit::cuboid_table;

    fn lam(x: &[u32], y: &[u32]) -> LambdaIndex {
        LambdaIndex::from_depths(x, y)
    }

    #[test]
    fn displayed_cuboid_statistics() {
        // (Σ A11 A21)²
        let w = cuboid_weight_vector(&Cuboid::full((1, 1)), 2, 2).unwrap();
        assert_eq!(w.terms(), vec![(lam(&[1], &[1]), 1)]);
        assert_eq!(w.scale_log2, 0);

        // (Σ (A12 A21 − A11 A12 A21))² / 2
        let left = Cuboid::from_signs((1, 1), &[-1], &[]);
        let w = cuboid_weight_vector(&left, 2, 2).unwrap();
        assert_eq!(w.terms(), vec![(lam(&[2], &[1]), 1), (lam(&[1, 2], &[1]), -1)]);
        assert_eq!(w.scale(), 0.5);

        // (Σ (A12 A21 + A11 A12 A21))² / 2
        let right = Cuboid::from_signs((1, 1), &[1], &[]);
        let w = cuboid_weight_vector(&right, 2, 2).unwrap();
        assert_eq!(w.terms(), vec![(lam(&[2], &[1]), 1), (lam(&[1, 2], &[1]), 1)]);
        assert_eq!(w.scale(), 0.5);
    }

    #[test]
    fn weight_depth_overflow() {
        let c = Cuboid::from_signs((1, 1), &[1, 1], &[]);
        assert_eq!(cuboid_weight_vector(&c, 2, 2), Err(Error::DepthOverflow { needed: 3, available: 2 }));
    }

    #[test]
    fn weight_and_count_paths_agree() {
        let n = 40;
        let xs: Vec<f64> = (0..n).map(|i| ((i * 23 + 1) % 41) as f64).collect();
        let ys: Vec<f64> = (0..n).map(|i| ((i * 7 + 4) % 43) as f64).collect();
        let (xc, yc) = (rank_to_copula(&xs).unwrap(), rank_to_copula(&ys).unwrap());
        let basis = Basis::new(4, 4).unwrap();
        let s = SymmetryVector::from_copula(&xc, &yc, basis).unwrap();
        assert_eq!(s.sums[0], n as i64);
        for c in crate::multifit::enumerate_cuboids(1, 1, 3) {
            let w = cuboid_weight_vector(&c, 4, 4).unwrap();
            let (num, e) = w.quadratic_form_exact(&s).unwrap();
            let t = cuboid_table(&xc, &yc, &c).unwrap();
            assert_eq!(num, count_path_statistic(&c, &t) << (-e), "{c:?}");
        }
    }

    #[test]
    fn max_statistic_examples() {
        let basis = Basis::new(1, 1).unwrap();
        let w = WeightMatrix { basis, coefficients: vec![0, 0, 0, 1], scale_log2: 0 };
        let s = SymmetryVector { basis, sums: vec![5, 1, -1, 3], n: 5 };
        assert_eq!(max_quadratic_statistic(&s, std::slice::from_ref(&w)).unwrap(), (9.0, 0));
        let null = SymmetryVector { basis, sums: vec![5, 0, 0, 0], n: 5 };
        assert_eq!(max_quadratic_statistic(&null, &[w.clone(), w.clone()]).unwrap(), (0.0, 0));
        let other = SymmetryVector { basis: Basis::new(2, 1).unwrap(), sums: vec![0; 8], n: 5 };
        assert!(matches!(max_quadratic_statistic(&other, &[w]), Err(Error::BasisMismatch { .. })));
        assert!(max_quadratic_statistic(&s, &[]).is_err());
    }

    #[test]
    fn favorability_examples() {
        let w = cuboid_weight_vector(&Cuboid::from_signs((1, 1), &[1], &[]), 2, 2).unwrap();
        let mu: Vec<f64> = w.coefficients.iter().map(|&c| 0.3 * c as f64).collect();
        let d = analyze_weight_favorability(&w, &mu).unwrap();
        assert!((d.alignment - 1.0).abs() < 1e-12);
        assert_eq!(d.top_eigenvalue, 1.0);

        let mut ortho = vec![0.0; 16];
        ortho[w.basis.index(lam(&[1], &[1])).unwrap()] = 1.0;
        assert_eq!(analyze_weight_favorability(&w, &ortho).unwrap().alignment, 0.0);

        let d = analyze_weight_favorability(&w, &[0.0; 16]).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.alignment, 0.0);
        assert!(analyze_weight_favorability(&w, &[0.0; 3]).is_err());
    }

    #[test]
    fn basis_indexing() {
        let b = Basis::new(2, 3).unwrap();
        assert_eq!(b.len(), 32);
        for (i, l) in b.lambdas().enumerate() {
            assert_eq!(b.index(l), Some(i));
        }
        assert_eq!(b.index(lam(&[3], &[1])), None);
        assert!(Basis::new(0, 2).is_err());
    }
}
