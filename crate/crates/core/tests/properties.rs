use bexdep::binex::{binary_bits, rank_to_copula, symmetry_statistic, BitMatrix, LambdaIndex};
use bexdep::exact::{adjust_pvalues, fisher_exact_2x2, Correction, PMethod, PValue, Table2x2};
use bexdep::multifit::{
    count_path_statistic, cuboid_table, cuboid_weight_vector, enumerate_cuboids, Basis, SymmetryVector,
};
use proptest::prelude::*;

fn distinct(v: Vec<i32>) -> Vec<f64> {
    // small integers plus a per-index offset keep ties rare but possible
    v.into_iter().enumerate().map(|(i, x)| x as f64 + i as f64 * 1e-3).collect()
}

proptest! {
    #[test]
    fn recombination_within_bound(u in -1.0f64..=1.0, depth in 1u32..=30) {
        prop_assume!(u > -1.0);
        let bits = binary_bits(u, depth).unwrap();
        let approx: f64 = bits.iter().enumerate().map(|(d, &a)| a as f64 / 2f64.powi(d as i32 + 1)).sum();
        prop_assert!((u - approx).abs() <= 2f64.powi(-(depth as i32)) + 1e-15);
    }

    #[test]
    fn copula_is_rank_invariant(raw in prop::collection::vec(-1000i32..1000, 2..80)) {
        let v = distinct(raw);
        let a = rank_to_copula(&v).unwrap();
        let b = rank_to_copula(&v.iter().map(|x| x.powi(3) + 2.0 * x).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a.values(), b.values());
        let n = v.len() as f64;
        prop_assert!(a.values().iter().all(|&u| u > -1.0 && u < 1.0));
        prop_assert!((a.values().iter().sum::<f64>()).abs() < 1e-9 * n);
    }

    #[test]
    fn symmetry_sums_have_parity_of_n(
        xs in prop::collection::vec(-500i32..500, 2..100),
        seed in any::<u64>(),
        xm in 1u32..16,
        ym in 1u32..16,
    ) {
        let x = distinct(xs);
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| (v * 1.7 + (seed >> (i % 60)) as f64).sin()).collect();
        let bx = BitMatrix::from_copula(&rank_to_copula(&x).unwrap(), 4).unwrap();
        let by = BitMatrix::from_copula(&rank_to_copula(&y).unwrap(), 4).unwrap();
        let s = symmetry_statistic(&bx, &by, LambdaIndex::new(xm, ym)).unwrap();
        prop_assert_eq!((s.s_sum - x.len() as i64).rem_euclid(2), 0);
        prop_assert!(s.s_sum.abs() <= x.len() as i64);
    }

    #[test]
    fn symmetry_stats_ignore_row_order(
        xs in prop::collection::vec(-500i32..500, 4..60),
        ys in prop::collection::vec(-500i32..500, 60),
        shift in 1usize..59,
    ) {
        let x = distinct(xs);
        let y: Vec<f64> = distinct(ys)[..x.len()].to_vec();
        let rot = |v: &[f64]| {
            let mut v = v.to_vec();
            let k = shift % v.len();
            v.rotate_left(k);
            v
        };
        let basis = Basis::new(3, 3).unwrap();
        let a = SymmetryVector::from_copula(&rank_to_copula(&x).unwrap(), &rank_to_copula(&y).unwrap(), basis).unwrap();
        let b = SymmetryVector::from_copula(&rank_to_copula(&rot(&x)).unwrap(), &rank_to_copula(&rot(&y)).unwrap(), basis).unwrap();
        prop_assert_eq!(a.sums, b.sums);
    }

    #[test]
    fn quadratic_form_matches_count_path(
        xs in prop::collection::vec(-500i32..500, 8..70),
        ys in prop::collection::vec(-500i32..500, 70),
    ) {
        let x = distinct(xs);
        let y = distinct(ys)[..x.len()].to_vec();
        let (xc, yc) = (rank_to_copula(&x).unwrap(), rank_to_copula(&y).unwrap());
        let s = SymmetryVector::from_copula(&xc, &yc, Basis::new(3, 3).unwrap()).unwrap();
        for c in enumerate_cuboids(1, 1, 2) {
            let counted = count_path_statistic(&c, &cuboid_table(&xc, &yc, &c).unwrap());
            let (num, e) = cuboid_weight_vector(&c, 3, 3).unwrap().quadratic_form_exact(&s).unwrap();
            prop_assert_eq!(counted << (-e) as u32, num);
        }
    }

    #[test]
    fn fisher_p_is_a_probability(a in 0u64..40, b in 0u64..40, c in 0u64..40, d in 0u64..40) {
        let p = fisher_exact_2x2(Table2x2::new(a, b, c, d)).value;
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
        let t = fisher_exact_2x2(Table2x2::new(a, c, b, d)).value;
        prop_assert!((p - t).abs() <= 1e-12);
        let flipped = fisher_exact_2x2(Table2x2::new(b, a, d, c)).value;
        prop_assert!((p - flipped).abs() <= 1e-12);
    }

    #[test]
    fn adjustments_are_ordered(raw in prop::collection::vec(0.0f64..=1.0, 1..40), extra in 0usize..20) {
        let ps: Vec<PValue> = raw.iter().map(|&v| PValue::new(v, PMethod::FisherTwoSided)).collect();
        let total = ps.len() + extra;
        let bon = adjust_pvalues(&ps, Correction::Bonferroni, total).unwrap();
        let holm = adjust_pvalues(&ps, Correction::Holm, total).unwrap();
        for i in 0..ps.len() {
            let (pb, ph) = (bon[i].effective(), holm[i].effective());
            prop_assert!(ph <= pb + 1e-15);
            prop_assert!(ph >= ps[i].value - 1e-15 && pb <= 1.0);
        }
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                if ps[i].value <= ps[j].value {
                    prop_assert!(holm[i].effective() <= holm[j].effective() + 1e-15);
                }
            }
        }
    }
}
