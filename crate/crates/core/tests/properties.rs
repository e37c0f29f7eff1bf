use ebnull_core::dist::{skew_normal_cdf, std_normal_cdf, std_normal_quantile, SkewNormalParams};
use ebnull_core::procedures::{bh, c_storey_bh, d_storey_bh, storey_bh};
use ebnull_core::pvalue::{conditional_pvalues, PValueKind, PValueVector};
use proptest::prelude::*;

fn pvalues() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![0.0..0.05f64, 0.0..=1.0f64], 1..60)
}

fn pv(values: &[f64]) -> PValueVector {
    PValueVector::new(values.to_vec(), PValueKind::Standard).unwrap()
}

proptest! {
    #[test]
    fn bh_is_monotone_in_q(p in pvalues(), q1 in 0.01..0.5f64, dq in 0.0..0.4f64) {
        let pv = pv(&p);
        let small = bh(&pv, q1).unwrap().rejected;
        let large = bh(&pv, q1 + dq).unwrap().rejected;
        prop_assert!(small.iter().all(|i| large.contains(i)));
    }

    #[test]
    fn rejected_set_is_threshold_set(p in pvalues(), q in 0.01..0.5f64) {
        let pv = pv(&p);
        for r in [bh(&pv, q).unwrap(), storey_bh(&pv, q, 0.5).unwrap(), d_storey_bh(&pv, q, 0.25, 0.5).unwrap()] {
            let expected: Vec<usize> = if r.rejected.is_empty() {
                vec![]
            } else {
                (0..p.len()).filter(|&i| p[i] <= r.threshold).collect()
            };
            prop_assert_eq!(&r.rejected, &expected);
        }
    }

    #[test]
    fn capped_storey_equals_bh(p in prop::collection::vec(0.0..=1.0f64, 1..40), q in 0.01..0.5f64) {
        // Enough mass above λ forces the capped estimate to 1.
        let mut p = p;
        let m = p.len();
        p.extend(std::iter::repeat_n(0.99, m));
        let pv = pv(&p);
        let st = storey_bh(&pv, q, 0.5).unwrap();
        prop_assert_eq!(st.pi0_hat, 1.0);
        prop_assert_eq!(st.rejected, bh(&pv, q).unwrap().rejected);
    }

    #[test]
    fn conditioned_procedures_stay_below_tau(p in pvalues(), q in 0.01..0.5f64, tau in 0.3..=1.0f64) {
        let pv = pv(&p);
        let c = c_storey_bh(&pv, q, tau, 0.5).unwrap();
        prop_assert!(c.rejected.iter().all(|&i| p[i] <= tau));
        let d = d_storey_bh(&pv, q, 0.25, tau).unwrap();
        prop_assert!(d.threshold <= tau);
        prop_assert!(d.rejected.iter().all(|&i| p[i] <= tau));
    }

    #[test]
    fn conditional_pvalues_are_probabilities(p in pvalues(), tau in 0.01..=1.0f64) {
        let c = conditional_pvalues(&pv(&p), tau).unwrap();
        prop_assert!(c.values().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert_eq!(c.n_hypotheses(), p.len());
        for (&v, &i) in c.values().iter().zip(c.source_indices()) {
            prop_assert!(p[i] <= tau);
            prop_assert_eq!(v, p[i] / tau);
        }
    }

    #[test]
    fn normal_cdf_is_monotone(x in -40.0..40.0f64, dx in 0.0..2.0f64) {
        let (a, b) = (std_normal_cdf(x), std_normal_cdf(x + dx));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(a <= b);
    }

    #[test]
    fn quantile_inverts_cdf(u in 1e-8..(1.0 - 1e-8)) {
        let x = std_normal_quantile(u).unwrap();
        prop_assert!((std_normal_cdf(x) - u).abs() <= 1e-9);
    }

    #[test]
    fn skew_normal_cdf_is_monotone(x in -15.0..8.0f64, dx in 0.0..1.0f64, sigma0 in 0.01..10.0f64) {
        let params = SkewNormalParams::from_sigma0(sigma0).unwrap();
        let (a, b) = (skew_normal_cdf(x, &params), skew_normal_cdf(x + dx, &params));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(a <= b + 1e-15);
    }
}
