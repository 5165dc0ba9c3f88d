//! Randomized algebra and oracle properties.

use holoeq_core::deformed::{cluster, ThresholdRule};
use holoeq_core::graded_algebra::{all_labels, contract, wedge, AlgebraElement, TangentVector};
use holoeq_core::oracle::{cp1_table, kunneth, torus_table, OracleTable};
use holoeq_core::{ExactScalar, GaussRational};
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = ExactScalar> {
    (-3i64..=3, -3i64..=3, -2i64..=2, -2i64..=2)
        .prop_map(|(a, b, c, d)| ExactScalar::new(GaussRational::from_ints(a, b), GaussRational::from_ints(c, d)))
}

fn element(n: usize) -> impl Strategy<Value = AlgebraElement<ExactScalar>> {
    let labels = all_labels(n, 1);
    prop::collection::vec(scalar(), labels.len()).prop_map(move |coeffs| {
        let mut e = AlgebraElement::zero(n, 1);
        for (l, c) in labels.iter().zip(coeffs) {
            e.add_term(l.clone(), c);
        }
        e
    })
}

fn even_part(e: &AlgebraElement<ExactScalar>) -> AlgebraElement<ExactScalar> {
    e.filter(|l| l.form_degree() % 2 == 0)
}

fn odd_part(e: &AlgebraElement<ExactScalar>) -> AlgebraElement<ExactScalar> {
    e.filter(|l| l.form_degree() % 2 == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn contraction_is_an_antiderivation(a in element(2), b in element(2), c in prop::collection::vec(scalar(), 2), conj in any::<bool>()) {
        let u = TangentVector { components: c, conjugated: conj };
        let lhs = contract(&u, &wedge(&a, &b).unwrap()).unwrap();
        // split a by parity: i(u)(a∧b) = i(u)a∧b + (−1)^|a| a∧i(u)b
        let ib = contract(&u, &b).unwrap();
        let sign = ExactScalar::from_ratio(-1, 1);
        let rhs = wedge(&contract(&u, &a).unwrap(), &b).unwrap()
            .plus(&wedge(&even_part(&a), &ib).unwrap()).unwrap()
            .plus(&wedge(&odd_part(&a), &ib).unwrap().scale(&sign)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn contraction_squares_to_zero(a in element(2), c in prop::collection::vec(scalar(), 2), conj in any::<bool>()) {
        let u = TangentVector { components: c, conjugated: conj };
        prop_assert!(contract(&u, &contract(&u, &a).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn wedge_is_associative(a in element(1), b in element(1), c in element(1)) {
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn kunneth_is_commutative_up_to_transpose(k in 0i64..5) {
        let (a, b) = (cp1_table(k), torus_table());
        let ab = kunneth(&a, &b);
        let ba = kunneth(&b, &a);
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(kunneth(&a, &OracleTable::point()), a);
    }

    #[test]
    fn clustering_is_scale_invariant(kernel in 0usize..4, scale in 1e-3f64..1e3) {
        let mut ev: Vec<f64> = (0..kernel).map(|i| 1e-15 * i as f64).collect();
        ev.extend((1..=20).map(|i| i as f64));
        let scaled: Vec<f64> = ev.iter().map(|x| x * scale).collect();
        let rule = ThresholdRule::default();
        let (a, b) = (cluster(&ev, &rule), cluster(&scaled, &rule));
        prop_assert_eq!(a.kernel_count, kernel);
        prop_assert_eq!(b.kernel_count, kernel);
        prop_assert!(a.resolved && b.resolved);
    }
}
