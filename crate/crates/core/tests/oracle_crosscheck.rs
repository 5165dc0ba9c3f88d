//! Frozen Hodge fixtures against brute-force T = 0 kernel counts.

use holoeq_core::deformed::{assemble_deformed, hodge_kernel_counts, ThresholdRule};
use holoeq_core::model::{assemble, cp1_model, product_model, ModelManifold};
use holoeq_core::oracle::{fixture, kunneth, model_hodge_table, OracleTable};
use num_complex::Complex64;

fn spectral_table(model: &holoeq_core::model::AssembledModel) -> OracleTable {
    let op = assemble_deformed(model, 0.0).unwrap();
    let counts = hodge_kernel_counts(model, &op, &ThresholdRule::default()).unwrap();
    let mut table = OracleTable::zeros(model.dim);
    for ((p, q), c) in counts {
        assert!(c.resolved, "({p},{q}) unresolved, gap {}", c.gap);
        table.h[p][q] = c.kernel_count;
    }
    table
}

#[test]
fn every_fixture_entry_matches_its_spectral_count() {
    for entry in fixture::load().unwrap() {
        let model = match (entry.model.as_str(), entry.k) {
            ("torus", _) => assemble(&ModelManifold::torus_without_field(Complex64::new(0.0, 1.0), 3)).unwrap(),
            ("cp1", Some(k)) => cp1_model(k, 12).unwrap(),
            other => panic!("unexpected fixture entry {other:?}"),
        };
        assert_eq!(spectral_table(&model), entry.table, "{} k={:?}", entry.model, entry.k);
        assert_eq!(fixture::closed_form(&entry).unwrap(), entry.table);
    }
}

#[test]
fn product_hodge_table_is_the_kunneth_convolution() {
    let l = cp1_model(0, 6).unwrap();
    let r = assemble(&ModelManifold::torus_without_field(Complex64::new(0.2, 0.9), 2)).unwrap();
    let p = product_model(&l, &r).unwrap();
    let expected = model_hodge_table(&p.spec, true).unwrap();
    assert_eq!(expected, kunneth(&spectral_table(&l), &spectral_table(&r)));
    assert_eq!(spectral_table(&p), expected);
}

#[test]
fn bidegree_counts_need_the_undeformed_operator() {
    let m = cp1_model(0, 6).unwrap();
    let op = assemble_deformed(&m, 1.0).unwrap();
    assert!(hodge_kernel_counts(&m, &op, &ThresholdRule::default()).is_err());
}
