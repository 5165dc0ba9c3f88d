//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use holoeq_core::deformed::{
    assemble_deformed, bochner_check, graded_euler, spectra, t_sweep, CohomologyTable, ThresholdRule,
};
use holoeq_core::graded_algebra::{golden, identities};
use holoeq_core::local_model::{
    beta_state, fixture, isometry_check, isometry_inner, oscillator_galerkin, oscillator_galerkin_dense,
    oscillator_spectrum_analytic, CutoffProfile, OscillatorModel,
};
use holoeq_core::model::{assemble, cp1_model, product_model, AssembledModel, ModelManifold};
use holoeq_core::oracle::{theorem1_prediction, undeformed_prediction};
use num_complex::Complex64;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let rep = identities::run(2).map_err(err)?;
    ensure!(rep.failures.is_empty(), "{} identity failures, first: {}", rep.failures.len(), rep.failures[0]);
    ensure!(rep.mirror_gap <= 1e-12, "float mirror differs by {:e}", rep.mirror_gap);
    let problems = golden::verify().map_err(err)?;
    ensure!(problems.is_empty(), "golden table: {}", problems.join("; "));
    let rows = golden::load().map_err(err)?.entries.len();
    Ok(format!("{} exact identities on n<=2, golden n=1 table ({rows} rows) verified, float mirror {:.1e}", rep.checks, rep.mirror_gap))
}

fn tau_square() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn tau_skew() -> Complex64 {
    Complex64::new(0.3, 1.1)
}

fn criterion_2() -> Outcome {
    let mut worst_torus: f64 = 0.0;
    for (tau, c) in [(tau_square(), Complex64::new(1.0, 0.0)), (tau_skew(), Complex64::new(0.5, -0.7))] {
        let m = assemble(&ModelManifold::torus(tau, 3, c)).map_err(err)?;
        for t in [0.0, 1.0, 4.0] {
            worst_torus = worst_torus.max(assemble_deformed(&m, t).map_err(err)?.complex_defect);
        }
    }
    ensure!(worst_torus <= 1e-12, "torus dbar_T^2 = {worst_torus:e}");
    let mut cp1_report = Vec::new();
    for k in 0..4 {
        let m = cp1_model(k, 12).map_err(err)?;
        let leak = m.leakage.max_norm();
        let mut worst: f64 = 0.0;
        for t in [0.0, 1.0, 4.0] {
            worst = worst.max(assemble_deformed(&m, t).map_err(err)?.complex_defect);
        }
        ensure!(worst <= leak, "cp1 k={k}: dbar_T^2 = {worst:e} exceeds leakage {leak:e}");
        cp1_report.push(format!("k={k}:{worst:.0e}<={leak:.3}"));
    }
    Ok(format!("torus max {worst_torus:.1e}; cp1 N=12 {}", cp1_report.join(" ")))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for (tau, c) in [(tau_square(), Complex64::new(1.0, 0.0)), (tau_skew(), Complex64::new(0.5, -0.7))] {
        let m = assemble(&ModelManifold::torus(tau, 3, c)).map_err(err)?;
        for t in [1.0, 4.0] {
            worst = worst.max(bochner_check(&m, t).map_err(err)?.max);
        }
    }
    ensure!(worst <= 1e-11, "torus Bochner residual {worst:e}");
    let m = cp1_model(0, 12).map_err(err)?;
    let leak = m.leakage.max_norm();
    let res = bochner_check(&m, 1.0).map_err(err)?;
    ensure!(res.max <= 10.0 * leak, "cp1 Bochner residual {:e} > 10 x leakage {leak:e}", res.max);
    Ok(format!("torus {worst:.1e}; cp1 k=0 N=12 T=1 residual {:.3} <= 10 x {leak:.3}", res.max))
}

fn criterion_4() -> Outcome {
    let m = assemble(&ModelManifold::torus(tau_square(), 3, Complex64::new(1.0, 0.0))).map_err(err)?;
    let sweep = t_sweep(&m, &[1.0, 2.0, 4.0], &ThresholdRule::default()).map_err(err)?;
    for table in &sweep.tables {
        ensure!(table.dims.values().all(|&d| d == 0), "nonzero kernel {:?}", table.dims);
    }
    let mut ratios = Vec::new();
    for (t, g) in &sweep.growth {
        ensure!((g - 2.0).abs() <= 0.02, "lambda_min/T^2 = {g} at T = {t}");
        ratios.push(format!("{g:.6}"));
    }
    ensure!(ratios.len() == 3, "growth rows missing");
    Ok(format!("all kernels 0; lambda_min/T^2 = [{}]", ratios.join(", ")))
}

fn criterion_5() -> Outcome {
    let a = fixture::gap_constant().map_err(err)?;
    let mut lines = Vec::new();
    for m in [1usize, 2] {
        let mut gaps = Vec::new();
        for t in [1.0, 10.0] {
            let model = OscillatorModel::new(m, t, 12).map_err(err)?;
            let g = oscillator_galerkin(&model).map_err(err)?;
            ensure!(g.kernel_dim == 1 && g.resolved, "m={m} T={t}: kernel {} (resolved {})", g.kernel_dim, g.resolved);
            ensure!(g.eigenvalues[0].abs() <= 1e-10 * t, "m={m} T={t}: lowest eigenvalue {:e}", g.eigenvalues[0]);
            ensure!(g.kernel_overlap >= 1.0 - 1e-8, "m={m} T={t}: overlap {}", g.kernel_overlap);
            ensure!(g.min_nonzero >= a * t * (1.0 - 1e-8), "m={m} T={t}: gap {} < A T", g.min_nonzero);
            ensure!((g.gap_over_t - a).abs() <= 1e-8 * a, "m={m} T={t}: gap/T {} vs A {a}", g.gap_over_t);
            let analytic = oscillator_spectrum_analytic(&model).map_err(err)?;
            ensure!(analytic.kernel_dim == 1 && analytic.gap_constant == a, "analytic spectrum disagrees with A");
            // every level below the completeness bound, with multiplicity
            let mut cursor = 0;
            for level in &analytic.levels {
                for _ in 0..level.multiplicity {
                    let got = g.eigenvalues[cursor];
                    ensure!((got - level.value).abs() <= 1e-8 * t.max(level.value), "m={m} T={t}: {got} vs level {}", level.value);
                    cursor += 1;
                }
            }
            ensure!(g.eigenvalues[cursor] >= analytic.bound - 1e-8 * analytic.bound, "extra Galerkin eigenvalue below the bound");
            let state = beta_state(&model).map_err(err)?;
            ensure!(state.galerkin_residual <= 1e-9 * t, "m={m} T={t}: |H beta| = {:e}", state.galerkin_residual);
            gaps.push(g.gap_over_t);
        }
        ensure!((gaps[0] - gaps[1]).abs() <= 1e-8 * gaps[0], "m={m}: gap/T varies {gaps:?}");
        lines.push(format!("m={m} gap/T={:.12}", gaps[0]));
    }
    let dense = oscillator_galerkin_dense(&OscillatorModel::new(1, 1.0, 12).map_err(err)?).map_err(err)?;
    ensure!(dense.kernel_dim == 1 && dense.kernel_overlap >= 1.0 - 1e-8, "dense m=1 cutoff 12: kernel {} overlap {}", dense.kernel_dim, dense.kernel_overlap);
    ensure!((dense.gap_over_t - a).abs() <= 1e-8 * a, "dense gap/T {}", dense.gap_over_t);
    let dense2 = oscillator_galerkin_dense(&OscillatorModel::new(2, 10.0, 3).map_err(err)?).map_err(err)?;
    ensure!(dense2.kernel_dim == 1 && (dense2.gap_over_t - a).abs() <= 1e-8 * a, "dense m=2 cutoff 3: kernel {} gap/T {}", dense2.kernel_dim, dense2.gap_over_t);
    Ok(format!("A = {a}; {}; dense brute force (576, 1296) agrees", lines.join("; ")))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for m in [1usize, 2] {
        let profile = CutoffProfile::new(1.0, m, 100.0).map_err(err)?;
        let target = 0.5f64.powi(m as i32);
        let scaled = profile.scaled_alpha();
        ensure!((scaled - target).abs() <= 2e-3 * target, "m={m}: alpha T^m = {scaled}");
        parts.push(format!("m={m} alpha*T^m={scaled:.10}"));
    }
    let cases = [(1usize, 50.0), (2, 100.0), (2, 5.0)];
    let mut worst: f64 = 0.0;
    for (m, t) in cases {
        let model = OscillatorModel::new(m, t, 4).map_err(err)?;
        let profile = CutoffProfile::new(1.0, m, t).map_err(err)?;
        let u1 = [Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.8)];
        let u2 = [Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)];
        worst = worst.max(isometry_check(&model, &profile, &u1).map_err(err)?);
        worst = worst.max(isometry_check(&model, &profile, &[Complex64::new(0.0, 0.0); 2]).map_err(err)?);
        let cross = isometry_inner(&model, &profile, &u1, &u2).map_err(err)?;
        let expected: Complex64 = u1.iter().zip(&u2).map(|(a, b)| a * b.conj()).sum();
        worst = worst.max((cross - expected).norm());
    }
    ensure!(worst <= 1e-9, "isometry defect {worst:e}");
    Ok(format!("{}; isometry defect {worst:.1e}", parts.join(", ")))
}

fn counts(table: &CohomologyTable) -> Vec<usize> {
    table.dims.values().copied().collect()
}

fn criterion_7() -> Outcome {
    let rule = ThresholdRule::default();
    let mut min_gap_t8 = f64::INFINITY;
    for k in 0..4 {
        let m = cp1_model(k, 12).map_err(err)?;
        let prediction = theorem1_prediction(&m.spec).map_err(err)?;
        ensure!(counts(&prediction) == vec![0, 2, 0], "oracle prediction {:?}", prediction.dims);
        let undeformed = undeformed_prediction(&m.spec).map_err(err)?;
        let sweep = t_sweep(&m, &[0.0, 2.0, 4.0, 8.0], &rule).map_err(err)?;
        ensure!(sweep.tables[0].same_dims(&undeformed), "k={k}: T=0 counts {:?} vs oracle {:?}", sweep.tables[0].dims, undeformed.dims);
        for table in &sweep.tables[1..] {
            ensure!(table.is_resolved(), "k={k}: unresolved degrees {:?}", table.unresolved);
            ensure!(table.same_dims(&prediction), "k={k}: counts {:?}", table.dims);
        }
        let (_, sp8) = sweep.spectra.last().expect("T=8 present");
        for s in sp8 {
            ensure!(s.gap >= 1e3, "k={k} r={} gap ratio {:e} at T=8", s.degree, s.gap);
            min_gap_t8 = min_gap_t8.min(s.gap);
        }
    }
    Ok(format!("k=0..3, N=12, T in {{2,4,8}}: (0,2,0) resolved; min gap ratio at T=8 {min_gap_t8:.1e}"))
}

fn product() -> Result<AssembledModel, String> {
    let l = cp1_model(0, 8).map_err(err)?;
    let r = assemble(&ModelManifold::torus_without_field(tau_square(), 4)).map_err(err)?;
    product_model(&l, &r).map_err(err)
}

fn criterion_8() -> Outcome {
    let p = product()?;
    let block = p.sectors.iter().flat_map(|s| s.bases.iter().map(|b| b.len())).max().unwrap_or(0);
    ensure!(block <= 4096, "block size {block}");
    let prediction = theorem1_prediction(&p.spec).map_err(err)?;
    let sweep = t_sweep(&p, &[4.0, 8.0], &ThresholdRule::default()).map_err(err)?;
    for table in &sweep.tables {
        ensure!(table.is_resolved(), "unresolved {:?}", table.unresolved);
        ensure!(table.same_dims(&prediction), "counts {:?} vs {:?}", table.dims, prediction.dims);
    }
    Ok(format!("counts {:?} at T=4,8 match Kunneth oracle; largest block {block}", counts(&sweep.tables[0])))
}

fn criterion_9() -> Outcome {
    let rule = ThresholdRule::default();
    let mut rows = Vec::new();
    let closed = [
        ModelManifold::torus(tau_square(), 3, Complex64::new(1.0, 0.0)),
        ModelManifold::torus(tau_skew(), 2, Complex64::new(0.5, -0.7)),
        ModelManifold::torus_without_field(tau_skew(), 2),
    ];
    for spec in &closed {
        let m = assemble(spec).map_err(err)?;
        ensure!(m.is_truncation_closed(), "{} is not truncation-closed", spec.tag());
        let mut euler = BTreeMap::new();
        for t in [0.0, 1.0, 3.0] {
            let op = assemble_deformed(&m, t).map_err(err)?;
            let table = CohomologyTable::from_spectra(&spec.tag(), t, rule, &spectra(&op, &rule, Some(1)).map_err(err)?);
            ensure!(table.is_resolved(), "{} T={t} unresolved", spec.tag());
            euler.insert(format!("{t}"), graded_euler(&table));
        }
        let base = euler["0"];
        ensure!(euler.values().all(|&e| e == base), "{}: euler {euler:?}", spec.tag());
        rows.push(format!("{}: {base}", spec.tag()));
    }
    Ok(rows.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome, Duration); 9] = [
        ("1", "algebra identities", criterion_1, Duration::from_secs(5)),
        ("2", "complex property", criterion_2, Duration::from_secs(30)),
        ("3", "Bochner identity", criterion_3, Duration::from_secs(60)),
        ("4", "vanishing for empty zero set", criterion_4, Duration::from_secs(30)),
        ("5", "local model", criterion_5, Duration::from_secs(120)),
        ("6", "normalizations and isometry", criterion_6, Duration::from_secs(30)),
        ("7", "point zero set on CP1", criterion_7, Duration::from_secs(300)),
        ("8", "positive-dimensional zero set", criterion_8, Duration::from_secs(900)),
        ("9", "index invariance", criterion_9, Duration::from_secs(10)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let verdict = match &outcome {
            Ok(_) if elapsed > budget => {
                failed += 1;
                "FAIL"
            }
            Ok(_) => "PASS",
            Err(_) => {
                failed += 1;
                "FAIL"
            }
        };
        let detail = match outcome {
            Ok(d) if elapsed > budget => format!("{d} (over budget {budget:?})"),
            Ok(d) => d,
            Err(e) => e,
        };
        println!("[{verdict}] criterion {id} {name} ({:.2} s): {detail}", elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all criteria passed");
        ExitCode::SUCCESS
    }
}
