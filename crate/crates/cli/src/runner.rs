//! Executes the experiments of a config and assembles the report.

use std::path::Path;

use holoeq_core::deformed::{
    bochner_check, graded_euler, spectra_report, t_sweep, write_spectra_csv, CohomologyTable, SweepResult, ThresholdRule,
};
use holoeq_core::graded_algebra::{golden, identities};
use holoeq_core::local_model::{fixture, isometry_check, local_trajectory, write_local_csv, CutoffProfile, LocalRow, OscillatorModel};
use holoeq_core::model::export::export_blocks;
use holoeq_core::model::{assemble, AssembledModel, ModelManifold, VectorFieldSpec};
use holoeq_core::oracle::{theorem1_prediction, undeformed_prediction, zero_set};
use log::{debug, info};
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format, OscillatorExperiment, SweepExperiment};
use crate::report::{
    emit_plotdata, write_atomic, Cell, CellData, ExperimentRecord, Provenance, Report, Status, Verdict, Versions,
    REPORT_FILE, REPORT_SCHEMA,
};
use crate::error::Result;

/// Eigenvalues kept per (T, r) cell.
const KEEP: usize = 8;
const CLOSED_DEFECT: f64 = 1e-12;
const CLOSED_BOCHNER: f64 = 1e-11;
const ISOMETRY_TOL: f64 = 1e-9;
const ALPHA_TOL: f64 = 2e-3;
/// α_T·Tᵐ is compared with 2⁻ᵐ only once T·ε² reaches this.
const ALPHA_REGIME: f64 = 50.0;

#[derive(Clone, Copy, Debug)]
pub struct Selection {
    pub algebra: bool,
    pub sweeps: bool,
    pub oscillators: bool,
}

impl Selection {
    pub const ALL: Selection = Selection { algebra: true, sweeps: true, oscillators: true };
}

/// A file to write, relative to the output directory.
pub struct Artifact {
    pub path: String,
    pub bytes: Vec<u8>,
}

pub struct RunOutput {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

struct Outcome {
    record: ExperimentRecord,
    verdicts: Vec<Verdict>,
    artifacts: Vec<Artifact>,
}

fn sanitize(tag: &str) -> String {
    let s: String = tag.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect();
    s.trim_matches('_').to_string()
}

fn verdict(criterion: &str, experiment: &str, status: Status, detail: String, provenance: Vec<Provenance>) -> Verdict {
    Verdict { criterion: criterion.into(), experiment: experiment.into(), status, detail, provenance }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pure part of a run: computes everything, writes nothing.
pub fn execute(config: &ExperimentConfig, config_bytes: &[u8], selection: Selection) -> RunOutput {
    let rule = config.threshold;
    let mut outcomes = Vec::new();
    if selection.algebra {
        if let Some(a) = &config.algebra {
            outcomes.push(run_algebra(a.max_n, &rule));
        }
    }
    if selection.sweeps {
        for s in &config.sweeps {
            info!("sweep {}", s.id);
            outcomes.push(run_sweep(s, &rule, config));
        }
    }
    if selection.oscillators {
        for o in &config.oscillators {
            info!("oscillator {}", o.id);
            outcomes.push(run_oscillator(o, &rule, config));
        }
    }
    let mut experiments = Vec::new();
    let mut verdicts = Vec::new();
    let mut artifacts = Vec::new();
    for o in outcomes {
        experiments.push(o.record);
        verdicts.extend(o.verdicts);
        artifacts.extend(o.artifacts);
    }
    let (summary, worst) = Report::summarize(&verdicts);
    let report = Report {
        schema: REPORT_SCHEMA.into(),
        name: config.name.clone(),
        config_hash: config_hash(config_bytes),
        versions: Versions { holoeq_core: holoeq_core::VERSION.into(), holoeq_lab: env!("CARGO_PKG_VERSION").into() },
        threshold: rule,
        experiments,
        verdicts,
        summary,
        worst,
    };
    RunOutput { report, artifacts }
}

/// Writes the artifacts, the report and (if requested) the plot data.
pub fn write_output(config: &ExperimentConfig, out: &RunOutput, dir: &Path) -> Result<()> {
    for a in &out.artifacts {
        write_atomic(&dir.join(&a.path), &a.bytes)?;
    }
    let mut json = serde_json::to_vec_pretty(&out.report).expect("report serializes");
    json.push(b'\n');
    write_atomic(&dir.join(REPORT_FILE), &json)?;
    if config.wants(Format::Plot) {
        emit_plotdata(&out.report, dir)?;
    }
    Ok(())
}

fn run_algebra(max_n: usize, rule: &ThresholdRule) -> Outcome {
    let provenance = Provenance { model: format!("exterior(n<={max_n})"), cutoff: 0, t: None, threshold: *rule };
    let result = identities::run(max_n).map_err(|e| e.to_string()).and_then(|rep| {
        let problems = golden::verify().map_err(|e| e.to_string())?;
        let rows = golden::load().map_err(|e| e.to_string())?.entries.len();
        Ok((rep, problems, rows))
    });
    let (data, status, detail) = match result {
        Ok((rep, problems, rows)) => {
            let ok = rep.passed() && problems.is_empty();
            let mut detail = format!("{} exact identities, float mirror {:.1e}, golden table {rows} rows", rep.checks, rep.mirror_gap);
            if let Some(first) = rep.failures.first().or(problems.first()) {
                detail.push_str(&format!("; first failure: {first}"));
            }
            let data = CellData::Identities {
                checks: rep.checks,
                failures: rep.failures.len() + problems.len(),
                mirror_gap: rep.mirror_gap,
                golden_rows: rows,
            };
            (data, pass_if(ok), detail)
        }
        Err(message) => (CellData::Error { message: message.clone() }, Status::Unresolved, message),
    };
    Outcome {
        record: ExperimentRecord {
            id: "algebra".into(),
            kind: "algebra".into(),
            cells: vec![Cell { provenance: provenance.clone(), data }],
            artifacts: vec![],
        },
        verdicts: vec![verdict("1", "algebra", status, detail, vec![provenance])],
        artifacts: vec![],
    }
}

/// Criterion checked against the oracle tables, picked by the zero set.
fn theorem_criterion(model: &ModelManifold) -> Option<&'static str> {
    let y = zero_set(model).ok()?;
    if y.is_empty() {
        Some("4")
    } else if model.field == VectorFieldSpec::Zero {
        None
    } else if y.components.iter().all(|c| c.dim == 0) {
        Some("7")
    } else {
        Some("8")
    }
}

struct ModelRun<'a> {
    exp: &'a SweepExperiment,
    rule: &'a ThresholdRule,
    model: &'a ModelManifold,
    cells: Vec<Cell>,
    verdicts: Vec<Verdict>,
}

impl ModelRun<'_> {
    fn prov(&self, t: Option<f64>) -> Provenance {
        Provenance { model: self.model.tag(), cutoff: self.model.cutoff, t, threshold: *self.rule }
    }

    fn cell(&mut self, t: Option<f64>, data: CellData) {
        let provenance = self.prov(t);
        self.cells.push(Cell { provenance, data });
    }

    fn judge(&mut self, criterion: &str, status: Status, detail: String, ts: &[Option<f64>]) {
        let provenance = ts.iter().map(|t| self.prov(*t)).collect();
        let detail = format!("{}: {detail}", self.model.tag());
        self.verdicts.push(verdict(criterion, &self.exp.id, status, detail, provenance));
    }

    fn criteria(&self) -> Vec<&'static str> {
        let mut out = vec!["2"];
        if !self.model.is_product() {
            out.push("3");
        }
        out.extend(theorem_criterion(self.model));
        out.push("9");
        out
    }

    fn all_unresolved(&mut self, message: &str) {
        let ts: Vec<Option<f64>> = self.exp.t_values.iter().map(|t| Some(*t)).collect();
        for c in self.criteria() {
            self.judge(c, Status::Unresolved, message.to_string(), &ts);
        }
    }
}

fn merge(parts: &[SweepResult]) -> SweepResult {
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        out.tables.extend(p.tables.iter().cloned());
        out.spectra.extend(p.spectra.iter().cloned());
        out.points.extend(p.points.iter().cloned());
        out.ambiguous.extend(p.ambiguous.iter().cloned());
        out.growth.extend(p.growth.iter().cloned());
        out.complex_defects.extend(p.complex_defects.iter().cloned());
    }
    out
}

fn run_sweep(exp: &SweepExperiment, rule: &ThresholdRule, config: &ExperimentConfig) -> Outcome {
    let mut record = ExperimentRecord { id: exp.id.clone(), kind: "sweep".into(), cells: vec![], artifacts: vec![] };
    let mut verdicts = Vec::new();
    let mut artifacts = Vec::new();
    for model in exp.models() {
        let mut run = ModelRun { exp, rule, model: &model, cells: vec![], verdicts: vec![] };
        match assemble(&model) {
            Err(e) => {
                let message = format!("assembly failed: {e}");
                run.cell(None, CellData::Error { message: message.clone() });
                run.all_unresolved(&message);
            }
            Ok(am) => {
                let parts: Vec<(f64, std::result::Result<SweepResult, String>)> = exp
                    .t_values
                    .par_iter()
                    .map(|&t| (t, t_sweep(&am, &[t], rule).map_err(|e| e.to_string())))
                    .collect();
                sweep_verdicts(&mut run, &am, &parts);
                let ok: Vec<SweepResult> = parts.iter().filter_map(|(_, r)| r.as_ref().ok().cloned()).collect();
                let stem = format!("{}/{}", sanitize(&exp.id), sanitize(&model.tag()));
                if !ok.is_empty() {
                    let sweep = merge(&ok);
                    if config.wants(Format::Csv) {
                        let mut bytes = Vec::new();
                        write_spectra_csv(&mut bytes, &model, &sweep).expect("in-memory write");
                        artifacts.push(Artifact { path: format!("{stem}.spectra.csv"), bytes });
                    }
                    if config.wants(Format::Json) {
                        let report = spectra_report(&model, rule, &sweep, KEEP);
                        let mut bytes = serde_json::to_vec_pretty(&report).expect("spectra serialize");
                        bytes.push(b'\n');
                        artifacts.push(Artifact { path: format!("{stem}.spectra.json"), bytes });
                    }
                }
                if config.wants(Format::Blocks) {
                    let mut bytes = serde_json::to_vec(&export_blocks(&am, None)).expect("blocks serialize");
                    bytes.push(b'\n');
                    artifacts.push(Artifact { path: format!("{stem}.blocks.json"), bytes });
                }
            }
        }
        record.cells.extend(run.cells);
        verdicts.extend(run.verdicts);
    }
    record.artifacts = artifacts.iter().map(|a| a.path.clone()).collect();
    Outcome { record, verdicts, artifacts }
}

fn counts(table: &CohomologyTable) -> String {
    let v: Vec<String> = table.dims.values().map(|d| d.to_string()).collect();
    format!("({})", v.join(","))
}

fn sweep_verdicts(run: &mut ModelRun, am: &AssembledModel, parts: &[(f64, std::result::Result<SweepResult, String>)]) {
    let closed = am.is_truncation_closed();
    let leak = am.leakage.max_norm();
    let all_ts: Vec<Option<f64>> = parts.iter().map(|(t, _)| Some(*t)).collect();
    let errors: Vec<String> = parts.iter().filter_map(|(t, r)| r.as_ref().err().map(|e| format!("T={t}: {e}"))).collect();

    for (t, r) in parts {
        match r {
            Err(e) => run.cell(Some(*t), CellData::Error { message: e.clone() }),
            Ok(s) => {
                let bound = if closed { CLOSED_DEFECT } else { leak };
                run.cell(Some(*t), CellData::ComplexDefect { value: s.complex_defects[0].1, bound });
                for sp in &s.spectra[0].1 {
                    run.cell(
                        Some(*t),
                        CellData::Spectrum {
                            degree: sp.degree,
                            dimension: sp.dimension,
                            kernel_count: sp.kernel_count,
                            gap_ratio: sp.gap.is_finite().then_some(sp.gap),
                            resolved: sp.resolved,
                            lowest: sp.eigenvalues.iter().take(KEEP).copied().collect(),
                        },
                    );
                }
                for &(_, ratio) in &s.growth {
                    run.cell(Some(*t), CellData::Growth { lambda_min: ratio * t * t, ratio });
                }
            }
        }
    }
    let ok: Vec<(f64, &SweepResult)> = parts.iter().filter_map(|(t, r)| r.as_ref().ok().map(|s| (*t, s))).collect();
    let unresolved_suffix = if errors.is_empty() { String::new() } else { format!("; solver errors: {}", errors.join("; ")) };

    // ∂̄_T² = 0 up to the truncation leakage.
    let bound = if closed { CLOSED_DEFECT } else { leak };
    let worst = ok.iter().map(|(_, s)| s.complex_defects[0].1).fold(0.0f64, f64::max);
    let status = if ok.is_empty() { Status::Unresolved } else { pass_if(worst <= bound) };
    let status = if errors.is_empty() { status } else { status.max(Status::Unresolved) };
    run.judge("2", status, format!("max |dbar_T^2| = {worst:.2e} <= {bound:.3e}{unresolved_suffix}"), &all_ts);

    if !run.model.is_product() {
        let t = run.exp.bochner_t;
        let bound = if closed { CLOSED_BOCHNER } else { 10.0 * leak };
        match bochner_check(am, t) {
            Ok(res) => {
                run.cell(Some(t), CellData::Bochner { residual: res.max, bound });
                run.judge("3", pass_if(res.max <= bound), format!("Bochner residual {:.2e} <= {bound:.3e} at T={t}", res.max), &[Some(t)]);
            }
            Err(e) => {
                run.cell(Some(t), CellData::Error { message: e.to_string() });
                run.judge("3", Status::Unresolved, e.to_string(), &[Some(t)]);
            }
        }
    }

    if let Some(criterion) = theorem_criterion(run.model) {
        let predicted = theorem1_prediction(run.model);
        let undeformed = undeformed_prediction(run.model);
        let mut status = if errors.is_empty() { Status::Pass } else { Status::Unresolved };
        let mut notes = Vec::new();
        for (t, s) in &ok {
            let table = &s.tables[0];
            let expected = if *t == 0.0 { &undeformed } else { &predicted };
            let expected = match expected {
                Ok(e) => e,
                Err(e) => {
                    status = status.max(Status::Unresolved);
                    notes.push(format!("T={t}: oracle error {e}"));
                    continue;
                }
            };
            let cell_status = if !table.is_resolved() {
                Status::Unresolved
            } else {
                pass_if(table.same_dims(expected))
            };
            status = status.max(cell_status);
            let mut note = format!("T={t} {} vs {}", counts(table), counts(expected));
            if cell_status == Status::Unresolved {
                note.push_str(&format!(" (ambiguous r = {:?})", table.unresolved));
            }
            notes.push(note);
        }
        if criterion == "4" {
            if let VectorFieldSpec::Constant { c } = run.model.field {
                let target = 2.0 * c.norm_sqr();
                for (t, s) in &ok {
                    for &(_, g) in &s.growth {
                        let good = (g - target).abs() <= 0.01 * target;
                        status = status.max(pass_if(good));
                        notes.push(format!("T={t} lambda_min/T^2 = {g:.6} vs {target}"));
                    }
                }
            }
        }
        if ok.is_empty() {
            status = Status::Unresolved;
        }
        run.judge(criterion, status, format!("{}{unresolved_suffix}", notes.join("; ")), &all_ts);
    }

    // Graded Euler characteristic equals its T = 0 value.
    let reference = ok
        .iter()
        .find(|(t, s)| *t == 0.0 && s.tables[0].is_resolved())
        .map(|(_, s)| (graded_euler(&s.tables[0]), "spectral T=0"))
        .or_else(|| undeformed_prediction(run.model).ok().map(|u| (graded_euler(&u), "oracle T=0")));
    match reference {
        None => run.judge("9", Status::Unresolved, "no T=0 reference".into(), &all_ts),
        Some((chi0, source)) => {
            let mut status = if errors.is_empty() { Status::Pass } else { Status::Unresolved };
            let mut values = Vec::new();
            for (t, s) in &ok {
                let table = &s.tables[0];
                if !table.is_resolved() {
                    status = status.max(Status::Unresolved);
                }
                let chi = graded_euler(table);
                status = status.max(pass_if(chi == chi0));
                values.push(format!("T={t}:{chi}"));
            }
            let closed_note = if closed { "" } else { " (truncation not closed)" };
            run.judge("9", status, format!("chi {} vs {chi0} ({source}){closed_note}{unresolved_suffix}", values.join(" ")), &all_ts);
        }
    }
    debug!("{}: {} cells", run.model.tag(), run.cells.len());
}

/// Fixed sample vector for the isometry check.
fn isometry_sample() -> [Complex64; 2] {
    [Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.8)]
}

fn run_oscillator(exp: &OscillatorExperiment, rule: &ThresholdRule, config: &ExperimentConfig) -> Outcome {
    let mut record = ExperimentRecord { id: exp.id.clone(), kind: "oscillator".into(), cells: vec![], artifacts: vec![] };
    let mut verdicts = Vec::new();
    let tag = |m: usize| format!("oscillator(m={m})");
    let prov = |m: usize, cutoff: usize, t: Option<f64>| Provenance { model: tag(m), cutoff, t, threshold: *rule };
    let gap_constant = fixture::gap_constant();

    let grid: Vec<(usize, usize)> = exp.m.iter().flat_map(|&m| exp.cutoffs.iter().map(move |&n| (m, n))).collect();
    let trajectories: Vec<std::result::Result<Vec<LocalRow>, String>> =
        grid.par_iter().map(|&(m, n)| local_trajectory(m, n, exp.epsilon, &exp.t_values).map_err(|e| e.to_string())).collect();
    // Isometry depends on (m, T) only.
    let isometry: Vec<(usize, f64, std::result::Result<f64, String>)> = exp
        .m
        .iter()
        .flat_map(|&m| exp.t_values.iter().map(move |&t| (m, t)))
        .collect::<Vec<_>>()
        .par_iter()
        .filter(|(m, _)| *m <= 2)
        .map(|&(m, t)| {
            let r = OscillatorModel::new(m, t, exp.cutoffs[0])
                .and_then(|model| CutoffProfile::new(exp.epsilon, m, t).map(|p| (model, p)))
                .and_then(|(model, p)| isometry_check(&model, &p, &isometry_sample()))
                .map_err(|e| e.to_string());
            (m, t, r)
        })
        .collect();

    let mut rows_all = Vec::new();
    for (&(m, n), traj) in grid.iter().zip(&trajectories) {
        let ts: Vec<Option<f64>> = exp.t_values.iter().map(|t| Some(*t)).collect();
        let provs: Vec<Provenance> = ts.iter().map(|t| prov(m, n, *t)).collect();
        let rows = match traj {
            Err(e) => {
                record.cells.push(Cell { provenance: prov(m, n, None), data: CellData::Error { message: e.clone() } });
                verdicts.push(verdict("5", &exp.id, Status::Unresolved, format!("m={m} N={n}: {e}"), provs.clone()));
                verdicts.push(verdict("6", &exp.id, Status::Unresolved, format!("m={m} N={n}: {e}"), provs));
                continue;
            }
            Ok(rows) => rows,
        };
        for r in rows {
            let iso = if n == exp.cutoffs[0] {
                isometry.iter().find(|(mm, tt, _)| *mm == m && *tt == r.t).and_then(|(_, _, x)| x.as_ref().ok().copied())
            } else {
                None
            };
            record.cells.push(Cell { provenance: prov(m, n, Some(r.t)), data: CellData::Local { row: *r, isometry_defect: iso } });
        }
        rows_all.extend(rows.iter().copied());

        // Kernel, overlap, gap ≥ A·T and gap/T constant across T.
        match &gap_constant {
            Err(e) => verdicts.push(verdict("5", &exp.id, Status::Unresolved, format!("fixture: {e}"), provs.clone())),
            Ok(a) => {
                let mut problems = Vec::new();
                for r in rows {
                    if r.kernel_dim != 1 {
                        problems.push(format!("T={} kernel {}", r.t, r.kernel_dim));
                    }
                    if r.kernel_overlap < 1.0 - 1e-8 {
                        problems.push(format!("T={} overlap {}", r.t, r.kernel_overlap));
                    }
                    if r.gap < a * r.t * (1.0 - 1e-8) || (r.gap_over_t - a).abs() > 1e-8 * a {
                        problems.push(format!("T={} gap/T {} vs A {a}", r.t, r.gap_over_t));
                    }
                }
                let lo = rows.iter().map(|r| r.gap_over_t).fold(f64::INFINITY, f64::min);
                let hi = rows.iter().map(|r| r.gap_over_t).fold(f64::NEG_INFINITY, f64::max);
                if hi - lo > 1e-8 * a {
                    problems.push(format!("gap/T varies over [{lo}, {hi}]"));
                }
                let detail = if problems.is_empty() {
                    format!("m={m} N={n}: kernel 1, gap/T in [{lo:.12}, {hi:.12}], A = {a}")
                } else {
                    format!("m={m} N={n}: {}", problems.join("; "))
                };
                verdicts.push(verdict("5", &exp.id, pass_if(problems.is_empty()), detail, provs.clone()));
            }
        }

        // Normalization in the asymptotic regime, and the isometry.
        let mut status = Status::Pass;
        let mut notes = Vec::new();
        let target = 0.5f64.powi(m as i32);
        for r in rows.iter().filter(|r| r.t * r.epsilon * r.epsilon >= ALPHA_REGIME) {
            status = status.max(pass_if((r.alpha_scaled - target).abs() <= ALPHA_TOL * target));
            notes.push(format!("T={} alpha*T^m = {:.8}", r.t, r.alpha_scaled));
        }
        if n == exp.cutoffs[0] {
            for (_, t, x) in isometry.iter().filter(|(mm, _, _)| *mm == m) {
                match x {
                    Ok(d) => {
                        status = status.max(pass_if(*d <= ISOMETRY_TOL));
                        notes.push(format!("T={t} isometry defect {d:.1e}"));
                    }
                    Err(e) => {
                        status = status.max(Status::Unresolved);
                        notes.push(format!("T={t} isometry: {e}"));
                    }
                }
            }
        }
        if notes.is_empty() {
            notes.push(format!("no T with T*eps^2 >= {ALPHA_REGIME} and no isometry check for m={m}"));
        }
        verdicts.push(verdict("6", &exp.id, status, format!("m={m} N={n}: {}", notes.join("; ")), provs));
    }

    let mut artifacts = Vec::new();
    if config.wants(Format::Csv) && !rows_all.is_empty() {
        let mut bytes = Vec::new();
        write_local_csv(&mut bytes, &rows_all).expect("in-memory write");
        artifacts.push(Artifact { path: format!("{}/local.csv", sanitize(&exp.id)), bytes });
    }
    record.artifacts = artifacts.iter().map(|a| a.path.clone()).collect();
    Outcome { record, verdicts, artifacts }
}
