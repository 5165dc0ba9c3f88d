//! The deformed differential ∂̄_T = ∂̄ + T·i(v), its Gram adjoint, the Dirac
//! operator D_T = √2(∂̄_T + ∂̄_T*) and the spectra of D_T² per degree.
//!
//! Spectra are computed in an orthonormal frame: with G_r = L_r L_r† the
//! block A_r becomes Ã_r = L_{r+1}† A_r L_r^{−†}, and
//! D_T² on degree r is 2(Ã_{r−1}Ã_{r−1}† + Ã_r†Ã_r), an ordinary Hermitian
//! matrix per sector.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{AssembledModel, ModelManifold, VectorFieldSpec};

/// Largest sector block handed to the dense eigensolver.
pub const MAX_BLOCK: usize = 4096;

/// Clustering rule for kernel counts.
///
/// A noise floor `noise_floor · λ_max` is prepended to the sorted spectrum and
/// the largest consecutive ratio among the lowest `quantile` fraction picks the
/// cluster boundary. The count is resolved when that ratio is at least
/// `min_ratio`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdRule {
    pub quantile: f64,
    pub min_ratio: f64,
    pub noise_floor: f64,
}

impl Default for ThresholdRule {
    fn default() -> Self {
        Self { quantile: 0.25, min_ratio: 1e3, noise_floor: 1e-12 }
    }
}

impl ThresholdRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantile > 0.0 && self.quantile <= 1.0) {
            return Err(invalid("threshold.quantile", "must lie in (0, 1]"));
        }
        if !(self.min_ratio > 1.0) {
            return Err(invalid("threshold.min_ratio", "must exceed 1"));
        }
        if !(self.noise_floor > 0.0 && self.noise_floor < 1.0) {
            return Err(invalid("threshold.noise_floor", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Outcome of the clustering rule on one sorted spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster {
    pub kernel_count: usize,
    pub gap: f64,
    pub threshold: f64,
    pub resolved: bool,
}

pub fn cluster(sorted: &[f64], rule: &ThresholdRule) -> Cluster {
    let dim = sorted.len();
    let top = sorted.last().copied().unwrap_or(0.0);
    if dim == 0 || top <= 0.0 {
        return Cluster { kernel_count: dim, gap: f64::INFINITY, threshold: 0.0, resolved: true };
    }
    let floor = rule.noise_floor * top;
    let window = ((rule.quantile * dim as f64).ceil() as usize).clamp(1, dim);
    let mut levels = vec![floor];
    levels.extend(sorted.iter().take(window + 1).map(|&x| x.max(floor)));
    let (mut best, mut best_ratio) = (0, 0.0);
    for i in 0..levels.len() - 1 {
        let ratio = levels[i + 1] / levels[i];
        if ratio > best_ratio {
            best = i;
            best_ratio = ratio;
        }
    }
    Cluster {
        kernel_count: best,
        gap: best_ratio,
        threshold: (levels[best] * levels[best + 1]).sqrt(),
        resolved: best_ratio >= rule.min_ratio,
    }
}

#[derive(Clone, Debug)]
pub struct DeformedSector {
    pub key: Vec<i64>,
    /// ∂̄_T from r to r+1, indexed by r + n.
    pub blocks: Vec<CMatrix>,
    /// ∂̄_T* from r+1 to r, indexed by r + n.
    pub adjoint_blocks: Vec<CMatrix>,
    /// Gram matrices per degree, indexed by r + n.
    pub gram: Vec<CMatrix>,
    factors: Vec<CMatrix>,
    factor_inverses: Vec<CMatrix>,
}

impl DeformedSector {
    /// Ã_r in the orthonormal frame.
    pub fn orthonormal_block(&self, idx: usize) -> CMatrix {
        self.factors[idx + 1].adjoint() * &self.blocks[idx] * self.factor_inverses[idx].adjoint()
    }

    /// Change a coefficient matrix on degree index `idx` to the orthonormal frame.
    pub fn orthonormal_endomorphism(&self, idx: usize, m: &CMatrix) -> CMatrix {
        self.factors[idx].adjoint() * m * self.factor_inverses[idx].adjoint()
    }

    fn degree_count(&self) -> usize {
        self.gram.len()
    }

    /// D_T² on degree index `idx`.
    pub fn dirac_square(&self, idx: usize) -> CMatrix {
        let d = self.gram[idx].nrows();
        let mut h = CMatrix::zeros(d, d);
        if idx > 0 {
            let a = self.orthonormal_block(idx - 1);
            h += &a * a.adjoint();
        }
        if idx + 1 < self.degree_count() {
            let a = self.orthonormal_block(idx);
            h += a.adjoint() * &a;
        }
        h * Complex64::new(2.0, 0.0)
    }

    /// Full D_T on all degrees of the sector, orthonormal frame.
    pub fn dirac_operator(&self) -> CMatrix {
        let sizes: Vec<usize> = self.gram.iter().map(|g| g.nrows()).collect();
        let offsets: Vec<usize> = sizes.iter().scan(0, |acc, s| { let o = *acc; *acc += s; Some(o) }).collect();
        let total: usize = sizes.iter().sum();
        let mut d = CMatrix::zeros(total, total);
        let s2 = Complex64::new(std::f64::consts::SQRT_2, 0.0);
        for idx in 0..self.blocks.len() {
            let a = self.orthonormal_block(idx) * s2;
            linalg::place(&mut d, offsets[idx + 1], offsets[idx], &a);
            linalg::place(&mut d, offsets[idx], offsets[idx + 1], &a.adjoint());
        }
        d
    }
}

#[derive(Clone, Debug)]
pub struct DeformedOperator {
    pub t: f64,
    pub dim: usize,
    pub model: String,
    pub sectors: Vec<DeformedSector>,
    /// max ‖∂̄_T ∂̄_T‖ in the orthonormal frame.
    pub complex_defect: f64,
    /// max |G_r B − A† G_{r+1}| over all blocks.
    pub adjoint_defect: f64,
}

impl DeformedOperator {
    pub fn degree_index(&self, r: i32) -> Result<usize> {
        let n = self.dim as i32;
        if r < -n || r > n {
            return Err(Error::DegreeOutOfRange { degree: r, dim: self.dim });
        }
        Ok((r + n) as usize)
    }
}

/// Form ∂̄ + T·i(v) and its Gram adjoint on every sector.
pub fn assemble_deformed(model: &AssembledModel, t: f64) -> Result<DeformedOperator> {
    if !t.is_finite() {
        return Err(invalid("T", "must be finite"));
    }
    let n = model.dim as i32;
    let tc = Complex64::new(t, 0.0);
    let sectors: Vec<(DeformedSector, f64, f64)> = model
        .sectors
        .par_iter()
        .map(|s| -> Result<(DeformedSector, f64, f64)> {
            let gram: Vec<CMatrix> = s.bases.iter().map(|b| b.gram.clone()).collect();
            let mut factors = Vec::with_capacity(gram.len());
            for (i, g) in gram.iter().enumerate() {
                if g.nrows() > MAX_BLOCK {
                    return Err(invalid("cutoff", format!("sector block of size {} exceeds {MAX_BLOCK}", g.nrows())));
                }
                factors.push(linalg::cholesky(g, i as i32 - n)?);
            }
            let factor_inverses: Vec<CMatrix> = factors.iter().map(linalg::lower_inverse).collect();
            let blocks: Vec<CMatrix> = s
                .dbar
                .iter()
                .zip(&s.contraction)
                .map(|(d, c)| &d.matrix + &c.matrix * tc)
                .collect();
            let mut adjoint_blocks = Vec::with_capacity(blocks.len());
            let mut adjoint_defect: f64 = 0.0;
            for (i, a) in blocks.iter().enumerate() {
                // B = G_r⁻¹ A† G_{r+1}
                let ginv = factor_inverses[i].adjoint() * &factor_inverses[i];
                let b = ginv * a.adjoint() * &gram[i + 1];
                adjoint_defect = adjoint_defect.max(linalg::max_abs(&(&gram[i] * &b - a.adjoint() * &gram[i + 1])));
                adjoint_blocks.push(b);
            }
            let sector = DeformedSector { key: s.key.clone(), blocks, adjoint_blocks, gram, factors, factor_inverses };
            let mut complex_defect: f64 = 0.0;
            for i in 0..sector.blocks.len().saturating_sub(1) {
                let sq = sector.orthonormal_block(i + 1) * sector.orthonormal_block(i);
                complex_defect = complex_defect.max(linalg::operator_norm(&sq));
            }
            Ok((sector, complex_defect, adjoint_defect))
        })
        .collect::<Result<Vec<_>>>()?;
    let complex_defect = sectors.iter().fold(0.0f64, |m, s| m.max(s.1));
    let adjoint_defect = sectors.iter().fold(0.0f64, |m, s| m.max(s.2));
    Ok(DeformedOperator {
        t,
        dim: model.dim,
        model: model.spec.tag(),
        sectors: sectors.into_iter().map(|s| s.0).collect(),
        complex_defect,
        adjoint_defect,
    })
}

/// D_T² per sector and degree, with the worst Hermiticity defect.
#[derive(Clone, Debug)]
pub struct DiracSquare {
    pub sectors: Vec<(Vec<i64>, Vec<CMatrix>)>,
    pub hermiticity_defect: f64,
}

pub fn dirac(op: &DeformedOperator) -> DiracSquare {
    let sectors: Vec<(Vec<i64>, Vec<CMatrix>)> = op
        .sectors
        .par_iter()
        .map(|s| (s.key.clone(), (0..s.degree_count()).map(|i| s.dirac_square(i)).collect()))
        .collect();
    let hermiticity_defect = sectors
        .iter()
        .flat_map(|(_, hs)| hs.iter().map(linalg::hermiticity_defect))
        .fold(0.0, f64::max);
    DiracSquare { sectors, hermiticity_defect }
}

fn finite_or_null<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_some(x)
    } else {
        s.serialize_none()
    }
}

fn null_is_infinite<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Spectrum of D_T² on one degree, merged over sectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub degree: i32,
    /// Ascending; possibly truncated to the requested count.
    pub eigenvalues: Vec<f64>,
    pub dimension: usize,
    pub kernel_count: usize,
    /// Ratio across the cluster boundary; `null` in JSON when infinite.
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_is_infinite")]
    pub gap: f64,
    pub threshold: f64,
    pub resolved: bool,
}

impl SpectrumResult {
    pub fn above_count(&self) -> usize {
        self.dimension - self.kernel_count
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    /// Smallest eigenvalue above the kernel cluster.
    pub fn first_nonzero(&self) -> Option<f64> {
        self.eigenvalues.get(self.kernel_count).copied()
    }
}

fn checked_eigenvalues(h: &CMatrix, degree: i32) -> Result<Vec<f64>> {
    let ev = linalg::hermitian_eigenvalues(h);
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver { degree, size: h.nrows(), condition: linalg::condition_number(h) });
    }
    Ok(ev)
}

fn degree_spectrum(op: &DeformedOperator, idx: usize, rule: &ThresholdRule, how_many: Option<usize>) -> Result<SpectrumResult> {
    let degree = idx as i32 - op.dim as i32;
    let parts: Vec<Vec<f64>> = op
        .sectors
        .par_iter()
        .map(|s| checked_eigenvalues(&s.dirac_square(idx), degree))
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<f64> = parts.into_iter().flatten().collect();
    all.sort_by(|a, b| a.total_cmp(b));
    let c = cluster(&all, rule);
    let dimension = all.len();
    if let Some(k) = how_many {
        all.truncate(k.max(c.kernel_count + 1));
    }
    Ok(SpectrumResult {
        degree,
        eigenvalues: all,
        dimension,
        kernel_count: c.kernel_count,
        gap: c.gap,
        threshold: c.threshold,
        resolved: c.resolved,
    })
}

/// Spectrum of D_T² on degree r. `how_many` keeps only the lowest eigenvalues
/// (never fewer than the kernel cluster plus one).
pub fn spectrum(op: &DeformedOperator, r: i32, how_many: Option<usize>) -> Result<SpectrumResult> {
    spectrum_with(op, r, how_many, &ThresholdRule::default())
}

pub fn spectrum_with(op: &DeformedOperator, r: i32, how_many: Option<usize>, rule: &ThresholdRule) -> Result<SpectrumResult> {
    let idx = op.degree_index(r)?;
    degree_spectrum(op, idx, rule, how_many)
}

/// Spectra of every degree, ascending in r.
pub fn spectra(op: &DeformedOperator, rule: &ThresholdRule, how_many: Option<usize>) -> Result<Vec<SpectrumResult>> {
    (0..=2 * op.dim).map(|idx| degree_spectrum(op, idx, rule, how_many)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableSource {
    Spectral { model: String, t: f64, threshold: ThresholdRule },
    Oracle { description: String },
}

/// dim H^(r) indexed by r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohomologyTable {
    pub dims: BTreeMap<i32, usize>,
    pub source: TableSource,
    /// Degrees whose kernel count did not pass the clustering criterion.
    #[serde(default)]
    pub unresolved: Vec<i32>,
}

impl CohomologyTable {
    pub fn from_spectra(model: &str, t: f64, rule: ThresholdRule, spectra: &[SpectrumResult]) -> Self {
        Self {
            dims: spectra.iter().map(|s| (s.degree, s.kernel_count)).collect(),
            source: TableSource::Spectral { model: model.to_string(), t, threshold: rule },
            unresolved: spectra.iter().filter(|s| !s.resolved).map(|s| s.degree).collect(),
        }
    }

    pub fn dim(&self, r: i32) -> usize {
        self.dims.get(&r).copied().unwrap_or(0)
    }

    pub fn is_resolved(&self) -> bool {
        self.unresolved.is_empty()
    }

    /// Same dimensions in every degree, treating missing entries as 0.
    pub fn same_dims(&self, other: &CohomologyTable) -> bool {
        let keys: std::collections::BTreeSet<i32> = self.dims.keys().chain(other.dims.keys()).copied().collect();
        keys.iter().all(|r| self.dim(*r) == other.dim(*r))
    }
}

/// Kernel counts of the undeformed Laplacian per bidegree (p, q). The
/// Gram matrices and D² do not couple different bidegrees at T = 0, so the
/// orthonormal frame splits and each (p, q) block is clustered on its own.
pub fn hodge_kernel_counts(
    model: &AssembledModel,
    op: &DeformedOperator,
    rule: &ThresholdRule,
) -> Result<BTreeMap<(usize, usize), Cluster>> {
    if op.t != 0.0 {
        return Err(invalid("T", "bidegree splitting needs the undeformed operator (T = 0)"));
    }
    let mut per_bidegree: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for (sector, deformed) in model.sectors.iter().zip(&op.sectors) {
        for (idx, basis) in sector.bases.iter().enumerate() {
            let h = deformed.dirac_square(idx);
            let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for (i, e) in basis.elements.iter().enumerate() {
                let b = e.form.bidegree();
                classes.entry((b.p, b.q)).or_default().push(i);
            }
            let scale = linalg::max_abs(&h).max(1.0);
            for (key, rows) in &classes {
                for (other, cols) in &classes {
                    if key == other {
                        continue;
                    }
                    let hr = &h;
                    let coupling = rows.iter().flat_map(|&i| cols.iter().map(move |&j| hr[(i, j)].norm())).fold(0.0, f64::max);
                    if coupling > 1e-9 * scale {
                        return Err(invalid("model", format!("bidegrees {key:?} and {other:?} couple at T = 0 ({coupling:e})")));
                    }
                }
                let sub = CMatrix::from_fn(rows.len(), rows.len(), |a, b| h[(rows[a], rows[b])]);
                let degree = idx as i32 - op.dim as i32;
                per_bidegree.entry(*key).or_default().extend(checked_eigenvalues(&sub, degree)?);
            }
        }
    }
    Ok(per_bidegree
        .into_iter()
        .map(|(k, mut ev)| {
            ev.sort_by(|a, b| a.total_cmp(b));
            (k, cluster(&ev, rule))
        })
        .collect())
}

/// Σ_r (−1)^r dim H^(r).
pub fn graded_euler(table: &CohomologyTable) -> i64 {
    table
        .dims
        .iter()
        .map(|(r, d)| if r.rem_euclid(2) == 0 { *d as i64 } else { -(*d as i64) })
        .sum()
}

/// Residual of D_T² = D² + 2T²|v|² + 2T((∂̄v̄*)∧ + i(∂̄v̄*)) per degree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BochnerResidual {
    pub t: f64,
    pub per_degree: Vec<(i32, f64)>,
    pub max: f64,
    /// Largest operator norm of the zero-order term.
    pub zero_order_norm: f64,
}

pub fn bochner_check(model: &AssembledModel, t: f64) -> Result<BochnerResidual> {
    if model.spec.is_product() || model.sectors.iter().any(|s| s.bochner.is_none()) {
        return Err(Error::UnsupportedModel("the Bochner check covers torus and cp1 models".into()));
    }
    let deformed = assemble_deformed(model, t)?;
    let plain = assemble_deformed(model, 0.0)?;
    let n = model.dim as i32;
    let degrees = 2 * model.dim + 1;
    let rows: Vec<(Vec<f64>, f64)> = model
        .sectors
        .par_iter()
        .zip(deformed.sectors.par_iter().zip(plain.sectors.par_iter()))
        .map(|(s, (d, p))| {
            let terms = s.bochner.as_ref().expect("checked above");
            let mut worst = vec![0.0; degrees];
            let mut zero_norm: f64 = 0.0;
            for idx in 0..degrees {
                let v = d.orthonormal_endomorphism(idx, &terms.norm_sqr[idx]);
                let z = d.orthonormal_endomorphism(idx, &terms.zero_order[idx]);
                let rhs = p.dirac_square(idx) + v * Complex64::new(2.0 * t * t, 0.0) + &z * Complex64::new(2.0 * t, 0.0);
                worst[idx] = linalg::operator_norm(&(d.dirac_square(idx) - rhs));
                zero_norm = zero_norm.max(linalg::operator_norm(&z));
            }
            (worst, zero_norm)
        })
        .collect();
    let per_degree: Vec<(i32, f64)> = (0..degrees)
        .map(|idx| (idx as i32 - n, rows.iter().fold(0.0f64, |m, r| m.max(r.0[idx]))))
        .collect();
    let max = per_degree.iter().fold(0.0f64, |m, r| m.max(r.1));
    let zero_order_norm = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok(BochnerResidual { t, per_degree, max, zero_order_norm })
}

/// One (T, r) cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t: f64,
    pub degree: i32,
    pub kernel_count: usize,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_is_infinite")]
    pub gap: f64,
    pub resolved: bool,
    pub min_eigenvalue: Option<f64>,
    pub first_nonzero: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: String,
    pub tables: Vec<CohomologyTable>,
    pub spectra: Vec<(f64, Vec<SpectrumResult>)>,
    pub points: Vec<SweepPoint>,
    /// (T, r) cells whose clustering was ambiguous.
    pub ambiguous: Vec<(f64, i32)>,
    /// λ_min/T² per T over all degrees, reported when the field has no zeros.
    pub growth: Vec<(f64, f64)>,
    /// max ‖∂̄_T ∂̄_T‖ per T.
    pub complex_defects: Vec<(f64, f64)>,
}

fn field_has_no_zeros(spec: &ModelManifold) -> bool {
    matches!(spec.field, VectorFieldSpec::Constant { .. })
}

pub fn t_sweep(model: &AssembledModel, ts: &[f64], rule: &ThresholdRule) -> Result<SweepResult> {
    if ts.is_empty() {
        return Err(invalid("t_values", "T grid must be nonempty"));
    }
    if let Some(bad) = ts.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(invalid("t_values", format!("T must be finite and nonnegative, got {bad}")));
    }
    rule.validate()?;
    let mut tables = Vec::new();
    let mut all_spectra = Vec::new();
    let mut points = Vec::new();
    let mut ambiguous = Vec::new();
    let mut growth = Vec::new();
    let mut complex_defects = Vec::new();
    for &t in ts {
        let op = assemble_deformed(model, t)?;
        complex_defects.push((t, op.complex_defect));
        let sp = spectra(&op, rule, None)?;
        for s in &sp {
            if !s.resolved {
                ambiguous.push((t, s.degree));
            }
            points.push(SweepPoint {
                t,
                degree: s.degree,
                kernel_count: s.kernel_count,
                gap: s.gap,
                resolved: s.resolved,
                min_eigenvalue: s.min_eigenvalue(),
                first_nonzero: s.first_nonzero(),
            });
        }
        if field_has_no_zeros(&model.spec) && t > 0.0 {
            let lo = sp.iter().filter_map(|s| s.min_eigenvalue()).fold(f64::INFINITY, f64::min);
            growth.push((t, lo / (t * t)));
        }
        tables.push(CohomologyTable::from_spectra(&model.spec.tag(), t, *rule, &sp));
        all_spectra.push((t, sp));
    }
    Ok(SweepResult { model: model.spec.tag(), tables, spectra: all_spectra, points, ambiguous, growth, complex_defects })
}

pub const SPECTRA_CSV_SCHEMA: &str = "holoeq-spectra/v1";

/// CSV with header
/// `model,cutoff,t,degree,dimension,kernel_count,gap,resolved,threshold,ev0..ev7`.
/// Missing eigenvalues are empty cells; infinite gaps are written as `inf`.
pub fn write_spectra_csv<W: Write>(out: W, model: &ModelManifold, sweep: &SweepResult) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["model", "cutoff", "t", "degree", "dimension", "kernel_count", "gap", "resolved", "threshold"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..8).map(|i| format!("ev{i}")));
    w.write_record(&header)?;
    for (t, sp) in &sweep.spectra {
        for s in sp {
            let mut row = vec![
                model.tag(),
                model.cutoff.to_string(),
                t.to_string(),
                s.degree.to_string(),
                s.dimension.to_string(),
                s.kernel_count.to_string(),
                if s.gap.is_finite() { format!("{:e}", s.gap) } else { "inf".into() },
                s.resolved.to_string(),
                format!("{:e}", s.threshold),
            ];
            row.extend((0..8).map(|i| s.eigenvalues.get(i).map(|x| format!("{x:e}")).unwrap_or_default()));
            w.write_record(&row)?;
        }
    }
    w.flush()
}

/// JSON report mirroring [`SpectrumResult`] per T.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectraReport {
    pub schema: String,
    pub model: ModelManifold,
    pub threshold: ThresholdRule,
    pub sweep: Vec<SpectraAtT>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectraAtT {
    pub t: f64,
    pub spectra: Vec<SpectrumResult>,
}

pub const SPECTRA_JSON_SCHEMA: &str = "holoeq-spectra-report/v1";

pub fn spectra_report(model: &ModelManifold, rule: &ThresholdRule, sweep: &SweepResult, keep: usize) -> SpectraReport {
    SpectraReport {
        schema: SPECTRA_JSON_SCHEMA.into(),
        model: model.clone(),
        threshold: *rule,
        sweep: sweep
            .spectra
            .iter()
            .map(|(t, sp)| SpectraAtT {
                t: *t,
                spectra: sp
                    .iter()
                    .map(|s| {
                        let mut s = s.clone();
                        s.eigenvalues.truncate(keep.max(s.kernel_count + 1));
                        s
                    })
                    .collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cp1_model, torus_model};

    fn i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    #[test]
    fn clustering_rule() {
        let rule = ThresholdRule::default();
        let c = cluster(&[1e-15, 2e-15, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], &rule);
        assert_eq!(c.kernel_count, 2);
        assert!(c.resolved);
        let none = cluster(&[2.0, 2.5, 3.0, 8.0], &rule);
        assert_eq!(none.kernel_count, 0);
        assert!(none.resolved);
        let fuzzy = cluster(&[1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1.0, 1.0], &rule);
        assert!(!fuzzy.resolved);
        assert_eq!(cluster(&[], &rule).kernel_count, 0);
    }

    #[test]
    fn t_zero_blocks_are_plain_dbar() {
        let m = torus_model(i(), 1, Complex64::new(1.0, 0.0)).unwrap();
        let op = assemble_deformed(&m, 0.0).unwrap();
        for (s, d) in m.sectors.iter().zip(&op.sectors) {
            for (a, b) in s.dbar.iter().zip(&d.blocks) {
                assert_eq!(&a.matrix, b);
            }
        }
    }

    #[test]
    fn torus_scalar_laplacian_at_t_zero() {
        let m = crate::model::assemble(&ModelManifold::torus_without_field(i(), 2)).unwrap();
        let op = assemble_deformed(&m, 0.0).unwrap();
        let s = spectrum(&op, -1, None).unwrap();
        assert_eq!(s.kernel_count, 1);
        let first = s.first_nonzero().unwrap();
        assert!((first - 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
        let zero = spectrum(&op, 0, None).unwrap();
        assert_eq!(zero.kernel_count, 2);
        assert!(spectrum(&op, 2, None).is_err());
    }

    #[test]
    fn dirac_squares_to_block_laplacian() {
        let m = cp1_model(1, 4).unwrap();
        let op = assemble_deformed(&m, 1.5).unwrap();
        let sq = dirac(&op);
        assert!(sq.hermiticity_defect < 1e-11);
        let s = &op.sectors[3];
        let d = s.dirac_operator();
        let d2 = &d * &d;
        let mut off = 0;
        for idx in 0..3 {
            let h = s.dirac_square(idx);
            let n = h.nrows();
            let diff = d2.view((off, off), (n, n)) - &h;
            assert!(linalg::max_abs(&diff) < 1e-9);
            off += n;
        }
    }

    #[test]
    fn euler_characteristic() {
        let table = CohomologyTable {
            dims: [(-1, 0), (0, 2), (1, 0)].into_iter().collect(),
            source: TableSource::Oracle { description: "test".into() },
            unresolved: vec![],
        };
        assert_eq!(graded_euler(&table), 2);
    }

    #[test]
    fn spectrum_json_roundtrip_with_infinite_gap() {
        let s = SpectrumResult {
            degree: 0,
            eigenvalues: vec![],
            dimension: 0,
            kernel_count: 0,
            gap: f64::INFINITY,
            threshold: 0.0,
            resolved: true,
        };
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"gap\":null"));
        assert_eq!(serde_json::from_str::<SpectrumResult>(&text).unwrap(), s);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let m = torus_model(i(), 1, Complex64::new(1.0, 0.0)).unwrap();
        assert!(t_sweep(&m, &[], &ThresholdRule::default()).is_err());
        assert!(t_sweep(&m, &[-1.0], &ThresholdRule::default()).is_err());
    }
}
