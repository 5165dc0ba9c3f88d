//! Finite spectral models: bases, Gram matrices and operator blocks.
//!
//! Every model decomposes into sectors that the operators ∂̄, i(v) and v̄*∧
//! preserve (Fourier modes on the torus, U(1) weight on CP¹, pairs of both on
//! products). Within a sector the sections of degree r form a
//! [`SectionBasis`]; operators are stored as coefficient matrices in those
//! bases, so an operator `O` acts by `O e_j = Σ_i M_ij e_i` up to leakage.

mod cp1;
pub mod export;
mod product;
mod torus;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graded_algebra::BasisLabel;
use crate::linalg::CMatrix;

pub use cp1::{cp1_model, cp1_leakage_sequence};
pub use product::product_model;
pub use torus::{torus_dbar_eigenvalue, torus_model};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Flat torus C/(Z + τZ) of unit area.
    Torus { tau: Complex64 },
    /// CP¹ with the Fubini–Study metric of area 4π, twisted by O(k).
    Cp1 { k: i64 },
    Product {
        left: Box<ModelManifold>,
        right: Box<ModelManifold>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorFieldSpec {
    /// c·w for the unitary frame vector w; torus only.
    Constant { c: Complex64 },
    /// z ∂/∂z on CP¹, vanishing at 0 and ∞.
    Linear,
    /// The field of one factor of a product, zero on the other.
    ProductLift { factor: Factor },
    Zero,
}

/// Descriptor of one desk model. For products the factor cutoffs apply and
/// the outer `cutoff` is ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelManifold {
    #[serde(flatten)]
    pub kind: ModelKind,
    #[serde(default)]
    pub cutoff: usize,
    pub field: VectorFieldSpec,
}

impl ModelManifold {
    pub fn torus(tau: Complex64, cutoff: usize, c: Complex64) -> Self {
        Self { kind: ModelKind::Torus { tau }, cutoff, field: VectorFieldSpec::Constant { c } }
    }

    pub fn torus_without_field(tau: Complex64, cutoff: usize) -> Self {
        Self { kind: ModelKind::Torus { tau }, cutoff, field: VectorFieldSpec::Zero }
    }

    pub fn cp1(k: i64, cutoff: usize) -> Self {
        Self { kind: ModelKind::Cp1 { k }, cutoff, field: VectorFieldSpec::Linear }
    }

    pub fn product(left: ModelManifold, right: ModelManifold, lift: Factor) -> Self {
        let cutoff = left.cutoff.max(right.cutoff);
        Self {
            kind: ModelKind::Product { left: Box::new(left), right: Box::new(right) },
            cutoff,
            field: VectorFieldSpec::ProductLift { factor: lift },
        }
    }

    /// Complex dimension of the underlying manifold.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::Torus { .. } | ModelKind::Cp1 { .. } => 1,
            ModelKind::Product { left, right } => left.dim() + right.dim(),
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, ModelKind::Product { .. })
    }

    /// Short identifier used in reports and file names.
    pub fn tag(&self) -> String {
        match &self.kind {
            ModelKind::Torus { tau } => format!("torus(tau={}{:+}i,N={})", tau.re, tau.im, self.cutoff),
            ModelKind::Cp1 { k } => format!("cp1(k={k},N={})", self.cutoff),
            ModelKind::Product { left, right } => format!("{}x{}", left.tag(), right.tag()),
        }
    }

    /// Check the descriptor invariants without assembling anything.
    pub fn validate(&self) -> Result<()> {
        match (&self.kind, &self.field) {
            (ModelKind::Torus { tau }, field) => {
                if !(tau.im > 0.0) || !tau.re.is_finite() {
                    return Err(Error::DegenerateModulus { im: tau.im });
                }
                if self.cutoff < 1 {
                    return Err(invalid("cutoff", "torus cutoff must be >= 1"));
                }
                match field {
                    VectorFieldSpec::Constant { c } => {
                        if !(c.norm() > 0.0) || !c.re.is_finite() || !c.im.is_finite() {
                            return Err(invalid("field.c", "constant field must be finite and nonzero"));
                        }
                    }
                    VectorFieldSpec::Zero => {}
                    other => {
                        return Err(Error::UnsupportedModel(format!("torus with field {other:?}")));
                    }
                }
            }
            (ModelKind::Cp1 { k }, field) => {
                if *k < 0 {
                    return Err(invalid("k", "only twists k >= 0 are supported"));
                }
                let required = (*k as usize + 2).max(4);
                if self.cutoff < required {
                    return Err(Error::CutoffTooSmall { cutoff: self.cutoff, k: *k, required });
                }
                if !matches!(field, VectorFieldSpec::Linear | VectorFieldSpec::Zero) {
                    return Err(Error::UnsupportedModel(format!("cp1 with field {field:?}")));
                }
            }
            (ModelKind::Product { left, right }, field) => {
                let ok_factors = matches!(left.kind, ModelKind::Cp1 { .. })
                    && left.field == VectorFieldSpec::Linear
                    && matches!(right.kind, ModelKind::Torus { .. })
                    && right.field == VectorFieldSpec::Zero;
                if !ok_factors || *field != (VectorFieldSpec::ProductLift { factor: Factor::Left }) {
                    return Err(Error::UnsupportedModel(
                        "products must be cp1 (linear field) x torus (zero field) with the field lifted from the left".into(),
                    ));
                }
                left.validate()?;
                right.validate()?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for ModelManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Mode part of a section label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeLabel {
    /// exp(2πi(a·s + b·t)) with z = s + τt.
    Fourier { a: i64, b: i64 },
    /// Leading monomial z^a z̄^b (1+|z|²)^(−weight) of an orthogonalized element.
    Monomial { a: usize, b: usize, weight: usize },
    /// e_left ∧ e_right.
    Pair { left: Box<ModeLabel>, right: Box<ModeLabel> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionLabel {
    pub mode: ModeLabel,
    pub form: BasisLabel,
}

impl fmt::Display for SectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn mode(m: &ModeLabel) -> String {
            match m {
                ModeLabel::Fourier { a, b } => format!("F({a},{b})"),
                ModeLabel::Monomial { a, b, weight } => format!("M({a},{b};{weight})"),
                ModeLabel::Pair { left, right } => format!("{}*{}", mode(left), mode(right)),
            }
        }
        write!(f, "{} {}", mode(&self.mode), self.form)
    }
}

/// Sections of one degree inside one sector, with their L² Gram matrix.
#[derive(Clone, Debug)]
pub struct SectionBasis {
    pub degree: i32,
    pub elements: Vec<SectionLabel>,
    pub gram: CMatrix,
}

impl SectionBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct OperatorBlock {
    pub source_degree: i32,
    pub target_degree: i32,
    pub matrix: CMatrix,
}

/// Compressed multiplication terms of the Bochner identity, per degree.
#[derive(Clone, Debug)]
pub struct BochnerTerms {
    /// Multiplication by |v|².
    pub norm_sqr: Vec<CMatrix>,
    /// (∂̄v̄*)∧ + i(∂̄v̄*).
    pub zero_order: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct Sector {
    pub key: Vec<i64>,
    /// Indexed by r + n.
    pub bases: Vec<SectionBasis>,
    /// ∂̄ from degree r to r+1, indexed by r + n for r in −n..n.
    pub dbar: Vec<OperatorBlock>,
    /// i(v) from degree r to r+1, same indexing as `dbar`.
    pub contraction: Vec<OperatorBlock>,
    /// v̄*∧ from degree r+1 to r, indexed by r + n.
    pub wedge_vbar: Vec<OperatorBlock>,
    pub bochner: Option<BochnerTerms>,
}

impl Sector {
    pub fn dimension(&self) -> usize {
        self.bases.iter().map(|b| b.len()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakOperator {
    Dbar,
    Contraction,
    WedgeVbar,
}

/// Truncation leakage ‖(1−P)·O·P‖ of one operator block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockLeakage {
    pub sector: Vec<i64>,
    pub operator: LeakOperator,
    pub source_degree: i32,
    pub norm: f64,
    /// Σ‖(1−P)O e_j‖² and Σ‖O e_j‖² over an orthonormal source basis.
    pub leaked_mass: f64,
    pub image_mass: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LeakageReport {
    pub model: String,
    pub blocks: Vec<BlockLeakage>,
}

impl LeakageReport {
    /// Largest operator-norm leakage over all blocks.
    pub fn max_norm(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.norm))
    }

    pub fn max_norm_of(&self, op: LeakOperator) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.operator == op)
            .fold(0.0, |m, b| m.max(b.norm))
    }

    /// Fraction of the Hilbert–Schmidt mass of `op` that leaves the truncation.
    pub fn leaked_fraction(&self, op: LeakOperator) -> f64 {
        let (leak, total) = self
            .blocks
            .iter()
            .filter(|b| b.operator == op)
            .fold((0.0, 0.0), |(l, t), b| (l + b.leaked_mass, t + b.image_mass));
        if total > 0.0 {
            leak / total
        } else {
            0.0
        }
    }
}

/// A fully assembled model.
#[derive(Clone, Debug)]
pub struct AssembledModel {
    pub spec: ModelManifold,
    pub dim: usize,
    pub sectors: Vec<Sector>,
    pub leakage: LeakageReport,
}

impl AssembledModel {
    pub fn degrees(&self) -> impl Iterator<Item = i32> {
        let n = self.dim as i32;
        -n..=n
    }

    /// Total number of basis sections in degree r.
    pub fn degree_dimension(&self, r: i32) -> usize {
        let idx = (r + self.dim as i32) as usize;
        self.sectors.iter().map(|s| s.bases.get(idx).map_or(0, |b| b.len())).sum()
    }

    pub fn total_dimension(&self) -> usize {
        self.sectors.iter().map(|s| s.dimension()).sum()
    }

    /// Whether the truncated operators are exactly closed (torus, products of
    /// closed factors). CP¹ is closed for ∂̄ but projects i(v).
    pub fn is_truncation_closed(&self) -> bool {
        self.leakage.max_norm() == 0.0
    }

    pub fn field_vanishes_identically(&self) -> bool {
        self.spec.field == VectorFieldSpec::Zero
    }
}

/// Assemble any supported descriptor.
pub fn assemble(spec: &ModelManifold) -> Result<AssembledModel> {
    spec.validate()?;
    match &spec.kind {
        ModelKind::Torus { tau } => {
            let c = match spec.field {
                VectorFieldSpec::Constant { c } => c,
                _ => Complex64::new(0.0, 0.0),
            };
            torus::assemble_torus(spec.clone(), *tau, spec.cutoff, c)
        }
        ModelKind::Cp1 { k } => cp1::assemble_cp1(spec.clone(), *k, spec.cutoff),
        ModelKind::Product { left, right } => {
            let l = assemble(left)?;
            let r = assemble(right)?;
            product::assemble_product(spec.clone(), &l, &r)
        }
    }
}

/// Leakage of every operator block of a model.
pub fn leakage_report(model: &AssembledModel) -> &LeakageReport {
    &model.leakage
}

/// Split a matrix over a graded label list into degree blocks.
pub(crate) fn degree_block(
    full: &CMatrix,
    degrees: &[i32],
    source: i32,
    target: i32,
) -> CMatrix {
    let rows: Vec<usize> = (0..degrees.len()).filter(|&i| degrees[i] == target).collect();
    let cols: Vec<usize> = (0..degrees.len()).filter(|&i| degrees[i] == source).collect();
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| full[(rows[i], cols[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_roundtrips_through_json() {
        let spec = ModelManifold::product(
            ModelManifold::cp1(0, 8),
            ModelManifold::torus_without_field(Complex64::new(0.0, 1.0), 4),
            Factor::Left,
        );
        let text = serde_json::to_string(&spec).unwrap();
        let back: ModelManifold = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(spec.dim(), 2);
        spec.validate().unwrap();
    }

    #[test]
    fn validation_errors() {
        let bad_tau = ModelManifold::torus(Complex64::new(0.0, 0.0), 2, Complex64::new(1.0, 0.0));
        assert!(matches!(bad_tau.validate(), Err(Error::DegenerateModulus { .. })));
        let zero_c = ModelManifold::torus(Complex64::new(0.0, 1.0), 2, Complex64::new(0.0, 0.0));
        assert!(matches!(zero_c.validate(), Err(Error::InvalidParameter { .. })));
        let small = ModelManifold::cp1(3, 4);
        assert!(matches!(small.validate(), Err(Error::CutoffTooSmall { required: 5, .. })));
        let swapped = ModelManifold::product(
            ModelManifold::torus_without_field(Complex64::new(0.0, 1.0), 2),
            ModelManifold::cp1(0, 4),
            Factor::Left,
        );
        assert!(matches!(swapped.validate(), Err(Error::UnsupportedModel(_))));
    }
}
