//! Products X_L × X_R with the field lifted from the left factor.
//!
//! Basis elements are e_L ∧ e_R. With |e_L| the form degree of the left
//! element, ∂̄(e_L∧e_R) = ∂̄e_L∧e_R + (−1)^|e_L| e_L∧∂̄e_R, and since
//! |e_L| ≡ r_L mod 2 the sign depends only on the left degree.

use rayon::prelude::*;

use super::{
    AssembledModel, BasisLabel, LeakageReport, ModeLabel, ModelManifold, OperatorBlock, Sector, SectionBasis,
    SectionLabel,
};
use crate::error::Result;
use crate::linalg::{self, kron, CMatrix};

/// Product of an assembled CP¹ model with an assembled torus model.
pub fn product_model(left: &AssembledModel, right: &AssembledModel) -> Result<AssembledModel> {
    let spec = ModelManifold::product(left.spec.clone(), right.spec.clone(), super::Factor::Left);
    spec.validate()?;
    assemble_product(spec, left, right)
}

fn shift_label(l: &BasisLabel, r: &BasisLabel, shift: u8) -> BasisLabel {
    let mut anti = l.anti.clone();
    anti.extend(r.anti.iter().map(|j| j + shift));
    let mut holo = l.holo.clone();
    holo.extend(r.holo.iter().map(|j| j + shift));
    BasisLabel::new(anti, holo, 0)
}

struct Layout {
    /// (left degree, right degree, offset) per component, ordered by left degree.
    parts: Vec<(i32, i32, usize)>,
    len: usize,
}

fn layout(l: &Sector, r: &Sector, nl: i32, nr: i32, degree: i32) -> Layout {
    let mut parts = Vec::new();
    let mut off = 0;
    for rl in -nl..=nl {
        let rr = degree - rl;
        if rr < -nr || rr > nr {
            continue;
        }
        let size = l.bases[(rl + nl) as usize].len() * r.bases[(rr + nr) as usize].len();
        parts.push((rl, rr, off));
        off += size;
    }
    Layout { parts, len: off }
}

fn find(lay: &Layout, rl: i32, rr: i32) -> Option<usize> {
    lay.parts.iter().find(|p| p.0 == rl && p.1 == rr).map(|p| p.2)
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn product_sector(l: &Sector, r: &Sector, nl: i32, nr: i32) -> Sector {
    let n = nl + nr;
    let shift = nl as u8;
    let lays: Vec<Layout> = (-n..=n).map(|d| layout(l, r, nl, nr, d)).collect();
    let lb = |rl: i32| &l.bases[(rl + nl) as usize];
    let rb = |rr: i32| &r.bases[(rr + nr) as usize];

    let bases: Vec<SectionBasis> = (-n..=n)
        .map(|d| {
            let lay = &lays[(d + n) as usize];
            let mut elements = Vec::with_capacity(lay.len);
            let mut gram = CMatrix::zeros(lay.len, lay.len);
            for &(rl, rr, off) in &lay.parts {
                for el in &lb(rl).elements {
                    for er in &rb(rr).elements {
                        elements.push(SectionLabel {
                            mode: ModeLabel::Pair { left: Box::new(el.mode.clone()), right: Box::new(er.mode.clone()) },
                            form: shift_label(&el.form, &er.form, shift),
                        });
                    }
                }
                linalg::place(&mut gram, off, off, &kron(&lb(rl).gram, &rb(rr).gram));
            }
            SectionBasis { degree: d, elements, gram }
        })
        .collect();

    let mut dbar = Vec::new();
    let mut contraction = Vec::new();
    let mut wedge_vbar = Vec::new();
    for d in -n..n {
        let src = &lays[(d + n) as usize];
        let tgt = &lays[(d + 1 + n) as usize];
        let mut dm = CMatrix::zeros(tgt.len, src.len);
        let mut cm = CMatrix::zeros(tgt.len, src.len);
        let mut wm = CMatrix::zeros(src.len, tgt.len);
        for &(rl, rr, col) in &src.parts {
            let il = identity(lb(rl).len());
            let ir = identity(rb(rr).len());
            if rl < nl {
                if let Some(row) = find(tgt, rl + 1, rr) {
                    let li = (rl + nl) as usize;
                    linalg::place(&mut dm, row, col, &kron(&l.dbar[li].matrix, &ir));
                    linalg::place(&mut cm, row, col, &kron(&l.contraction[li].matrix, &ir));
                    linalg::place(&mut wm, col, row, &kron(&l.wedge_vbar[li].matrix, &ir));
                }
            }
            if rr < nr {
                if let Some(row) = find(tgt, rl, rr + 1) {
                    let sign = if rl.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                    let block = kron(&il, &r.dbar[(rr + nr) as usize].matrix) * num_complex::Complex64::new(sign, 0.0);
                    linalg::place(&mut dm, row, col, &block);
                }
            }
        }
        dbar.push(OperatorBlock { source_degree: d, target_degree: d + 1, matrix: dm });
        contraction.push(OperatorBlock { source_degree: d, target_degree: d + 1, matrix: cm });
        wedge_vbar.push(OperatorBlock { source_degree: d + 1, target_degree: d, matrix: wm });
    }

    let mut key = l.key.clone();
    key.extend(&r.key);
    Sector { key, bases, dbar, contraction, wedge_vbar, bochner: None }
}

pub(super) fn assemble_product(
    spec: ModelManifold,
    left: &AssembledModel,
    right: &AssembledModel,
) -> Result<AssembledModel> {
    let nl = left.dim as i32;
    let nr = right.dim as i32;
    let pairs: Vec<(&Sector, &Sector)> = left
        .sectors
        .iter()
        .flat_map(|l| right.sectors.iter().map(move |r| (l, r)))
        .collect();
    let sectors: Vec<Sector> = pairs.par_iter().map(|(l, r)| product_sector(l, r, nl, nr)).collect();
    let mut blocks = left.leakage.blocks.clone();
    blocks.extend(right.leakage.blocks.iter().cloned());
    Ok(AssembledModel {
        leakage: LeakageReport { model: spec.tag(), blocks },
        dim: (nl + nr) as usize,
        spec,
        sectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cp1_model, torus_model};
    use num_complex::Complex64;

    #[test]
    fn product_degree_counts() {
        let l = cp1_model(0, 4).unwrap();
        let r = super::super::assemble(&ModelManifold::torus_without_field(Complex64::new(0.0, 1.0), 1)).unwrap();
        let p = product_model(&l, &r).unwrap();
        assert_eq!(p.dim, 2);
        assert_eq!(p.degrees().count(), 5);
        assert_eq!(p.degree_dimension(-2), l.degree_dimension(-1) * r.degree_dimension(-1));
        assert_eq!(p.total_dimension(), l.total_dimension() * r.total_dimension());
    }

    #[test]
    fn rejects_torus_with_field_on_the_right() {
        let l = cp1_model(0, 4).unwrap();
        let r = torus_model(Complex64::new(0.0, 1.0), 1, Complex64::new(1.0, 0.0)).unwrap();
        assert!(product_model(&l, &r).is_err());
    }
}
