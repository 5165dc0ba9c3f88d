//! Matrix-container export of assembled operator blocks.
//!
//! Schema `holoeq-blocks/v1` (JSON):
//! `{ schema, model, leakage_max, blocks: [ { sector, operator, source_degree,
//! target_degree, rows, cols, source_basis, target_basis, data } ] }` where
//! `data` is the dense complex matrix in row-major order as `[re, im]` pairs
//! and the basis arrays hold section-label strings. Gram matrices appear as
//! blocks with operator `gram` and equal source and target degrees.

use serde::{Deserialize, Serialize};

use super::{AssembledModel, OperatorBlock, SectionBasis};
use crate::linalg::CMatrix;

pub const BLOCKS_SCHEMA: &str = "holoeq-blocks/v1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExportedBlock {
    pub sector: Vec<i64>,
    pub operator: String,
    pub source_degree: i32,
    pub target_degree: i32,
    pub rows: usize,
    pub cols: usize,
    pub source_basis: Vec<String>,
    pub target_basis: Vec<String>,
    pub data: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlockContainer {
    pub schema: String,
    pub model: String,
    pub leakage_max: f64,
    pub blocks: Vec<ExportedBlock>,
}

impl ExportedBlock {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            num_complex::Complex64::new(re, im)
        })
    }
}

fn names(b: &SectionBasis) -> Vec<String> {
    b.elements.iter().map(|e| e.to_string()).collect()
}

fn flatten(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

/// Collect every block of the model, optionally only the listed sectors.
pub fn export_blocks(model: &AssembledModel, sectors: Option<&[Vec<i64>]>) -> BlockContainer {
    let n = model.dim as i32;
    let mut blocks = Vec::new();
    for s in &model.sectors {
        if let Some(keep) = sectors {
            if !keep.contains(&s.key) {
                continue;
            }
        }
        let basis = |r: i32| &s.bases[(r + n) as usize];
        for b in &s.bases {
            blocks.push(ExportedBlock {
                sector: s.key.clone(),
                operator: "gram".into(),
                source_degree: b.degree,
                target_degree: b.degree,
                rows: b.len(),
                cols: b.len(),
                source_basis: names(b),
                target_basis: names(b),
                data: flatten(&b.gram),
            });
        }
        let mut push = |name: &str, ops: &[OperatorBlock]| {
            for op in ops {
                blocks.push(ExportedBlock {
                    sector: s.key.clone(),
                    operator: name.into(),
                    source_degree: op.source_degree,
                    target_degree: op.target_degree,
                    rows: op.matrix.nrows(),
                    cols: op.matrix.ncols(),
                    source_basis: names(basis(op.source_degree)),
                    target_basis: names(basis(op.target_degree)),
                    data: flatten(&op.matrix),
                });
            }
        };
        push("dbar", &s.dbar);
        push("contraction", &s.contraction);
        push("wedge_vbar", &s.wedge_vbar);
    }
    BlockContainer {
        schema: BLOCKS_SCHEMA.into(),
        model: model.spec.tag(),
        leakage_max: model.leakage.max_norm(),
        blocks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::torus_model;
    use num_complex::Complex64;

    #[test]
    fn roundtrip_preserves_matrices() {
        let m = torus_model(Complex64::new(0.0, 1.0), 1, Complex64::new(1.0, 0.5)).unwrap();
        let key = vec![vec![1, 0]];
        let c = export_blocks(&m, Some(&key));
        let text = serde_json::to_string(&c).unwrap();
        let back: BlockContainer = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let dbar = back.blocks.iter().find(|b| b.operator == "dbar" && b.source_degree == 0).unwrap();
        let sector = m.sectors.iter().find(|s| s.key == key[0]).unwrap();
        assert_eq!(dbar.matrix(), sector.dbar[1].matrix);
        assert_eq!(dbar.target_basis, vec!["F(1,0) 1|dzbar1|e0".to_string()]);
    }
}
