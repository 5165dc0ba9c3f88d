//! Closed-form Dolbeault dimensions of the desk models and of the zero sets
//! of their fields, used as ground truth for the spectral kernel counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::deformed::{CohomologyTable, TableSource};
use crate::error::{Error, Result};
use crate::model::{Factor, ModelKind, ModelManifold, VectorFieldSpec};

/// h^{p,q} for 0 ≤ p, q ≤ n, stored as `h[p][q]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleTable {
    pub n: usize,
    pub h: Vec<Vec<usize>>,
}

impl OracleTable {
    pub fn zeros(n: usize) -> Self {
        Self { n, h: vec![vec![0; n + 1]; n + 1] }
    }

    /// A reduced point: h^{0,0} = 1.
    pub fn point() -> Self {
        Self { n: 0, h: vec![vec![1]] }
    }

    pub fn get(&self, p: usize, q: usize) -> usize {
        self.h.get(p).and_then(|row| row.get(q)).copied().unwrap_or(0)
    }

    /// Σ_{q−p=r} h^{p,q}, for every r in −n..=n.
    pub fn per_r(&self) -> BTreeMap<i32, usize> {
        let n = self.n as i32;
        let mut out: BTreeMap<i32, usize> = (-n..=n).map(|r| (r, 0)).collect();
        for p in 0..=self.n {
            for q in 0..=self.n {
                *out.entry(q as i32 - p as i32).or_default() += self.get(p, q);
            }
        }
        out
    }

    fn check(&self) -> Result<()> {
        if self.h.len() != self.n + 1 || self.h.iter().any(|row| row.len() != self.n + 1) {
            return Err(Error::Fixture { name: "oracle".into(), reason: format!("table shape does not match n = {}", self.n) });
        }
        Ok(())
    }
}

/// The flat torus with trivial coefficients.
pub fn torus_table() -> OracleTable {
    OracleTable { n: 1, h: vec![vec![1, 1], vec![1, 1]] }
}

/// CP¹ with coefficients in O(k): H^{p,q} = H^q(O(k − 2p)), and
/// h⁰(O(d)) = max(d+1, 0), h¹(O(d)) = max(−d−1, 0).
pub fn cp1_table(k: i64) -> OracleTable {
    let h0 = |d: i64| (d + 1).max(0) as usize;
    let h1 = |d: i64| (-d - 1).max(0) as usize;
    OracleTable { n: 1, h: vec![vec![h0(k), h1(k)], vec![h0(k - 2), h1(k - 2)]] }
}

/// h^{p,q}(L × R) = Σ h^{a,b}(L)·h^{p−a,q−b}(R).
pub fn kunneth(left: &OracleTable, right: &OracleTable) -> OracleTable {
    let mut out = OracleTable::zeros(left.n + right.n);
    for a in 0..=left.n {
        for b in 0..=left.n {
            let l = left.get(a, b);
            if l == 0 {
                continue;
            }
            for c in 0..=right.n {
                for d in 0..=right.n {
                    out.h[a + c][b + d] += l * right.get(c, d);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetComponent {
    pub label: String,
    pub dim: usize,
    /// Rank of the coefficient bundle restricted to the component.
    pub fiber_rank: usize,
    pub table: OracleTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetDescriptor {
    pub components: Vec<ZeroSetComponent>,
}

impl ZeroSetDescriptor {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Zero set Y of the model's field, with the Hodge table of each component.
pub fn zero_set(model: &ModelManifold) -> Result<ZeroSetDescriptor> {
    model.validate()?;
    let whole = |label: &str| -> Result<ZeroSetDescriptor> {
        Ok(ZeroSetDescriptor {
            components: vec![ZeroSetComponent {
                label: label.into(),
                dim: model.dim(),
                fiber_rank: 1,
                table: model_hodge_table(model, true)?,
            }],
        })
    };
    match (&model.kind, &model.field) {
        (_, VectorFieldSpec::Zero) => whole("X"),
        (ModelKind::Torus { .. }, VectorFieldSpec::Constant { .. }) => Ok(ZeroSetDescriptor { components: vec![] }),
        (ModelKind::Cp1 { .. }, VectorFieldSpec::Linear) => Ok(ZeroSetDescriptor {
            components: ["z=0", "z=inf"]
                .iter()
                .map(|l| ZeroSetComponent { label: (*l).into(), dim: 0, fiber_rank: 1, table: OracleTable::point() })
                .collect(),
        }),
        (ModelKind::Product { left, right }, VectorFieldSpec::ProductLift { factor: Factor::Left }) => {
            let inner = zero_set(left)?;
            let right_table = model_hodge_table(right, true)?;
            Ok(ZeroSetDescriptor {
                components: inner
                    .components
                    .into_iter()
                    .map(|c| ZeroSetComponent {
                        label: format!("{}x{}", c.label, right.tag()),
                        dim: c.dim + right.dim(),
                        fiber_rank: c.fiber_rank,
                        table: kunneth(&c.table, &right_table),
                    })
                    .collect(),
            })
        }
        (kind, field) => Err(Error::UnsupportedModel(format!("no zero-set descriptor for {kind:?} with {field:?}"))),
    }
}

/// With `at_t_zero` the Hodge table of X; otherwise the Hodge numbers of the
/// zero set, summed over components (indexed by the (p, q) of each component).
pub fn model_hodge_table(model: &ModelManifold, at_t_zero: bool) -> Result<OracleTable> {
    model.validate()?;
    if !at_t_zero {
        let y = zero_set(model)?;
        let mut out = OracleTable::zeros(y.components.iter().map(|c| c.dim).max().unwrap_or(0));
        for c in &y.components {
            for p in 0..=c.table.n {
                for q in 0..=c.table.n {
                    out.h[p][q] += c.table.get(p, q);
                }
            }
        }
        return Ok(out);
    }
    match &model.kind {
        ModelKind::Torus { .. } => Ok(torus_table()),
        ModelKind::Cp1 { k } => Ok(cp1_table(*k)),
        ModelKind::Product { left, right } => Ok(kunneth(&model_hodge_table(left, true)?, &model_hodge_table(right, true)?)),
    }
}

fn as_cohomology(model: &ModelManifold, table: &OracleTable, description: String) -> CohomologyTable {
    let n = model.dim() as i32;
    let per_r = table.per_r();
    CohomologyTable {
        dims: (-n..=n).map(|r| (r, per_r.get(&r).copied().unwrap_or(0))).collect(),
        source: TableSource::Oracle { description },
        unresolved: vec![],
    }
}

/// Per-r dimensions of H^(r)(Y, ξ|_Y): the predicted deformed cohomology.
pub fn theorem1_prediction(model: &ModelManifold) -> Result<CohomologyTable> {
    let table = model_hodge_table(model, false)?;
    let y = zero_set(model)?;
    let labels: Vec<&str> = y.components.iter().map(|c| c.label.as_str()).collect();
    Ok(as_cohomology(model, &table, format!("H(Y) for {}, Y = [{}]", model.tag(), labels.join(", "))))
}

/// Per-r dimensions of the undeformed cohomology of X.
pub fn undeformed_prediction(model: &ModelManifold) -> Result<CohomologyTable> {
    let table = model_hodge_table(model, true)?;
    Ok(as_cohomology(model, &table, format!("H(X) for {}", model.tag())))
}

pub mod fixture {
    //! Frozen Hodge tables with provenance.
    //!
    //! Schema `holoeq-hodge-fixtures/v1`: `{schema, entries: [{model, k?, n, h, provenance}]}`
    //! with `model` one of `torus`, `cp1`, and `h[p][q]`.

    use serde::{Deserialize, Serialize};

    use super::{cp1_table, torus_table, OracleTable};
    use crate::error::{Error, Result};

    const TEXT: &str = include_str!("../fixtures/hodge_tables.json");
    pub const SCHEMA: &str = "holoeq-hodge-fixtures/v1";

    #[derive(Clone, Debug, Serialize, Deserialize)]
    pub struct Entry {
        pub model: String,
        #[serde(default)]
        pub k: Option<i64>,
        #[serde(flatten)]
        pub table: OracleTable,
        pub provenance: String,
    }

    #[derive(Deserialize)]
    struct File {
        schema: String,
        entries: Vec<Entry>,
    }

    fn malformed(reason: String) -> Error {
        Error::Fixture { name: "hodge_tables".into(), reason }
    }

    pub fn load() -> Result<Vec<Entry>> {
        let file: File = serde_json::from_str(TEXT).map_err(|e| malformed(e.to_string()))?;
        if file.schema != SCHEMA {
            return Err(malformed(format!("unexpected schema {}", file.schema)));
        }
        for e in &file.entries {
            e.table.check()?;
        }
        Ok(file.entries)
    }

    /// Closed form for a fixture entry.
    pub fn closed_form(entry: &Entry) -> Result<OracleTable> {
        match (entry.model.as_str(), entry.k) {
            ("torus", None) => Ok(torus_table()),
            ("cp1", Some(k)) => Ok(cp1_table(k)),
            (m, k) => Err(malformed(format!("unknown entry {m} (k = {k:?})"))),
        }
    }

    /// Every frozen entry equals its closed form.
    pub fn verify() -> Result<usize> {
        let entries = load()?;
        for e in &entries {
            if closed_form(e)? != e.table {
                return Err(malformed(format!("entry {} k={:?} disagrees with the closed form", e.model, e.k)));
            }
        }
        Ok(entries.len())
    }
}
