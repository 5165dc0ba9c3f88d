//! Pointwise model of Λ^q(T̄*X) ⊗ Λ^p(T*X) ⊗ ξ in a unitary frame.
//!
//! Generators are the unitary coframe: `holo[j]` stands for the (1,0)-form
//! dual to w_j and `anti[j]` for the (0,1)-form dual to w̄_j. A basis monomial
//! is written with all holomorphic factors first, each group in increasing
//! index order, so `holo={1}, anti={1}` is dz¹∧dz̄¹. The Z-grading is
//! r = q − p.
//!
//! The metric duality U ↦ U* = g(U, ·) is complex-linear in U: for
//! U = Σ uʲ w_j we get U* = Σ uʲ · anti[j], and for Ū = Σ cⱼ w̄_j we get
//! Ū* = Σ cⱼ · holo[j]. With this choice c(U)† = −c(Ū) and the n = 1
//! anticommutator tables in `fixtures/clifford_n1.json` hold exactly.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest ambient dimension the bitmask encoding supports.
pub const MAX_DIM: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BiDegree {
    pub p: usize,
    pub q: usize,
}

impl BiDegree {
    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    /// Z-degree r = q − p.
    pub fn r(&self) -> i32 {
        self.q as i32 - self.p as i32
    }

    pub fn total(&self) -> usize {
        self.p + self.q
    }
}

/// One exterior monomial with a bundle fiber index.
///
/// Field order gives the derived ordering: lexicographic on (anti, holo, fiber).
/// Indices are 0-based internally and printed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub anti: Vec<u8>,
    pub holo: Vec<u8>,
    pub fiber: usize,
}

impl BasisLabel {
    pub fn new(mut anti: Vec<u8>, mut holo: Vec<u8>, fiber: usize) -> Self {
        anti.sort_unstable();
        anti.dedup();
        holo.sort_unstable();
        holo.dedup();
        Self { anti, holo, fiber }
    }

    pub fn scalar() -> Self {
        Self::new(vec![], vec![], 0)
    }

    pub fn bidegree(&self) -> BiDegree {
        BiDegree::new(self.holo.len(), self.anti.len())
    }

    pub fn degree(&self) -> i32 {
        self.bidegree().r()
    }

    pub fn form_degree(&self) -> usize {
        self.anti.len() + self.holo.len()
    }

    fn mask(&self, n: usize) -> u32 {
        let mut m = 0u32;
        for &j in &self.holo {
            m |= 1 << j;
        }
        for &j in &self.anti {
            m |= 1 << (n + j as usize);
        }
        m
    }

    fn from_mask(mask: u32, n: usize, fiber: usize) -> Self {
        let holo = (0..n).filter(|&j| mask & (1 << j) != 0).map(|j| j as u8).collect();
        let anti = (0..n)
            .filter(|&j| mask & (1 << (n + j)) != 0)
            .map(|j| j as u8)
            .collect();
        Self { anti, holo, fiber }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |prefix: &str, idx: &[u8]| {
            if idx.is_empty() {
                "1".to_string()
            } else {
                idx.iter()
                    .map(|j| format!("{prefix}{}", j + 1))
                    .collect::<Vec<_>>()
                    .join("^")
            }
        };
        write!(f, "{}|{}|e{}", part("dz", &self.holo), part("dzbar", &self.anti), self.fiber)
    }
}

/// Labels of one Z-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeGroup {
    pub degree: i32,
    pub labels: Vec<BasisLabel>,
}

/// All 4ⁿ·rank labels in lexicographic order.
pub fn all_labels(n: usize, rank: usize) -> Vec<BasisLabel> {
    assert!(n <= MAX_DIM, "ambient dimension {n} exceeds {MAX_DIM}");
    let mut out = Vec::with_capacity((1usize << (2 * n)) * rank);
    for mask in 0u32..(1u32 << (2 * n)) {
        for fiber in 0..rank {
            out.push(BasisLabel::from_mask(mask, n, fiber));
        }
    }
    out.sort();
    out
}

/// Basis labels grouped by Z-degree, ascending in r.
pub fn enumerate_basis(n: usize, rank: usize) -> Result<Vec<DegreeGroup>> {
    if n == 0 || n > MAX_DIM {
        return Err(crate::error::invalid("n", format!("need 1 <= n <= {MAX_DIM}, got {n}")));
    }
    if rank == 0 {
        return Err(crate::error::invalid("rank", "fiber rank must be >= 1"));
    }
    let mut groups: BTreeMap<i32, Vec<BasisLabel>> = BTreeMap::new();
    for label in all_labels(n, rank) {
        groups.entry(label.degree()).or_default().push(label);
    }
    Ok(groups
        .into_iter()
        .map(|(degree, labels)| DegreeGroup { degree, labels })
        .collect())
}

/// A finite linear combination of basis labels.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement<S: Scalar> {
    n: usize,
    rank: usize,
    terms: BTreeMap<BasisLabel, S>,
}

impl<S: Scalar> AlgebraElement<S> {
    pub fn zero(n: usize, rank: usize) -> Self {
        Self { n, rank, terms: BTreeMap::new() }
    }

    pub fn basis(n: usize, rank: usize, label: BasisLabel) -> Self {
        let mut e = Self::zero(n, rank);
        e.add_term(label, S::one());
        e
    }

    /// The constant 1 (scalar label, fiber 0).
    pub fn one(n: usize) -> Self {
        Self::basis(n, 1, BasisLabel::scalar())
    }

    /// dz̄ʲ (0-based `j`).
    pub fn anti_generator(n: usize, j: usize) -> Self {
        Self::basis(n, 1, BasisLabel::new(vec![j as u8], vec![], 0))
    }

    /// dzʲ (0-based `j`).
    pub fn holo_generator(n: usize, j: usize) -> Self {
        Self::basis(n, 1, BasisLabel::new(vec![], vec![j as u8], 0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, label: &BasisLabel) -> S {
        self.terms.get(label).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, label: BasisLabel, coeff: S) {
        debug_assert!(label.fiber < self.rank);
        let slot = self.terms.entry(label.clone()).or_insert_with(S::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&label);
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.n, self.rank);
        for (l, v) in &self.terms {
            out.add_term(l.clone(), c.clone() * v.clone());
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        check_dims(self.n, other.n)?;
        let mut out = self.clone();
        out.rank = self.rank.max(other.rank);
        for (l, v) in &other.terms {
            out.add_term(l.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scale(&(-S::one())))
    }

    /// Hermitian pairing in the orthonormal monomial basis, linear in `self`.
    pub fn inner(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for (l, v) in &self.terms {
            if let Some(w) = other.terms.get(l) {
                acc += v.clone() * w.conj();
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> S {
        self.inner(self)
    }

    /// Keep only the terms whose label satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&BasisLabel) -> bool) -> Self {
        let mut out = Self::zero(self.n, self.rank);
        for (l, v) in &self.terms {
            if keep(l) {
                out.add_term(l.clone(), v.clone());
            }
        }
        out
    }

    /// Float mirror of an element.
    pub fn to_float(&self) -> AlgebraElement<num_complex::Complex64> {
        let mut out = AlgebraElement::zero(self.n, self.rank);
        for (l, v) in &self.terms {
            out.add_term(l.clone(), v.to_c64());
        }
        out
    }

    /// Coefficient vector in the order of `all_labels(n, rank)`.
    pub fn to_vector(&self) -> Vec<S> {
        all_labels(self.n, self.rank)
            .iter()
            .map(|l| self.coefficient(l))
            .collect()
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch { left: a, right: b })
    } else {
        Ok(())
    }
}

/// Sign and product mask of two monomials, or `None` if they share a factor.
fn monomial_product(a: u32, b: u32) -> Option<(bool, u32)> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some((swaps % 2 == 1, a | b))
}

/// Exterior product. The fiber of the result comes from whichever operand
/// has rank > 1; the other must be a pure form.
pub fn wedge<S: Scalar>(a: &AlgebraElement<S>, b: &AlgebraElement<S>) -> Result<AlgebraElement<S>> {
    check_dims(a.n, b.n)?;
    if a.rank > 1 && b.rank > 1 {
        return Err(Error::FiberConflict { left: a.rank, right: b.rank });
    }
    let n = a.n;
    let rank = a.rank.max(b.rank);
    let mut out = AlgebraElement::zero(n, rank);
    for (la, va) in &a.terms {
        for (lb, vb) in &b.terms {
            if let Some((negative, mask)) = monomial_product(la.mask(n), lb.mask(n)) {
                let fiber = la.fiber.max(lb.fiber);
                let mut c = va.clone() * vb.clone();
                if negative {
                    c = -c;
                }
                out.add_term(BasisLabel::from_mask(mask, n, fiber), c);
            }
        }
    }
    Ok(out)
}

/// A complexified tangent vector in the unitary frame: Σ cⱼ w_j when
/// `conjugated == false`, Σ cⱼ w̄_j when `conjugated == true`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<S: Scalar> {
    pub components: Vec<S>,
    pub conjugated: bool,
}

impl<S: Scalar> TangentVector<S> {
    pub fn holomorphic(components: Vec<S>) -> Self {
        Self { components, conjugated: false }
    }

    pub fn antiholomorphic(components: Vec<S>) -> Self {
        Self { components, conjugated: true }
    }

    /// The frame vector w_j (or w̄_j).
    pub fn unit(n: usize, j: usize, conjugated: bool) -> Self {
        let mut components = vec![S::zero(); n];
        components[j] = S::one();
        Self { components, conjugated }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Complex conjugate vector: ū has conjugated components and flipped type.
    pub fn bar(&self) -> Self {
        Self {
            components: self.components.iter().map(|c| c.conj()).collect(),
            conjugated: !self.conjugated,
        }
    }

    /// |u|² in the unitary frame.
    pub fn norm_sqr(&self) -> S {
        self.components
            .iter()
            .fold(S::zero(), |acc, c| acc + c.clone() * c.conj())
    }

    /// The metric dual U* = g(U, ·), a 1-form of the opposite type.
    pub fn dual_form(&self) -> AlgebraElement<S> {
        let n = self.dim();
        let mut out = AlgebraElement::zero(n, 1);
        for (j, c) in self.components.iter().enumerate() {
            let label = if self.conjugated {
                BasisLabel::new(vec![], vec![j as u8], 0)
            } else {
                BasisLabel::new(vec![j as u8], vec![], 0)
            };
            out.add_term(label, c.clone());
        }
        out
    }
}

/// Interior product i(u): pairs (1,0)-vectors with dz factors and
/// (0,1)-vectors with dz̄ factors, ⟨dzʲ, w_k⟩ = δⱼₖ.
pub fn contract<S: Scalar>(u: &TangentVector<S>, a: &AlgebraElement<S>) -> Result<AlgebraElement<S>> {
    check_dims(u.dim(), a.n)?;
    let n = a.n;
    let mut out = AlgebraElement::zero(n, a.rank);
    for (label, v) in &a.terms {
        let mask = label.mask(n);
        for (j, c) in u.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let bit = if u.conjugated { n + j } else { j };
            if mask & (1 << bit) == 0 {
                continue;
            }
            let before = (mask & ((1u32 << bit) - 1)).count_ones();
            let mut coeff = c.clone() * v.clone();
            if before % 2 == 1 {
                coeff = -coeff;
            }
            out.add_term(BasisLabel::from_mask(mask ^ (1 << bit), n, label.fiber), coeff);
        }
    }
    Ok(out)
}

/// Left multiplication by u*: the adjoint of contraction by ū.
pub fn wedge_dual<S: Scalar>(u: &TangentVector<S>, a: &AlgebraElement<S>) -> Result<AlgebraElement<S>> {
    wedge(&u.dual_form(), a)
}

/// Matrix of a linear map on the full label basis of (n, rank).
pub fn operator_matrix<S: Scalar>(
    n: usize,
    rank: usize,
    f: impl Fn(&AlgebraElement<S>) -> Result<AlgebraElement<S>>,
) -> Result<DMatrix<S>> {
    let labels = all_labels(n, rank);
    let index: BTreeMap<&BasisLabel, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut m = DMatrix::from_element(labels.len(), labels.len(), S::zero());
    for (col, label) in labels.iter().enumerate() {
        let image = f(&AlgebraElement::basis(n, rank, label.clone()))?;
        for (l, v) in image.terms() {
            m[(index[l], col)] = v.clone();
        }
    }
    Ok(m)
}

/// Clifford action on the Λ(T̄*X) factor: c(U) = √2 U*∧ for U of type (1,0),
/// c(Ū) = −√2 i(Ū) for type (0,1).
pub fn clifford_c<S: Scalar>(u: &TangentVector<S>, rank: usize) -> Result<DMatrix<S>> {
    let n = u.dim();
    let s2 = S::sqrt2();
    if u.conjugated {
        operator_matrix(n, rank, |a| Ok(contract(u, a)?.scale(&(-s2.clone()))))
    } else {
        operator_matrix(n, rank, |a| Ok(wedge_dual(u, a)?.scale(&s2)))
    }
}

/// Clifford action on the Λ(T*X) factor: ĉ(U) = −√−2 i(U) for U of type (1,0),
/// ĉ(Ū) = −√−2 Ū*∧ for type (0,1).
pub fn clifford_hat_c<S: Scalar>(u: &TangentVector<S>, rank: usize) -> Result<DMatrix<S>> {
    let n = u.dim();
    let c = -S::sqrt_minus2();
    if u.conjugated {
        operator_matrix(n, rank, |a| Ok(wedge_dual(u, a)?.scale(&c)))
    } else {
        operator_matrix(n, rank, |a| Ok(contract(u, a)?.scale(&c)))
    }
}

/// Clifford action of a general complex vector given by its (1,0) and (0,1) parts.
pub fn clifford_c_mixed<S: Scalar>(
    holo: &TangentVector<S>,
    anti: &TangentVector<S>,
    rank: usize,
) -> Result<DMatrix<S>> {
    Ok(clifford_c(holo, rank)? + clifford_c(anti, rank)?)
}

pub fn anticommutator<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>) -> DMatrix<S> {
    a * b + b * a
}

pub fn commutator<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>) -> DMatrix<S> {
    a * b - b * a
}

pub fn adjoint<S: Scalar>(a: &DMatrix<S>) -> DMatrix<S> {
    a.transpose().map(|x| x.conj())
}

/// Smallest `s` with `m == s·I`, if `m` is a scalar matrix.
pub fn as_scalar_multiple<S: Scalar>(m: &DMatrix<S>) -> Option<S> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return None;
    }
    let s = m[(0, 0)].clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let expected = if i == j { s.clone() } else { S::zero() };
            if m[(i, j)] != expected {
                return None;
            }
        }
    }
    Some(s)
}

/// Operator names used by the golden tables, evaluated on the frame of the
/// first coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordGenerator {
    #[serde(rename = "c(w)")]
    C,
    #[serde(rename = "c(wbar)")]
    CBar,
    #[serde(rename = "chat(w)")]
    CHat,
    #[serde(rename = "chat(wbar)")]
    CHatBar,
}

impl CliffordGenerator {
    pub const ALL: [CliffordGenerator; 4] = [Self::C, Self::CBar, Self::CHat, Self::CHatBar];

    pub fn matrix<S: Scalar>(&self, n: usize, j: usize, rank: usize) -> Result<DMatrix<S>> {
        match self {
            Self::C => clifford_c(&TangentVector::unit(n, j, false), rank),
            Self::CBar => clifford_c(&TangentVector::unit(n, j, true), rank),
            Self::CHat => clifford_hat_c(&TangentVector::unit(n, j, false), rank),
            Self::CHatBar => clifford_hat_c(&TangentVector::unit(n, j, true), rank),
        }
    }
}

impl fmt::Display for CliffordGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::C => "c(w)",
            Self::CBar => "c(wbar)",
            Self::CHat => "chat(w)",
            Self::CHatBar => "chat(wbar)",
        };
        f.write_str(s)
    }
}

pub mod golden {
    //! Committed n = 1 anticommutator tables.
    //!
    //! Schema `clifford-anticommutators/v1`: a JSON object with `schema`,
    //! `n`, `basis` (label strings in `all_labels` order) and `entries`, each
    //! `{left, right, kind, scalar}` where `kind` is `anticommutator` and
    //! `scalar` is `[re_rational, im_rational, re_sqrt2, im_sqrt2]` as
    //! decimal fraction strings; the product must equal `scalar · I`.

    use serde::{Deserialize, Serialize};

    use super::*;
    use crate::scalar::{ExactScalar, GaussRational};

    pub const CLIFFORD_N1: &str = include_str!("../fixtures/clifford_n1.json");

    #[derive(Clone, Debug, Serialize, Deserialize)]
    pub struct GoldenEntry {
        pub left: CliffordGenerator,
        pub right: CliffordGenerator,
        pub kind: String,
        pub scalar: [String; 4],
    }

    #[derive(Clone, Debug, Serialize, Deserialize)]
    pub struct GoldenTable {
        pub schema: String,
        pub n: usize,
        pub basis: Vec<String>,
        pub entries: Vec<GoldenEntry>,
    }

    pub fn parse_scalar(parts: &[String; 4]) -> Result<ExactScalar> {
        let p = |s: &str| {
            s.parse::<num_rational::BigRational>().map_err(|e| Error::Fixture {
                name: "clifford_n1".into(),
                reason: format!("bad rational `{s}`: {e}"),
            })
        };
        Ok(ExactScalar::new(
            GaussRational::new(p(&parts[0])?, p(&parts[1])?),
            GaussRational::new(p(&parts[2])?, p(&parts[3])?),
        ))
    }

    pub fn load() -> Result<GoldenTable> {
        serde_json::from_str(CLIFFORD_N1).map_err(|e| Error::Fixture {
            name: "clifford_n1".into(),
            reason: e.to_string(),
        })
    }

    /// Recompute every anticommutator of the table from the operator definitions.
    pub fn compute(n: usize) -> Result<Vec<(CliffordGenerator, CliffordGenerator, Option<ExactScalar>)>> {
        let mut out = Vec::new();
        for (i, a) in CliffordGenerator::ALL.iter().enumerate() {
            for b in &CliffordGenerator::ALL[i..] {
                let ma: DMatrix<ExactScalar> = a.matrix(n, 0, 1)?;
                let mb: DMatrix<ExactScalar> = b.matrix(n, 0, 1)?;
                out.push((*a, *b, as_scalar_multiple(&anticommutator(&ma, &mb))));
            }
        }
        Ok(out)
    }

    /// Check the committed table against the definitions; returns mismatches.
    pub fn verify() -> Result<Vec<String>> {
        let table = load()?;
        let mut problems = Vec::new();
        if table.schema != "clifford-anticommutators/v1" {
            problems.push(format!("unexpected schema {}", table.schema));
        }
        let labels: Vec<String> = all_labels(table.n, 1).iter().map(|l| l.to_string()).collect();
        if labels != table.basis {
            problems.push(format!("basis order differs: {:?}", labels));
        }
        let computed = compute(table.n)?;
        for entry in &table.entries {
            let expected = parse_scalar(&entry.scalar)?;
            let found = computed
                .iter()
                .find(|(a, b, _)| {
                    (*a == entry.left && *b == entry.right) || (*a == entry.right && *b == entry.left)
                })
                .and_then(|(_, _, s)| s.clone());
            match found {
                Some(s) if s == expected => {}
                other => problems.push(format!(
                    "{{{}, {}}}: table {} computed {:?}",
                    entry.left,
                    entry.right,
                    expected,
                    other.map(|s| s.to_string())
                )),
            }
        }
        if table.entries.len() != computed.len() {
            problems.push(format!("table has {} entries, expected {}", table.entries.len(), computed.len()));
        }
        Ok(problems)
    }
}

pub mod identities {
    //! Exact identity sweep over every basis monomial for small n.

    use num_complex::Complex64;
    use num_traits::Zero;
    use serde::Serialize;

    use super::*;
    use crate::scalar::{ExactScalar, GaussRational};

    #[derive(Clone, Debug, Default, Serialize)]
    pub struct IdentityReport {
        pub max_n: usize,
        pub checks: usize,
        /// Largest entrywise gap between float and exact Clifford matrices.
        pub mirror_gap: f64,
        pub failures: Vec<String>,
    }

    impl IdentityReport {
        pub fn passed(&self) -> bool {
            self.failures.is_empty() && self.mirror_gap <= 1e-12
        }
    }

    /// Frame vectors plus one vector with Gaussian-rational components.
    fn samples(n: usize) -> Vec<TangentVector<ExactScalar>> {
        let mut out = Vec::new();
        for conjugated in [false, true] {
            out.extend((0..n).map(|j| TangentVector::unit(n, j, conjugated)));
            let comps = (0..n)
                .map(|j| {
                    ExactScalar::new(GaussRational::from_ints(1 + j as i64, -2), GaussRational::from_ints(j as i64, 1))
                })
                .collect();
            out.push(TangentVector { components: comps, conjugated });
        }
        out
    }

    fn gap(a: &DMatrix<Complex64>, b: &DMatrix<ExactScalar>) -> f64 {
        a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y.to_c64()).norm()))
    }

    /// Antiderivation, i(u)² = 0, u*∧u* = 0, c(u)† = −c(ū), ĉ(u)† = −ĉ(ū)
    /// and the frame anticommutators, for 1 ≤ n ≤ `max_n`.
    pub fn run(max_n: usize) -> Result<IdentityReport> {
        let mut rep = IdentityReport { max_n, ..Default::default() };
        let fail = |rep: &mut IdentityReport, ok: bool, what: String| {
            rep.checks += 1;
            if !ok {
                rep.failures.push(what);
            }
        };
        let minus_one = ExactScalar::from_ratio(-1, 1);
        for n in 1..=max_n {
            let labels = all_labels(n, 1);
            let basis: Vec<AlgebraElement<ExactScalar>> =
                labels.iter().map(|l| AlgebraElement::basis(n, 1, l.clone())).collect();
            for u in samples(n) {
                for (a, la) in basis.iter().zip(&labels) {
                    let ia = contract(&u, a)?;
                    fail(&mut rep, contract(&u, &ia)?.is_zero(), format!("i(u)^2 on {la} (n={n})"));
                    for b in &basis {
                        let lhs = contract(&u, &wedge(a, b)?)?;
                        let mut second = wedge(a, &contract(&u, b)?)?;
                        if la.form_degree() % 2 == 1 {
                            second = second.scale(&minus_one);
                        }
                        let rhs = wedge(&ia, b)?.plus(&second)?;
                        fail(&mut rep, lhs == rhs, format!("antiderivation on {la} (n={n})"));
                    }
                }
                let du = u.dual_form();
                fail(&mut rep, wedge(&du, &du)?.is_zero(), format!("u*^u* (n={n})"));
                let c = clifford_c(&u, 1)?;
                let h = clifford_hat_c(&u, 1)?;
                fail(&mut rep, adjoint(&c) == -clifford_c(&u.bar(), 1)?, format!("c(u)^dagger (n={n})"));
                fail(&mut rep, adjoint(&h) == -clifford_hat_c(&u.bar(), 1)?, format!("chat(u)^dagger (n={n})"));
                let uf = TangentVector {
                    components: u.components.iter().map(|x| x.to_c64()).collect(),
                    conjugated: u.conjugated,
                };
                rep.mirror_gap = rep.mirror_gap.max(gap(&clifford_c(&uf, 1)?, &c)).max(gap(&clifford_hat_c(&uf, 1)?, &h));
            }
            // {c(w_i), c(w̄_j)} = {ĉ(w_i), ĉ(w̄_j)} = −2δ_ij; every other pair anticommutes.
            let dim = labels.len();
            for i in 0..n {
                for j in 0..n {
                    for (a, ga) in CliffordGenerator::ALL.iter().enumerate() {
                        for (b, gb) in CliffordGenerator::ALL.iter().enumerate() {
                            let ma: DMatrix<ExactScalar> = ga.matrix(n, i, 1)?;
                            let mb: DMatrix<ExactScalar> = gb.matrix(n, j, 1)?;
                            let paired = i == j && a / 2 == b / 2 && a != b;
                            let want = if paired {
                                DMatrix::identity(dim, dim) * ExactScalar::from_ratio(-2, 1)
                            } else {
                                DMatrix::from_element(dim, dim, ExactScalar::zero())
                            };
                            fail(&mut rep, anticommutator(&ma, &mb) == want, format!("{{{ga}_{i}, {gb}_{j}}} (n={n})"));
                        }
                    }
                }
            }
        }
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactScalar;
    use num_complex::Complex64;
    use num_traits::{One, Zero};

    type E = AlgebraElement<ExactScalar>;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn n1_basis_order_and_degrees() {
        let labels = all_labels(1, 1);
        let shown: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(shown, ["1|1|e0", "dz1|1|e0", "1|dzbar1|e0", "dz1|dzbar1|e0"]);
        let degrees: Vec<i32> = labels.iter().map(|l| l.degree()).collect();
        assert_eq!(degrees, [0, -1, 1, 0]);
        let groups = enumerate_basis(1, 1).unwrap();
        let zero = groups.iter().find(|g| g.degree == 0).unwrap();
        assert_eq!(zero.labels.len(), 2);
    }

    #[test]
    fn degree_group_sizes_match_binomial_counts() {
        for n in 1..=3 {
            for rank in 1..=2 {
                let groups = enumerate_basis(n, rank).unwrap();
                let total: usize = groups.iter().map(|g| g.labels.len()).sum();
                assert_eq!(total, (1 << (2 * n)) * rank);
                for g in &groups {
                    let mut expected = 0;
                    for p in 0..=n {
                        for q in 0..=n {
                            if q as i32 - p as i32 == g.degree {
                                expected += binom(n, p) * binom(n, q);
                            }
                        }
                    }
                    assert_eq!(g.labels.len(), expected * rank, "n={n} r={}", g.degree);
                }
            }
        }
        let n2 = enumerate_basis(2, 1).unwrap();
        assert_eq!(n2.iter().find(|g| g.degree == 0).unwrap().labels.len(), 6);
    }

    #[test]
    fn enumerate_rejects_bad_input() {
        assert!(enumerate_basis(0, 1).is_err());
        assert!(enumerate_basis(1, 0).is_err());
    }

    #[test]
    fn wedge_examples() {
        let dz = E::holo_generator(1, 0);
        let dzb = E::anti_generator(1, 0);
        assert!(wedge(&dz, &dz).unwrap().is_zero());
        let top = BasisLabel::new(vec![0], vec![0], 0);
        assert_eq!(wedge(&dz, &dzb).unwrap().coefficient(&top), ExactScalar::one());
        assert_eq!(wedge(&dzb, &dz).unwrap().coefficient(&top), -ExactScalar::one());
        let a = dz.plus(&dzb).unwrap();
        let b = dz.minus(&dzb).unwrap();
        let prod = wedge(&a, &b).unwrap();
        assert_eq!(prod.len(), 1);
        assert_eq!(prod.coefficient(&top), ExactScalar::from_i64(-2));
    }

    #[test]
    fn wedge_dimension_and_fiber_errors() {
        let a = E::one(1);
        let b = E::one(2);
        assert!(matches!(wedge(&a, &b), Err(Error::DimensionMismatch { .. })));
        let f1 = E::basis(1, 2, BasisLabel::new(vec![], vec![], 1));
        assert!(matches!(wedge(&f1, &f1), Err(Error::FiberConflict { .. })));
        let ok = wedge(&f1, &E::anti_generator(1, 0)).unwrap();
        assert_eq!(ok.terms().next().unwrap().0.fiber, 1);
    }

    #[test]
    fn contraction_examples() {
        let u = TangentVector::<ExactScalar>::unit(1, 0, false);
        let dz = E::holo_generator(1, 0);
        let dzb = E::anti_generator(1, 0);
        assert_eq!(contract(&u, &dz).unwrap(), E::one(1));
        assert!(contract(&u, &dzb).unwrap().is_zero());
        let top = wedge(&dz, &dzb).unwrap();
        // i(∂z)(dz∧dz̄) = dz̄
        assert_eq!(contract(&u, &top).unwrap(), dzb);
    }

    #[test]
    fn contraction_dimension_error() {
        let u = TangentVector::<ExactScalar>::unit(2, 0, false);
        assert!(contract(&u, &E::one(1)).is_err());
    }

    #[test]
    fn grading_shifts() {
        for l in all_labels(2, 1) {
            let e = E::basis(2, 1, l.clone());
            for j in 0..2 {
                for t in wedge(&E::anti_generator(2, j), &e).unwrap().terms() {
                    assert_eq!(t.0.degree(), l.degree() + 1);
                }
                for t in wedge(&E::holo_generator(2, j), &e).unwrap().terms() {
                    assert_eq!(t.0.degree(), l.degree() - 1);
                }
            }
        }
    }

    #[test]
    fn clifford_examples_n1() {
        let w = TangentVector::<ExactScalar>::unit(1, 0, false);
        let c = clifford_c(&w, 1).unwrap();
        // c(w)·1 = √2 dz̄
        assert_eq!(c[(2, 0)], ExactScalar::sqrt2());
        let ch = clifford_hat_c(&w, 1).unwrap();
        assert!(ch.column(0).iter().all(|x| x.is_zero()));
        assert_eq!(ch[(0, 1)], -ExactScalar::sqrt_minus2());
        assert!((&c * &c).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn golden_table_holds() {
        let problems = golden::verify().unwrap();
        assert!(problems.is_empty(), "{problems:?}");
    }

    #[test]
    fn float_mirror_agrees() {
        for g in CliffordGenerator::ALL {
            let exact: DMatrix<ExactScalar> = g.matrix(2, 1, 1).unwrap();
            let float: DMatrix<Complex64> = g.matrix(2, 1, 1).unwrap();
            let diff = exact.map(|x| x.to_c64()) - float;
            assert!(diff.iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn dual_form_of_zero_vector_is_zero() {
        let u = TangentVector::<ExactScalar>::holomorphic(vec![ExactScalar::zero(); 2]);
        assert!(u.dual_form().is_zero());
    }
}
