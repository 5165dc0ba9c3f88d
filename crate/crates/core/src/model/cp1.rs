//! CP¹ with the Fubini–Study metric ρ|dz|², ρ = 4/(1+|z|²)², twisted by O(k).
//!
//! Forms of bidegree (p,q) are spanned in the affine chart by
//! z^a z̄^b (1+|z|²)^(−s) dz^p dz̄^q with s = N + p + q, 0 ≤ a ≤ s + k − 2p and
//! 0 ≤ b ≤ s − 2q. Each such span is the sum of all SU(2) types up to spin
//! N + k/2, so ∂̄ maps it into the next span exactly and commutes with the
//! orthogonal projection. Multiplication by z for i(z∂/∂z) leaves the span;
//! that part is projected and reported as leakage.
//!
//! Inner products of two monomials carry the fiber metric (1+|z|²)^(−k) and
//! reduce to Beta moments:
//! ⟨z^a z̄^b (1+x)^(−s), z^c z̄^d (1+x)^(−t)⟩ = δ_{a−b,c−d} · 2^(1−p−q) ·
//! M((a+b+c+d)/2, s + t − 2(p+q) + k + 2), with M(α, e) = ∫₀^∞ x^α (1+x)^(−e) dx
//! and the 1/(2π) volume normalization included. Within one U(1)-charge the
//! Gram matrix is factored exactly as L·D·Lᵀ, and the model works in the
//! orthogonal basis L⁻¹·(monomials), whose Gram matrix is D.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{
    AssembledModel, BlockLeakage, BochnerTerms, LeakOperator, LeakageReport, ModeLabel, ModelManifold,
    OperatorBlock, Sector, SectionBasis, SectionLabel,
};
use crate::error::{Error, Result};
use crate::exact::{self, RatMatrix};
use crate::graded_algebra::BasisLabel;
use crate::linalg::{self, CMatrix};
use crate::scalar::{rat, rat_to_f64};

/// CP¹ with O(k) and v = z ∂/∂z.
pub fn cp1_model(k: i64, cutoff: usize) -> Result<AssembledModel> {
    super::assemble(&ModelManifold::cp1(k, cutoff))
}

/// (cutoff, largest i(v) leakage norm, leaked Hilbert–Schmidt fraction of i(v)).
pub fn cp1_leakage_sequence(k: i64, cutoffs: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    cutoffs
        .iter()
        .map(|&n| {
            let m = cp1_model(k, n)?;
            Ok((
                n,
                m.leakage.max_norm_of(LeakOperator::Contraction),
                m.leakage.leaked_fraction(LeakOperator::Contraction),
            ))
        })
        .collect()
}

/// A monomial z^a z̄^b (1+|z|²)^(−weight) with a rational coefficient.
#[derive(Clone, Debug)]
struct Term {
    coeff: BigRational,
    a: usize,
    b: usize,
    weight: usize,
}

fn term(coeff: BigRational, a: usize, b: usize, weight: usize) -> Term {
    Term { coeff, a, b, weight }
}

#[derive(Clone, Copy, Debug)]
struct Moments {
    k: usize,
}

impl Moments {
    fn pair(&self, p: usize, q: usize, f: (usize, usize, usize), g: (usize, usize, usize)) -> BigRational {
        let (a, b, s) = f;
        let (c, d, t) = g;
        if a + d != b + c {
            return BigRational::zero();
        }
        let alpha = (a + b + c + d) / 2;
        let e = s + t + self.k + 2 - 2 * (p + q);
        let m = exact::moment(alpha, e).expect("weights keep every monomial integrable");
        let scale = match p + q {
            0 => rat(2),
            1 => rat(1),
            _ => BigRational::new(BigInt::one(), BigInt::from(2)),
        };
        scale * m
    }

    fn pair_terms(&self, p: usize, q: usize, x: &[Term], y: &[Term]) -> BigRational {
        let mut acc = BigRational::zero();
        for s in x {
            for t in y {
                acc += &s.coeff * &t.coeff * self.pair(p, q, (s.a, s.b, s.weight), (t.a, t.b, t.weight));
            }
        }
        acc
    }
}

/// One bidegree restricted to one charge, with its exact orthogonalization.
#[derive(Clone, Debug)]
struct Group {
    p: usize,
    q: usize,
    weight: usize,
    labels: Vec<(usize, usize)>,
    linv: RatMatrix,
    d: Vec<BigRational>,
}

impl Group {
    fn build(mom: &Moments, cutoff: usize, p: usize, q: usize, charge: i64) -> Result<Self> {
        let weight = cutoff + p + q;
        let amax = (weight + mom.k - 2 * p) as i64;
        let bmax = (weight - 2 * q) as i64;
        let labels: Vec<(usize, usize)> = (0..=amax)
            .filter_map(|a| {
                let b = a - charge;
                (0..=bmax).contains(&b).then_some((a as usize, b as usize))
            })
            .collect();
        let gram: RatMatrix = labels
            .iter()
            .map(|&(a, b)| {
                labels
                    .iter()
                    .map(|&(c, d)| mom.pair(p, q, (a, b, weight), (c, d, weight)))
                    .collect()
            })
            .collect();
        let (l, d) = exact::ldl(&gram).ok_or(Error::GramNotPositive {
            degree: q as i32 - p as i32,
            min_eigenvalue: f64::NAN,
        })?;
        Ok(Self { p, q, weight, linv: exact::unit_lower_inverse(&l), d, labels })
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn raw(&self, i: usize) -> Term {
        let (a, b) = self.labels[i];
        term(rat(1), a, b, self.weight)
    }

    fn section_labels(&self) -> Vec<SectionLabel> {
        let form = BasisLabel::new(
            if self.q == 1 { vec![0] } else { vec![] },
            if self.p == 1 { vec![0] } else { vec![] },
            0,
        );
        self.labels
            .iter()
            .map(|&(a, b)| SectionLabel { mode: ModeLabel::Monomial { a, b, weight: self.weight }, form: form.clone() })
            .collect()
    }

    fn gram(&self) -> CMatrix {
        CMatrix::from_fn(self.len(), self.len(), |i, j| {
            if i == j {
                num_complex::Complex64::new(rat_to_f64(&self.d[i]), 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Compressed operator P·O between two groups in the orthogonal bases.
struct Compressed {
    matrix: RatMatrix,
    leak_norm: f64,
    leaked_mass: f64,
    image_mass: f64,
}

fn compress(mom: &Moments, target: &Group, source: &Group, images: &[Vec<Term>], with_leak: bool) -> Compressed {
    let (tp, tq) = (target.p, target.q);
    let b: RatMatrix = (0..target.len())
        .map(|i| {
            let t = [target.raw(i)];
            images.iter().map(|img| mom.pair_terms(tp, tq, &t, img)).collect()
        })
        .collect();
    let lt_b = exact::matmul(&target.linv, &b);
    let mut a = exact::matmul(&lt_b, &exact::transpose(&source.linv));
    for (row, d) in a.iter_mut().zip(&target.d) {
        for x in row.iter_mut() {
            *x /= d;
        }
    }
    let (mut leak_norm, mut leaked_mass, mut image_mass) = (0.0, 0.0, 0.0);
    if with_leak && source.len() > 0 {
        let q: RatMatrix = images
            .iter()
            .map(|x| images.iter().map(|y| mom.pair_terms(tp, tq, x, y)).collect())
            .collect();
        let qs = exact::matmul(&exact::matmul(&source.linv, &q), &exact::transpose(&source.linv));
        let ns = source.len();
        let mut r = qs.clone();
        for j in 0..ns {
            for l in 0..ns {
                for i in 0..target.len() {
                    r[j][l] -= &a[i][j] * &a[i][l] * &target.d[i];
                }
            }
        }
        // Normalize to an orthonormal source frame.
        let scale: Vec<f64> = source.d.iter().map(|d| 1.0 / rat_to_f64(d).sqrt()).collect();
        let rf = CMatrix::from_fn(ns, ns, |j, l| {
            num_complex::Complex64::new(rat_to_f64(&r[j][l]) * scale[j] * scale[l], 0.0)
        });
        let top = linalg::hermitian_eigenvalues(&rf).last().copied().unwrap_or(0.0);
        leak_norm = top.max(0.0).sqrt();
        leaked_mass = (0..ns).map(|j| rat_to_f64(&(&r[j][j] / &source.d[j]))).sum();
        image_mass = (0..ns).map(|j| rat_to_f64(&(&qs[j][j] / &source.d[j]))).sum();
    }
    Compressed { matrix: a, leak_norm, leaked_mass, image_mass }
}

fn to_cmatrix(a: &RatMatrix, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |i, j| num_complex::Complex64::new(rat_to_f64(&a[i][j]), 0.0))
}

fn dbar_images(g: &Group) -> Vec<Vec<Term>> {
    let sign = if g.p == 1 { rat(-1) } else { rat(1) };
    let s = g.weight;
    g.labels
        .iter()
        .map(|&(a, b)| {
            let mut img = Vec::new();
            if b > 0 {
                img.push(term(&sign * rat(b as i64), a, b - 1, s + 1));
            }
            if b != s {
                img.push(term(&sign * rat(b as i64 - s as i64), a + 1, b, s + 1));
            }
            img
        })
        .collect()
}

fn contraction_images(g: &Group) -> Vec<Vec<Term>> {
    g.labels.iter().map(|&(a, b)| vec![term(rat(1), a + 1, b, g.weight)]).collect()
}

fn wedge_vbar_images(g: &Group) -> Vec<Vec<Term>> {
    g.labels.iter().map(|&(a, b)| vec![term(rat(2), a, b + 1, g.weight + 2)]).collect()
}

fn norm_sqr_images(g: &Group) -> Vec<Vec<Term>> {
    g.labels.iter().map(|&(a, b)| vec![term(rat(2), a + 1, b + 1, g.weight + 2)]).collect()
}

/// (∂̄v̄*)∧ with ∂̄v̄* = −2(1−|z|²)(1+|z|²)^(−3) dz∧dz̄.
fn curvature_images(g: &Group) -> Vec<Vec<Term>> {
    g.labels
        .iter()
        .map(|&(a, b)| vec![term(rat(-4), a, b, g.weight + 3), term(rat(2), a, b, g.weight + 2)])
        .collect()
}

fn charge_of(w: i64, p: usize, q: usize) -> i64 {
    w - p as i64 + q as i64
}

struct SectorBuild {
    sector: Sector,
    leaks: Vec<BlockLeakage>,
}

fn build_sector(mom: &Moments, cutoff: usize, w: i64) -> Result<SectorBuild> {
    let g = |p, q| Group::build(mom, cutoff, p, q, charge_of(w, p, q));
    let g00 = g(0, 0)?;
    let g10 = g(1, 0)?;
    let g01 = g(0, 1)?;
    let g11 = g(1, 1)?;
    let (n00, n10, n01, n11) = (g00.len(), g10.len(), g01.len(), g11.len());

    let basis = |degree: i32, groups: &[&Group]| {
        let elements: Vec<SectionLabel> = groups.iter().flat_map(|g| g.section_labels()).collect();
        let d = elements.len();
        let mut gram = CMatrix::zeros(d, d);
        let mut off = 0;
        for g in groups {
            linalg::place(&mut gram, off, off, &g.gram());
            off += g.len();
        }
        SectionBasis { degree, elements, gram }
    };
    let bases = vec![basis(-1, &[&g10]), basis(0, &[&g00, &g11]), basis(1, &[&g01])];

    let mut leaks = Vec::new();
    let key = vec![w];
    let mut record = |c: &Compressed, op: LeakOperator, source_degree: i32| {
        leaks.push(BlockLeakage {
            sector: key.clone(),
            operator: op,
            source_degree,
            norm: c.leak_norm,
            leaked_mass: c.leaked_mass,
            image_mass: c.image_mass,
        });
    };

    let d10 = compress(mom, &g11, &g10, &dbar_images(&g10), true);
    let d00 = compress(mom, &g01, &g00, &dbar_images(&g00), true);
    record(&d10, LeakOperator::Dbar, -1);
    record(&d00, LeakOperator::Dbar, 0);
    let c10 = compress(mom, &g00, &g10, &contraction_images(&g10), true);
    let c11 = compress(mom, &g01, &g11, &contraction_images(&g11), true);
    record(&c10, LeakOperator::Contraction, -1);
    record(&c11, LeakOperator::Contraction, 0);
    let w00 = compress(mom, &g10, &g00, &wedge_vbar_images(&g00), true);
    let w01 = compress(mom, &g11, &g01, &wedge_vbar_images(&g01), true);
    record(&w00, LeakOperator::WedgeVbar, 0);
    record(&w01, LeakOperator::WedgeVbar, 1);

    let mut dbar_m1 = CMatrix::zeros(n00 + n11, n10);
    linalg::place(&mut dbar_m1, n00, 0, &to_cmatrix(&d10.matrix, n11, n10));
    let mut dbar_0 = CMatrix::zeros(n01, n00 + n11);
    linalg::place(&mut dbar_0, 0, 0, &to_cmatrix(&d00.matrix, n01, n00));

    let mut con_m1 = CMatrix::zeros(n00 + n11, n10);
    linalg::place(&mut con_m1, 0, 0, &to_cmatrix(&c10.matrix, n00, n10));
    let mut con_0 = CMatrix::zeros(n01, n00 + n11);
    linalg::place(&mut con_0, 0, n00, &to_cmatrix(&c11.matrix, n01, n11));

    let mut wv_0 = CMatrix::zeros(n10, n00 + n11);
    linalg::place(&mut wv_0, 0, 0, &to_cmatrix(&w00.matrix, n10, n00));
    let mut wv_1 = CMatrix::zeros(n00 + n11, n01);
    linalg::place(&mut wv_1, n00, 0, &to_cmatrix(&w01.matrix, n11, n01));

    let norm = |gr: &Group| to_cmatrix(&compress(mom, gr, gr, &norm_sqr_images(gr), false).matrix, gr.len(), gr.len());
    let mut norm_0 = CMatrix::zeros(n00 + n11, n00 + n11);
    linalg::place(&mut norm_0, 0, 0, &norm(&g00));
    linalg::place(&mut norm_0, n00, n00, &norm(&g11));

    // Zero-order term on degree 0: W + D⁻¹WᵀD with W = (∂̄v̄*)∧ : (0,0) → (1,1).
    let curv = compress(mom, &g11, &g00, &curvature_images(&g00), false).matrix;
    let mut curv_adj = exact::transpose(&curv);
    for (i, row) in curv_adj.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = &*x * &g11.d[j] / &g00.d[i];
        }
    }
    let mut zero_0 = CMatrix::zeros(n00 + n11, n00 + n11);
    linalg::place(&mut zero_0, n00, 0, &to_cmatrix(&curv, n11, n00));
    linalg::place(&mut zero_0, 0, n00, &to_cmatrix(&curv_adj, n00, n11));

    let bochner = BochnerTerms {
        norm_sqr: vec![norm(&g10), norm_0, norm(&g01)],
        zero_order: vec![CMatrix::zeros(n10, n10), zero_0, CMatrix::zeros(n01, n01)],
    };
    let block = |s: i32, t: i32, matrix: CMatrix| OperatorBlock { source_degree: s, target_degree: t, matrix };
    let sector = Sector {
        key: vec![w],
        bases,
        dbar: vec![block(-1, 0, dbar_m1), block(0, 1, dbar_0)],
        contraction: vec![block(-1, 0, con_m1), block(0, 1, con_0)],
        wedge_vbar: vec![block(0, -1, wv_0), block(1, 0, wv_1)],
        bochner: Some(bochner),
    };
    Ok(SectorBuild { sector, leaks })
}

pub(super) fn assemble_cp1(spec: ModelManifold, k: i64, cutoff: usize) -> Result<AssembledModel> {
    let mom = Moments { k: k as usize };
    // Charges of the (0,0) span run over −s..=s+k; the other bidegrees shift by ±1.
    let s = (cutoff + 2) as i64;
    let weights: Vec<i64> = (-s - 1..=s + k + 1).collect();
    let built: Vec<SectorBuild> = weights
        .par_iter()
        .map(|&w| build_sector(&mom, cutoff, w))
        .collect::<Result<Vec<_>>>()?;
    let mut sectors = Vec::new();
    let mut blocks = Vec::new();
    for b in built {
        if b.sector.dimension() > 0 {
            sectors.push(b.sector);
            blocks.extend(b.leaks);
        }
    }
    Ok(AssembledModel {
        leakage: LeakageReport { model: spec.tag(), blocks },
        spec,
        dim: 1,
        sectors,
    })
}
