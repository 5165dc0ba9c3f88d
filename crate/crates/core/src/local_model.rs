//! The fiberwise model operator on Cᵐ,
//!
//!   H = −4Σ∂²/∂z_α∂z̄_α + T²|Z|² + K,
//!   K = −√−1·T·Σ_α (c(w̄_α)ĉ(w̃_α) + c(w_α)ĉ(w̄̃_α)),
//!
//! acting on functions with values in the 4ᵐ-dimensional exterior algebra
//! of `graded_algebra` with n = m. The scalar part is a 2m-dimensional
//! oscillator −Δ + T²|x|², and K is constant, so the spectrum splits into
//! sums. Its kernel is spanned by β = exp(θ − T|Z|²/2) with θ = Σ w*∧w̄̃*.
//!
//! Also here: the cutoff bump γ, the normalization α_T and the isometry
//! defect of u ↦ (2ᵐα_T)^{−1/2} γ_ε(Z) u ⊗ β.

use std::f64::consts::PI;
use std::io::Write;
use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deformed::{cluster, ThresholdRule};
use crate::error::{invalid, Error, Result};
use crate::graded_algebra::{
    clifford_c, clifford_hat_c, wedge, AlgebraElement, BasisLabel, TangentVector,
};
use crate::linalg::{self, CMatrix};
use crate::scalar::ExactScalar;

/// Largest dense Galerkin matrix assembled by [`galerkin_matrix`].
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorModel {
    pub m: usize,
    pub t: f64,
    /// Hermite functions kept per real coordinate.
    pub cutoff: usize,
}

impl OscillatorModel {
    pub fn new(m: usize, t: f64, cutoff: usize) -> Result<Self> {
        let model = Self { m, t, cutoff };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > 3 {
            return Err(invalid("m", format!("need 1 <= m <= 3, got {}", self.m)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(invalid("t", format!("must be positive, got {}", self.t)));
        }
        if self.cutoff < 2 {
            return Err(invalid("cutoff", format!("need at least 2, got {}", self.cutoff)));
        }
        Ok(())
    }

    pub fn fiber_dim(&self) -> usize {
        1 << (2 * self.m)
    }

    fn spatial_dim(&self) -> usize {
        self.cutoff.pow(2 * self.m as u32)
    }
}

/// The constant Clifford endomorphism K at deformation `t`.
pub fn clifford_endomorphism(m: usize, t: f64) -> Result<CMatrix> {
    let dim = 1 << (2 * m);
    let mut k = linalg::zeros(dim, dim);
    for a in 0..m {
        let w = TangentVector::<Complex64>::unit(m, a, false);
        let wbar = TangentVector::<Complex64>::unit(m, a, true);
        k += clifford_c(&wbar, 1)? * clifford_hat_c(&w, 1)? + clifford_c(&w, 1)? * clifford_hat_c(&wbar, 1)?;
    }
    Ok(k * Complex64::new(0.0, -t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpectrum {
    pub m: usize,
    pub t: f64,
    /// Every level strictly below `bound`, ascending.
    pub levels: Vec<Level>,
    pub bound: f64,
    pub kernel_dim: usize,
    pub min_nonzero: f64,
    /// min_nonzero / t.
    pub gap_constant: f64,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed-form spectrum. The oscillator contributes 2T(N + m) with
/// multiplicity C(N+2m−1, 2m−1); K contributes 2T·s for s ∈ −m..=m with
/// multiplicity C(2m, m+s). Levels are listed below 2T·cutoff, which is
/// where the list is complete.
pub fn oscillator_spectrum_analytic(model: &OscillatorModel) -> Result<AnalyticSpectrum> {
    model.validate()?;
    let m = model.m;
    let bound_units = model.cutoff as i64;
    let mut levels: std::collections::BTreeMap<i64, usize> = std::collections::BTreeMap::new();
    for n in 0..=(bound_units + m as i64) as usize {
        let osc = binomial(n + 2 * m - 1, 2 * m - 1);
        for s in -(m as i64)..=m as i64 {
            let units = n as i64 + m as i64 + s;
            if units < bound_units {
                *levels.entry(units).or_default() += osc * binomial(2 * m, (m as i64 + s) as usize);
            }
        }
    }
    let levels: Vec<Level> = levels
        .into_iter()
        .map(|(u, mult)| Level { value: 2.0 * model.t * u as f64, multiplicity: mult })
        .collect();
    let kernel_dim = levels.iter().filter(|l| l.value == 0.0).map(|l| l.multiplicity).sum();
    let min_nonzero = levels.iter().find(|l| l.value > 0.0).map_or(f64::INFINITY, |l| l.value);
    Ok(AnalyticSpectrum {
        m,
        t: model.t,
        levels,
        bound: 2.0 * model.t * bound_units as f64,
        kernel_dim,
        min_nonzero,
        gap_constant: min_nonzero / model.t,
    })
}

/// Orthonormal Hermite polynomials pₙ with φₙ = pₙ(ξ)e^{−ξ²/2}.
fn hermite_values(xi: f64, count: usize) -> Vec<f64> {
    let mut p = vec![0.0; count.max(2)];
    p[0] = PI.powf(-0.25);
    p[1] = std::f64::consts::SQRT_2 * xi * p[0];
    for n in 1..count.max(2) - 1 {
        p[n + 1] = (2.0 / (n + 1) as f64).sqrt() * xi * p[n] - (n as f64 / (n + 1) as f64).sqrt() * p[n - 1];
    }
    p.truncate(count);
    p
}

/// Galerkin matrix of −d²/dx² + T²x² on the first `cutoff` Hermite
/// functions of frequency √T, by Gauss–Hermite quadrature.
pub fn hermite_stiffness(t: f64, cutoff: usize) -> DMatrix<f64> {
    let rule = GaussHermite::new(NonZeroUsize::new(cutoff + 4).expect("nonzero"));
    let mut h = DMatrix::zeros(cutoff, cutoff);
    for &(xi, w) in rule.iter() {
        let p = hermite_values(xi, cutoff + 1);
        // φₙ' = √(n/2)φₙ₋₁ − √((n+1)/2)φₙ₊₁
        let dp: Vec<f64> = (0..cutoff)
            .map(|n| {
                let down = if n > 0 { (n as f64 / 2.0).sqrt() * p[n - 1] } else { 0.0 };
                down - ((n + 1) as f64 / 2.0).sqrt() * p[n + 1]
            })
            .collect();
        for i in 0..cutoff {
            for j in 0..cutoff {
                h[(i, j)] += w * (dp[i] * dp[j] + xi * xi * p[i] * p[j]);
            }
        }
    }
    h * t
}

/// Dense Galerkin matrix S⊗I + I⊗K, spatial index major. Spatial modes are
/// ordered with the first real coordinate slowest.
pub fn galerkin_matrix(model: &OscillatorModel) -> Result<CMatrix> {
    model.validate()?;
    let total = model.spatial_dim() * model.fiber_dim();
    if total > DENSE_LIMIT {
        return Err(invalid("cutoff", format!("dense Galerkin matrix of size {total} exceeds {DENSE_LIMIT}")));
    }
    let h = hermite_stiffness(model.t, model.cutoff).map(|x| Complex64::new(x, 0.0));
    let c = model.cutoff;
    let eye = |n: usize| CMatrix::identity(n, n);
    let coords = 2 * model.m;
    let id = eye(c);
    let mut s = linalg::zeros(model.spatial_dim(), model.spatial_dim());
    for slot in 0..coords {
        let mut term = eye(1);
        for other in 0..coords {
            term = linalg::kron(&term, if other == slot { &h } else { &id });
        }
        s += term;
    }
    let k = clifford_endomorphism(model.m, model.t)?;
    Ok(linalg::kron(&s, &eye(model.fiber_dim())) + linalg::kron(&eye(model.spatial_dim()), &k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinSpectrum {
    pub model: OscillatorModel,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    pub gap_ratio: f64,
    pub resolved: bool,
    /// Squared norm of the projection of the normalized β onto the computed kernel.
    pub kernel_overlap: f64,
    pub min_nonzero: f64,
    pub gap_over_t: f64,
}

fn normalized_exp_theta(m: usize) -> Result<Vec<Complex64>> {
    let e = exp_theta(m)?.to_float();
    let norm = e.norm_sqr().re.sqrt();
    Ok(e.to_vector().into_iter().map(|x| x / norm).collect())
}

fn summarize(model: OscillatorModel, eigenvalues: Vec<f64>, overlap: impl Fn(usize) -> f64) -> GalerkinSpectrum {
    let c = cluster(&eigenvalues, &ThresholdRule::default());
    let min_nonzero = eigenvalues.get(c.kernel_count).copied().unwrap_or(f64::INFINITY);
    GalerkinSpectrum {
        model,
        kernel_overlap: overlap(c.kernel_count),
        kernel_dim: c.kernel_count,
        gap_ratio: c.gap,
        resolved: c.resolved,
        min_nonzero,
        gap_over_t: min_nonzero / model.t,
        eigenvalues,
    }
}

/// Galerkin spectrum through the Kronecker-sum structure: the 1D Hermite
/// matrix and K are diagonalized separately and eigenpairs are combined.
pub fn oscillator_galerkin(model: &OscillatorModel) -> Result<GalerkinSpectrum> {
    model.validate()?;
    if model.cutoff < 4 {
        return Err(invalid("cutoff", format!("need at least 4, got {}", model.cutoff)));
    }
    let c = model.cutoff;
    let coords = 2 * model.m;
    let h = SymmetricEigen::new(hermite_stiffness(model.t, c));
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| h.eigenvalues[a].total_cmp(&h.eigenvalues[b]));
    let mu: Vec<f64> = order.iter().map(|&i| h.eigenvalues[i]).collect();
    // |⟨ground Hermite function, j-th eigenvector⟩|²
    let ground_weight: Vec<f64> = order.iter().map(|&i| h.eigenvectors[(0, i)].powi(2)).collect();

    let (kappa, kvecs) = linalg::hermitian_eigen(&clifford_endomorphism(model.m, model.t)?);
    let beta_fiber = normalized_exp_theta(model.m)?;
    let fiber_weight: Vec<f64> = (0..kappa.len())
        .map(|l| kvecs.column(l).iter().zip(&beta_fiber).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr())
        .collect();

    let spatial = model.spatial_dim();
    let mut spatial_values = Vec::with_capacity(spatial);
    let mut spatial_weight = Vec::with_capacity(spatial);
    for idx in 0..spatial {
        let (mut value, mut weight, mut rest) = (0.0, 1.0, idx);
        for _ in 0..coords {
            let j = rest % c;
            rest /= c;
            value += mu[j];
            weight *= ground_weight[j];
        }
        spatial_values.push(value);
        spatial_weight.push(weight);
    }
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(spatial * kappa.len());
    for (sv, sw) in spatial_values.iter().zip(&spatial_weight) {
        for (kv, kw) in kappa.iter().zip(&fiber_weight) {
            pairs.push((sv + kv, sw * kw));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    Ok(summarize(*model, eigenvalues, |k| pairs[..k].iter().map(|p| p.1).sum()))
}

/// Brute-force diagonalization of the assembled [`galerkin_matrix`].
pub fn oscillator_galerkin_dense(model: &OscillatorModel) -> Result<GalerkinSpectrum> {
    let h = galerkin_matrix(model)?;
    let (values, vectors) = linalg::hermitian_eigen(&h);
    let beta = beta_vector(model)?;
    Ok(summarize(*model, values, |k| {
        (0..k)
            .map(|col| vectors.column(col).iter().zip(&beta).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr())
            .sum()
    }))
}

/// Normalized β in the dense Galerkin ordering.
fn beta_vector(model: &OscillatorModel) -> Result<Vec<Complex64>> {
    let fiber = normalized_exp_theta(model.m)?;
    let mut v = vec![Complex64::new(0.0, 0.0); model.spatial_dim() * model.fiber_dim()];
    v[..fiber.len()].copy_from_slice(&fiber);
    Ok(v)
}

/// θ = Σ_α w_α* ∧ w̄̃_α* = Σ_α dz̄_α ∧ dz_α.
pub fn theta(m: usize) -> Result<AlgebraElement<ExactScalar>> {
    let mut out = AlgebraElement::zero(m, 1);
    for a in 0..m {
        out = out.plus(&wedge(&AlgebraElement::anti_generator(m, a), &AlgebraElement::holo_generator(m, a))?)?;
    }
    Ok(out)
}

/// exp θ by its terminating series.
pub fn exp_theta(m: usize) -> Result<AlgebraElement<ExactScalar>> {
    let th = theta(m)?;
    let mut term = AlgebraElement::one(m);
    let mut sum = term.clone();
    for j in 1..=m {
        term = wedge(&term, &th)?.scale(&ExactScalar::from_ratio(1, j as i64));
        sum = sum.plus(&term)?;
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaState {
    pub m: usize,
    pub theta: AlgebraElement<ExactScalar>,
    pub exp_theta: AlgebraElement<ExactScalar>,
    /// |exp θ|², exact.
    pub norm_sqr: ExactScalar,
    /// ‖Hβ‖ for the unit-normalized β under the model's Galerkin matrix.
    pub galerkin_residual: f64,
}

/// Build θ and exp θ and apply the Galerkin operator to β.
pub fn beta_state(model: &OscillatorModel) -> Result<ThetaState> {
    model.validate()?;
    let th = theta(model.m)?;
    if th.terms().any(|(l, _)| l.degree() != 0) {
        return Err(invalid("theta", "θ must have Z-degree 0"));
    }
    let e = exp_theta(model.m)?;
    let norm_sqr = e.norm_sqr();
    if norm_sqr != ExactScalar::from_ratio(1 << model.m, 1) {
        return Err(invalid("exp_theta", format!("|exp θ|² = {norm_sqr}, expected 2^{}", model.m)));
    }
    // β = φ₀^{⊗2m} ⊗ x. With h φ₀ = g₀φ₀ + g⊥, the 2m shifted copies of g⊥
    // are orthogonal to each other and to the φ₀^{⊗2m} part, so
    // ‖Hβ‖² = ‖2m·g₀x + Kx‖² + 2m‖g⊥‖²‖x‖².
    let h = hermite_stiffness(model.t, model.cutoff);
    let g0 = h[(0, 0)];
    let g_perp: f64 = (1..model.cutoff).map(|i| h[(i, 0)].powi(2)).sum();
    let x = normalized_exp_theta(model.m)?;
    let k = clifford_endomorphism(model.m, model.t)?;
    let xv = CMatrix::from_column_slice(x.len(), 1, &x);
    let along = &k * &xv + &xv * Complex64::new(2.0 * model.m as f64 * g0, 0.0);
    let residual = (along.norm_squared() + 2.0 * model.m as f64 * g_perp).sqrt();
    Ok(ThetaState { m: model.m, theta: th, exp_theta: e, norm_sqr, galerkin_residual: residual })
}

/// The even C² bump: 1 on |a| ≤ 1/2, 0 on |a| ≥ 1, a quintic smoothstep between.
pub fn gamma(a: f64) -> f64 {
    let a = a.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let t = 2.0 * (a - 0.5);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

fn sphere_volume(m: usize) -> f64 {
    2.0 * PI.powi(m as i32) / (1..m).product::<usize>() as f64
}

const PANELS: usize = 16;

/// Composite Gauss–Legendre on [a, b] with `PANELS` panels.
fn composite(rule: &GaussLegendre, a: f64, b: f64, f: &impl Fn(f64) -> Complex64) -> Complex64 {
    let h = (b - a) / PANELS as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..PANELS {
        let lo = a + i as f64 * h;
        for &(x, w) in rule.iter() {
            acc += f(lo + (x + 1.0) * h / 2.0) * (w * h / 2.0);
        }
    }
    acc
}

/// Integrate a radial integrand over [0, ε], split where γ stops being 1,
/// doubling the node count until two estimates agree to `tol`.
fn radial_integral(epsilon: f64, tol: f64, f: impl Fn(f64) -> Complex64) -> Result<Complex64> {
    let mut prev: Option<Complex64> = None;
    let mut nodes = 8;
    while nodes <= 256 {
        let rule = GaussLegendre::new(NonZeroUsize::new(nodes).expect("nonzero"));
        let est = composite(&rule, 0.0, epsilon / 2.0, &f) + composite(&rule, epsilon / 2.0, epsilon, &f);
        if let Some(p) = prev {
            if (est - p).norm() <= tol * est.norm().max(f64::MIN_POSITIVE) {
                return Ok(est);
            }
        }
        prev = Some(est);
        nodes *= 2;
    }
    Err(Error::Quadrature { coarse: prev.map_or(f64::NAN, |p| p.norm()), fine: f64::NAN })
}

/// α_T = ∫ γ_ε(Z)² e^{−T|Z|²} dν / (2π)ᵐ over Cᵐ.
pub fn alpha_t(epsilon: f64, m: usize, t: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    if m == 0 {
        return Err(invalid("m", "must be at least 1"));
    }
    let radial = radial_integral(epsilon, 1e-12, |r| {
        Complex64::new(gamma(r / epsilon).powi(2) * (-t * r * r).exp() * r.powi(2 * m as i32 - 1), 0.0)
    })?;
    Ok(radial.re * sphere_volume(m) / (2.0 * PI).powi(m as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub epsilon: f64,
    pub m: usize,
    pub t: f64,
    pub alpha: f64,
}

impl CutoffProfile {
    pub fn new(epsilon: f64, m: usize, t: f64) -> Result<Self> {
        Ok(Self { epsilon, m, t, alpha: alpha_t(epsilon, m, t)? })
    }

    /// γ_ε(Z) as a function of |Z|.
    pub fn gamma_eps(&self, radius: f64) -> f64 {
        gamma(radius / self.epsilon)
    }

    /// α_T·Tᵐ.
    pub fn scaled_alpha(&self) -> f64 {
        self.alpha * self.t.powi(self.m as i32)
    }
}

/// Point Z of Cᵐ in polar (m = 1) or Hopf (m = 2) coordinates.
fn fiber_point(m: usize, radius: f64, angles: &[f64]) -> Vec<Complex64> {
    match m {
        1 => vec![Complex64::from_polar(radius, angles[0])],
        _ => vec![
            Complex64::from_polar(radius * angles[0].cos(), angles[1]),
            Complex64::from_polar(radius * angles[0].sin(), angles[2]),
        ],
    }
}

/// ⟨⟨I_T u₁, I_T u₂⟩⟩, integrating the pointwise pairing of u⊗β over the fiber.
pub fn isometry_inner(
    model: &OscillatorModel,
    profile: &CutoffProfile,
    u1: &[Complex64],
    u2: &[Complex64],
) -> Result<Complex64> {
    model.validate()?;
    if profile.m != model.m || profile.t != model.t {
        return Err(invalid("profile", "profile and model disagree on (m, T)"));
    }
    if model.m > 2 {
        return Err(invalid("m", "isometry quadrature is implemented for m <= 2"));
    }
    if u1.len() != u2.len() || u1.is_empty() {
        return Err(Error::DimensionMismatch { left: u1.len(), right: u2.len() });
    }
    let m = model.m;
    let rank = u1.len();
    let lift = |u: &[Complex64]| {
        let mut e = AlgebraElement::<Complex64>::zero(m, rank);
        for (i, c) in u.iter().enumerate() {
            e.add_term(BasisLabel::new(vec![], vec![], i), *c);
        }
        e
    };
    let (a1, a2) = (lift(u1), lift(u2));
    let e = exp_theta(m)?.to_float();
    let scale = 1.0 / (2f64.powi(m as i32) * profile.alpha);

    // Angular rules: trapezoid in the periodic angles, Gauss–Legendre in η.
    let turns = 4;
    let phis: Vec<f64> = (0..turns).map(|i| 2.0 * PI * i as f64 / turns as f64).collect();
    let eta_rule = GaussLegendre::new(NonZeroUsize::new(10).expect("nonzero"));
    let mut angular: Vec<(Vec<f64>, f64)> = Vec::new();
    if m == 1 {
        for &p in &phis {
            angular.push((vec![p], 2.0 * PI / turns as f64));
        }
    } else {
        for &(eta, w) in eta_rule.iter() {
            let eta = PI / 4.0 * (eta + 1.0);
            let w_eta = w * PI / 4.0 * eta.sin() * eta.cos();
            for &p1 in &phis {
                for &p2 in &phis {
                    angular.push((vec![eta, p1, p2], w_eta * (2.0 * PI / turns as f64).powi(2)));
                }
            }
        }
    }

    let point_value = |r: f64, angles: &[f64]| -> Result<Complex64> {
        let z = fiber_point(m, r, angles);
        let radius = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let envelope = profile.gamma_eps(radius) * (-model.t * radius * radius / 2.0).exp();
        let beta = e.scale(&Complex64::new(envelope, 0.0));
        Ok(wedge(&a1, &beta)?.inner(&wedge(&a2, &beta)?))
    };
    let total = radial_integral(profile.epsilon, 1e-12, |r| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (angles, w) in &angular {
            acc += point_value(r, angles).unwrap_or(Complex64::new(f64::NAN, f64::NAN)) * *w;
        }
        acc * r.powi(2 * m as i32 - 1)
    })?;
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::Quadrature { coarse: total.re, fine: total.im });
    }
    Ok(total * (scale / (2.0 * PI).powi(m as i32)))
}

/// |⟨⟨I_T u, I_T u⟩⟩ − ⟨u, u⟩|.
pub fn isometry_check(model: &OscillatorModel, profile: &CutoffProfile, u: &[Complex64]) -> Result<f64> {
    let lhs = isometry_inner(model, profile, u, u)?;
    let rhs: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    Ok((lhs - rhs).norm())
}

/// One row of the (T, gap/T, α_T·Tᵐ) trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalRow {
    pub m: usize,
    pub t: f64,
    pub cutoff: usize,
    pub epsilon: f64,
    pub kernel_dim: usize,
    pub kernel_overlap: f64,
    pub gap: f64,
    pub gap_over_t: f64,
    pub alpha_t: f64,
    pub alpha_scaled: f64,
}

pub fn local_trajectory(m: usize, cutoff: usize, epsilon: f64, ts: &[f64]) -> Result<Vec<LocalRow>> {
    if ts.is_empty() {
        return Err(invalid("t", "T grid is empty"));
    }
    ts.iter()
        .map(|&t| {
            let model = OscillatorModel::new(m, t, cutoff)?;
            let g = oscillator_galerkin(&model)?;
            let profile = CutoffProfile::new(epsilon, m, t)?;
            Ok(LocalRow {
                m,
                t,
                cutoff,
                epsilon,
                kernel_dim: g.kernel_dim,
                kernel_overlap: g.kernel_overlap,
                gap: g.min_nonzero,
                gap_over_t: g.gap_over_t,
                alpha_t: profile.alpha,
                alpha_scaled: profile.scaled_alpha(),
            })
        })
        .collect()
}

pub const LOCAL_CSV_SCHEMA: &str = "holoeq-local/v1";

/// CSV with header `m,t,cutoff,epsilon,kernel_dim,kernel_overlap,gap,gap_over_t,alpha_t,alpha_scaled`.
pub fn write_local_csv<W: Write>(out: W, rows: &[LocalRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

pub mod fixture {
    //! The committed gap constant A (nonzero spectrum ≥ A·T).
    //!
    //! Schema `holoeq-local-fixtures/v1`: `{schema, gap_constant: {value, provenance}}`.

    use serde::Deserialize;

    use crate::error::{Error, Result};

    const TEXT: &str = include_str!("../fixtures/local_model.json");

    #[derive(Deserialize)]
    struct Entry {
        value: f64,
        #[allow(dead_code)]
        provenance: String,
    }

    #[derive(Deserialize)]
    struct File {
        schema: String,
        gap_constant: Entry,
    }

    pub fn gap_constant() -> Result<f64> {
        let malformed = |reason: String| Error::Fixture { name: "local_model".into(), reason };
        let file: File = serde_json::from_str(TEXT).map_err(|e| malformed(e.to_string()))?;
        if file.schema != "holoeq-local-fixtures/v1" {
            return Err(malformed(format!("unexpected schema {}", file.schema)));
        }
        Ok(file.gap_constant.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_endomorphism_spectrum() {
        let k = clifford_endomorphism(1, 3.0).unwrap();
        assert!(linalg::hermiticity_defect(&k) < 1e-14);
        let ev = linalg::hermitian_eigenvalues(&k);
        for (got, want) in ev.iter().zip([-6.0, 0.0, 0.0, 6.0]) {
            assert!((got - want).abs() < 1e-12, "{ev:?}");
        }
        // kernel of H sits on exp θ: K(1 + θ) = −2T(1 + θ)
        let x = normalized_exp_theta(1).unwrap();
        let xv = CMatrix::from_column_slice(4, 1, &x);
        assert!((&k * &xv + &xv * Complex64::new(6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn analytic_levels() {
        let s = oscillator_spectrum_analytic(&OscillatorModel::new(1, 1.0, 6).unwrap()).unwrap();
        assert_eq!(s.kernel_dim, 1);
        assert_eq!(s.gap_constant, 2.0);
        assert_eq!(s.levels[1], Level { value: 2.0, multiplicity: 2 + 2 });
        let s2 = oscillator_spectrum_analytic(&OscillatorModel::new(2, 5.0, 6).unwrap()).unwrap();
        assert_eq!(s2.kernel_dim, 1);
        assert_eq!(s2.min_nonzero, 10.0);
    }

    #[test]
    fn m2_levels_are_the_convolution_of_m1() {
        let one = oscillator_spectrum_analytic(&OscillatorModel::new(1, 5.0, 8).unwrap()).unwrap();
        let two = oscillator_spectrum_analytic(&OscillatorModel::new(2, 5.0, 8).unwrap()).unwrap();
        let mut conv: std::collections::BTreeMap<i64, usize> = Default::default();
        for a in &one.levels {
            for b in &one.levels {
                *conv.entry(((a.value + b.value) / 10.0).round() as i64).or_default() += a.multiplicity * b.multiplicity;
            }
        }
        for l in &two.levels {
            assert_eq!(conv[&((l.value / 10.0).round() as i64)], l.multiplicity, "level {}", l.value);
        }
    }

    #[test]
    fn stiffness_is_diagonal() {
        let h = hermite_stiffness(2.0, 10);
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 2.0 * (2 * i + 1) as f64 } else { 0.0 };
                assert!((h[(i, j)] - want).abs() < 1e-12 * 40.0, "({i},{j}) {}", h[(i, j)]);
            }
        }
    }

    #[test]
    fn structured_and_dense_galerkin_agree() {
        let model = OscillatorModel::new(1, 1.5, 4).unwrap();
        let fast = oscillator_galerkin(&model).unwrap();
        let dense = oscillator_galerkin_dense(&model).unwrap();
        assert_eq!(fast.kernel_dim, 1);
        assert_eq!(dense.kernel_dim, 1);
        for (a, b) in fast.eigenvalues.iter().zip(&dense.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((dense.kernel_overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exp_theta_terms_and_norm() {
        let e1 = exp_theta(1).unwrap();
        assert_eq!(e1.len(), 2);
        assert_eq!(e1.norm_sqr(), ExactScalar::from_ratio(2, 1));
        let e2 = exp_theta(2).unwrap();
        assert_eq!(e2.len(), 4);
        assert_eq!(e2.norm_sqr(), ExactScalar::from_ratio(4, 1));
        let state = beta_state(&OscillatorModel::new(2, 3.0, 6).unwrap()).unwrap();
        assert!(state.galerkin_residual < 1e-10);
    }

    #[test]
    fn bump_profile() {
        assert_eq!(gamma(0.3), 1.0);
        assert_eq!(gamma(-1.2), 0.0);
        assert!((gamma(0.75) - 0.5).abs() < 1e-15);
        assert!((0..=100).all(|i| (0.0..=1.0).contains(&gamma(i as f64 / 50.0))));
    }

    #[test]
    fn alpha_matches_gaussian_width() {
        let a = alpha_t(1.0, 1, 100.0).unwrap() * 100.0;
        assert!((a - 0.5).abs() < 1e-3);
        let small = alpha_t(0.1, 1, 100.0).unwrap();
        let smaller = alpha_t(0.05, 1, 100.0).unwrap();
        assert!(smaller < small && small < a / 100.0);
        assert!(alpha_t(0.0, 1, 1.0).is_err());
    }

    #[test]
    fn isometry_of_zero_and_unit_vectors() {
        let model = OscillatorModel::new(1, 50.0, 4).unwrap();
        let profile = CutoffProfile::new(1.0, 1, 50.0).unwrap();
        let zero = [Complex64::new(0.0, 0.0); 2];
        assert_eq!(isometry_check(&model, &profile, &zero).unwrap(), 0.0);
        let u = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        assert!(isometry_check(&model, &profile, &u).unwrap() < 1e-9);
        let wrong = CutoffProfile::new(1.0, 1, 40.0).unwrap();
        assert!(isometry_check(&model, &wrong, &u).is_err());
    }

    #[test]
    fn fixture_matches_closed_form() {
        let a = fixture::gap_constant().unwrap();
        let s = oscillator_spectrum_analytic(&OscillatorModel::new(1, 7.0, 4).unwrap()).unwrap();
        assert_eq!(a, s.gap_constant);
    }
}
