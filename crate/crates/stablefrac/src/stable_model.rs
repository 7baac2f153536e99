//! The α-stable model: spectral measure, the anisotropic norm `σ_α`, its
//! dual, the Fourier symbols `ψ_α`, `τ_α`, `m_σ` and the closed-form
//! geometric constants.
//!
//! Conventions.  A Lévy measure `ν_α` is written in polar form
//! `ν_α(du) = r^{-α-1} dr σ(dθ)` where `σ` is a finite symmetric measure on
//! the sphere.  The spectral measure is `λ₁ = c(α) σ` with
//! `c(α) = -cos(απ/2) Γ(2-α) / (α(α-1))`, so that
//! `σ_α(ξ)^α = ∫ |⟨y,ξ⟩|^α λ₁(dy)` and the semigroup has symbol
//! `exp(-t σ_α(ξ)^α)`.

use crate::error::{Error, Result};
use crate::quad::{self, gamma, SphereRule};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Threshold below which a measure is declared degenerate.
pub const NONDEG_THRESHOLD: f64 = 1e-12;

/// `c(α) = -cos(απ/2) Γ(2-α) / (α(α-1))`, the factor turning the spherical
/// part of the Lévy measure into the spectral measure.
pub fn lambda1_factor(alpha: f64) -> f64 {
    -(alpha * PI / 2.0).cos() * gamma(2.0 - alpha) / (alpha * (alpha - 1.0))
}

/// The normalisation `c_{α,d}` for which `σ = c_{α,d} σ_L` yields
/// `σ_α(ξ) = ‖ξ‖ / 2^{1/α}`.
pub fn rotational_constant(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    -alpha * (alpha - 1.0) * gamma((alpha + df) / 2.0)
        / (4.0
            * (alpha * PI / 2.0).cos()
            * gamma((alpha + 1.0) / 2.0)
            * PI.powf((df - 1.0) / 2.0)
            * gamma(2.0 - alpha))
}

/// The `α → 1` limit of [`rotational_constant`]:
/// `Γ((d+1)/2) / (2 π^{(d+1)/2})`.
pub fn rotational_constant_limit(d: usize) -> f64 {
    let df = d as f64;
    gamma((df + 1.0) / 2.0) / (2.0 * PI.powf((df + 1.0) / 2.0))
}

/// One half of a symmetric atom pair `±direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

/// A symmetric finite measure on `S^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralMeasure {
    /// Atoms stored for `+y` only; each carries the same weight at `-y`.
    Discrete(Vec<Atom>),
    /// `mass × σ_L` with `σ_L` the surface measure of the sphere.
    RotationInvariant { mass: f64 },
    /// Density against `σ_L`, pre-multiplied into quadrature weights.
    SphericalDensity {
        nodes: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl SpectralMeasure {
    /// Discrete measure from `(direction, weight)` pairs; directions are
    /// normalised to unit length.
    pub fn discrete(atoms: &[(Vec<f64>, f64)]) -> Self {
        SpectralMeasure::Discrete(
            atoms
                .iter()
                .map(|(y, w)| {
                    let n = norm(y);
                    Atom {
                        direction: y.iter().map(|v| v / n).collect(),
                        weight: *w,
                    }
                })
                .collect(),
        )
    }

    /// Atoms `±e_k` with the given weights.
    pub fn axes(weights: &[f64]) -> Self {
        let d = weights.len();
        SpectralMeasure::Discrete(
            weights
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let mut y = vec![0.0; d];
                    y[k] = 1.0;
                    Atom { direction: y, weight: w }
                })
                .collect(),
        )
    }

    /// Density `ρ` against `σ_L`, discretised with the sphere rule of the
    /// given resolution.
    pub fn spherical_density(dim: usize, resolution: usize, rho: impl Fn(&[f64]) -> f64) -> Self {
        let rule = SphereRule::new(dim, resolution);
        let weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * rho(x))
            .collect();
        SpectralMeasure::SphericalDensity {
            nodes: rule.nodes,
            weights,
        }
    }

    /// Total mass.
    pub fn mass(&self, dim: usize) -> f64 {
        match self {
            SpectralMeasure::Discrete(a) => 2.0 * a.iter().map(|a| a.weight).sum::<f64>(),
            SpectralMeasure::RotationInvariant { mass } => mass * quad::sphere_area(dim),
            SpectralMeasure::SphericalDensity { weights, .. } => weights.iter().sum(),
        }
    }

    /// The measure multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            SpectralMeasure::Discrete(a) => SpectralMeasure::Discrete(
                a.iter()
                    .map(|a| Atom {
                        direction: a.direction.clone(),
                        weight: a.weight * c,
                    })
                    .collect(),
            ),
            SpectralMeasure::RotationInvariant { mass } => {
                SpectralMeasure::RotationInvariant { mass: mass * c }
            }
            SpectralMeasure::SphericalDensity { nodes, weights } => {
                SpectralMeasure::SphericalDensity {
                    nodes: nodes.clone(),
                    weights: weights.iter().map(|w| w * c).collect(),
                }
            }
        }
    }

    /// `∫ g dm` for a function `g` on the sphere.
    pub fn integrate(&self, dim: usize, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        match self {
            SpectralMeasure::Discrete(a) => a
                .iter()
                .map(|a| {
                    let neg: Vec<f64> = a.direction.iter().map(|v| -v).collect();
                    a.weight * (g(&a.direction) + g(&neg))
                })
                .sum(),
            SpectralMeasure::RotationInvariant { mass } => {
                let rule = SphereRule::new(dim, 512);
                mass * rule.integrate(g)
            }
            SpectralMeasure::SphericalDensity { nodes, weights } => {
                nodes.iter().zip(weights).map(|(x, w)| w * g(x)).sum()
            }
        }
    }

    /// `∫ |⟨y,ξ⟩|^p m(dy)`.
    pub fn abs_pow_integral(&self, dim: usize, xi: &[f64], p: f64) -> f64 {
        match self {
            SpectralMeasure::Discrete(a) => a
                .iter()
                .map(|a| 2.0 * a.weight * dot(&a.direction, xi).abs().powf(p))
                .sum(),
            SpectralMeasure::RotationInvariant { mass } => {
                mass * quad::abs_moment_sphere(dim, p) * norm(xi).powf(p)
            }
            SpectralMeasure::SphericalDensity { nodes, weights } => nodes
                .iter()
                .zip(weights)
                .map(|(y, w)| w * dot(y, xi).abs().powf(p))
                .sum(),
        }
    }

    /// `∇_ξ ∫ |⟨y,ξ⟩|^p m(dy) = p ∫ y |⟨y,ξ⟩|^{p-1} sign⟨y,ξ⟩ m(dy)`, `p > 1`.
    pub fn grad_abs_pow(&self, dim: usize, xi: &[f64], p: f64) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        match self {
            SpectralMeasure::Discrete(a) => {
                for a in a {
                    let s = dot(&a.direction, xi);
                    let c = 2.0 * a.weight * p * s.abs().powf(p - 1.0) * s.signum();
                    if s != 0.0 {
                        for (o, y) in out.iter_mut().zip(&a.direction) {
                            *o += c * y;
                        }
                    }
                }
            }
            SpectralMeasure::RotationInvariant { mass } => {
                let n = norm(xi);
                if n > 0.0 {
                    let c = mass * quad::abs_moment_sphere(dim, p) * p * n.powf(p - 2.0);
                    for (o, x) in out.iter_mut().zip(xi) {
                        *o = c * x;
                    }
                }
            }
            SpectralMeasure::SphericalDensity { nodes, weights } => {
                for (y, w) in nodes.iter().zip(weights) {
                    let s = dot(y, xi);
                    if s != 0.0 {
                        let c = w * p * s.abs().powf(p - 1.0) * s.signum();
                        for (o, yk) in out.iter_mut().zip(y) {
                            *o += c * yk;
                        }
                    }
                }
            }
        }
        out
    }

    /// `∫ y sign⟨y,ξ⟩ m(dy)`.
    pub fn sign_mean(&self, dim: usize, xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        match self {
            SpectralMeasure::Discrete(a) => {
                for a in a {
                    let s = dot(&a.direction, xi).signum();
                    if dot(&a.direction, xi) != 0.0 {
                        for (o, y) in out.iter_mut().zip(&a.direction) {
                            *o += 2.0 * a.weight * s * y;
                        }
                    }
                }
            }
            SpectralMeasure::RotationInvariant { mass } => {
                let n = norm(xi);
                if n > 0.0 {
                    let c = mass * quad::abs_moment_sphere(dim, 1.0) / n;
                    for (o, x) in out.iter_mut().zip(xi) {
                        *o = c * x;
                    }
                }
            }
            SpectralMeasure::SphericalDensity { nodes, weights } => {
                for (y, w) in nodes.iter().zip(weights) {
                    let s = dot(y, xi);
                    if s != 0.0 {
                        for (o, yk) in out.iter_mut().zip(y) {
                            *o += w * s.signum() * yk;
                        }
                    }
                }
            }
        }
        out
    }

    /// `∫ y yᵀ m(dy)` as a row-major `d×d` matrix.
    pub fn second_moment(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; dim]; dim];
        match self {
            SpectralMeasure::Discrete(a) => {
                for a in a {
                    for i in 0..dim {
                        for j in 0..dim {
                            out[i][j] += 2.0 * a.weight * a.direction[i] * a.direction[j];
                        }
                    }
                }
            }
            SpectralMeasure::RotationInvariant { mass } => {
                let c = mass * quad::sphere_area(dim) / dim as f64;
                for (i, row) in out.iter_mut().enumerate() {
                    row[i] = c;
                }
            }
            SpectralMeasure::SphericalDensity { nodes, weights } => {
                for (y, w) in nodes.iter().zip(weights) {
                    for i in 0..dim {
                        for j in 0..dim {
                            out[i][j] += w * y[i] * y[j];
                        }
                    }
                }
            }
        }
        out
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let mass = self.mass(dim);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::BadMass);
        }
        match self {
            SpectralMeasure::Discrete(a) => {
                for a in a {
                    if a.direction.len() != dim {
                        return Err(Error::SizeMismatch {
                            expected: dim,
                            got: a.direction.len(),
                        });
                    }
                    if !(a.weight > 0.0 && a.weight.is_finite()) || norm(&a.direction) == 0.0 {
                        return Err(Error::BadMass);
                    }
                }
            }
            SpectralMeasure::RotationInvariant { .. } => {}
            SpectralMeasure::SphericalDensity { nodes, weights } => {
                if nodes.iter().any(|y| y.len() != dim) || nodes.len() != weights.len() {
                    return Err(Error::SizeMismatch {
                        expected: dim,
                        got: nodes.first().map_or(0, |y| y.len()),
                    });
                }
                if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
                    return Err(Error::BadMass);
                }
                // odd test functions must integrate to zero
                let mut worst: f64 = 0.0;
                for k in 0..dim {
                    let m1: f64 = nodes.iter().zip(weights).map(|(y, w)| w * y[k]).sum();
                    let m3: f64 = nodes
                        .iter()
                        .zip(weights)
                        .map(|(y, w)| w * y[k] * y[k] * y[k])
                        .sum();
                    worst = worst.max(m1.abs() / mass).max(m3.abs() / mass);
                }
                if worst > 1e-10 {
                    return Err(Error::AsymmetricMeasure(worst));
                }
            }
        }
        Ok(())
    }
}

/// `Σ = ∫ y yᵀ σ(dy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl SigmaMatrix {
    fn to_na(&self) -> DMatrix<f64> {
        let d = self.entries.len();
        DMatrix::from_fn(d, d, |i, j| self.entries[i][j])
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_na()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// `Σ^{-1/2}`; fails when the smallest eigenvalue is `≤ 1e-12`.
    pub fn inv_sqrt(&self) -> Result<Vec<Vec<f64>>> {
        let eig = SymmetricEigen::new(self.to_na());
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= NONDEG_THRESHOLD {
            return Err(Error::SingularSigmaMatrix(min));
        }
        let d = self.entries.len();
        let mut out = vec![vec![0.0; d]; d];
        for k in 0..d {
            let s = eig.eigenvalues[k].powf(-0.5);
            for i in 0..d {
                for j in 0..d {
                    out[i][j] += s * eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)];
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|row| dot(row, x)).collect()
    }
}

/// Product structure: `σ_α(ξ) = ‖Mᵀξ‖_α` for `d` linearly independent atom
/// directions, with the columns of `M` equal to `(2w_j)^{1/α} y_j` (λ₁
/// weights).  Then `μ_α` is the law of `M Z` with `Z` i.i.d. standard
/// one-dimensional stable coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductStructure {
    /// Row-major `d×d`.
    pub m: Vec<Vec<f64>>,
    pub m_inv: Vec<Vec<f64>>,
    pub abs_det: f64,
    /// `Some(scales)` when every atom is a distinct coordinate axis; the
    /// scale of axis `k` is `(2 w_k)^{1/α}`.
    pub axis_scales: Option<Vec<f64>>,
}

/// The α-stable model.
#[derive(Debug)]
pub struct StableModel {
    alpha: f64,
    dim: usize,
    sigma: SpectralMeasure,
    lambda1: SpectralMeasure,
    gamma_exponent: Option<f64>,
    nondeg_margin: f64,
    product: Option<ProductStructure>,
    /// `σ_α^α = κ‖ξ‖^α` for rotation-invariant measures.
    rot_kappa: Option<f64>,
    boundary_cache: OnceLock<Vec<Vec<f64>>>,
}

impl Clone for StableModel {
    fn clone(&self) -> Self {
        Self {
            alpha: self.alpha,
            dim: self.dim,
            sigma: self.sigma.clone(),
            lambda1: self.lambda1.clone(),
            gamma_exponent: self.gamma_exponent,
            nondeg_margin: self.nondeg_margin,
            product: self.product.clone(),
            rot_kappa: self.rot_kappa,
            boundary_cache: OnceLock::new(),
        }
    }
}

impl PartialEq for StableModel {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.dim == other.dim && self.sigma == other.sigma
    }
}

/// Build a model from `α`, the dimension and the spherical part `σ` of the
/// Lévy measure.
pub fn make_model(alpha: f64, dim: usize, sigma: SpectralMeasure) -> Result<StableModel> {
    StableModel::new(alpha, dim, sigma)
}

impl StableModel {
    /// Model whose Lévy measure has spherical part `sigma`.
    pub fn new(alpha: f64, dim: usize, sigma: SpectralMeasure) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::BadAlpha(alpha));
        }
        if dim == 0 || dim > 3 {
            return Err(Error::BadDimension(dim));
        }
        sigma.validate(dim)?;
        let lambda1 = sigma.scaled(lambda1_factor(alpha));
        let rot_kappa = match &lambda1 {
            SpectralMeasure::RotationInvariant { mass } => {
                Some(mass * quad::abs_moment_sphere(dim, alpha))
            }
            _ => None,
        };
        let product = product_structure(alpha, dim, &lambda1);
        let mut model = Self {
            alpha,
            dim,
            sigma,
            lambda1,
            gamma_exponent: None,
            nondeg_margin: 0.0,
            product,
            rot_kappa,
            boundary_cache: OnceLock::new(),
        };
        model.nondeg_margin = model.compute_margin();
        if model.nondeg_margin <= NONDEG_THRESHOLD {
            return Err(Error::DegenerateMeasure(model.nondeg_margin));
        }
        Ok(model)
    }

    /// Model specified through its spectral measure `λ₁` directly.
    pub fn from_lambda1(alpha: f64, dim: usize, lambda1: SpectralMeasure) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::BadAlpha(alpha));
        }
        Self::new(alpha, dim, lambda1.scaled(1.0 / lambda1_factor(alpha)))
    }

    /// Product model: `λ₁ = Σ_k w_k (δ_{e_k} + δ_{-e_k})`, so that
    /// `σ_α(ξ)^α = Σ_k 2 w_k |ξ_k|^α`.
    pub fn product(alpha: f64, weights: &[f64]) -> Result<Self> {
        Self::from_lambda1(alpha, weights.len(), SpectralMeasure::axes(weights))
    }

    /// Rotation-invariant model normalised so that `σ_α(ξ) = ‖ξ‖/2^{1/α}`.
    pub fn rotational(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::BadAlpha(alpha));
        }
        Self::new(
            alpha,
            dim,
            SpectralMeasure::RotationInvariant {
                mass: rotational_constant(alpha, dim),
            },
        )
    }

    /// Same spherical part `σ`, different `α`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let mut m = Self::new(alpha, self.dim, self.sigma.clone())?;
        m.gamma_exponent = self.gamma_exponent;
        Ok(m)
    }

    /// Attach the (unverified) γ-measure exponent.
    pub fn with_gamma_exponent(mut self, gamma: f64) -> Result<Self> {
        if !(gamma >= 1.0 && gamma <= self.dim as f64) {
            return Err(Error::BadExponent(format!(
                "gamma exponent {gamma} outside [1, {}]",
                self.dim
            )));
        }
        self.gamma_exponent = Some(gamma);
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> &SpectralMeasure {
        &self.sigma
    }

    pub fn lambda1(&self) -> &SpectralMeasure {
        &self.lambda1
    }

    pub fn gamma_exponent(&self) -> Option<f64> {
        self.gamma_exponent
    }

    /// `inf_{‖e‖=1} ∫ |⟨e,y⟩|^α λ₁(dy)`.
    pub fn nondeg_margin(&self) -> f64 {
        self.nondeg_margin
    }

    pub fn product_structure(&self) -> Option<&ProductStructure> {
        self.product.as_ref()
    }

    /// Axis scales `(2w_k)^{1/α}` when the model is a product along the
    /// coordinate axes.
    pub fn axis_scales(&self) -> Option<&[f64]> {
        self.product.as_ref().and_then(|p| p.axis_scales.as_deref())
    }

    pub fn is_rotational(&self) -> bool {
        self.rot_kappa.is_some()
    }

    /// `κ` in `σ_α(ξ)^α = κ‖ξ‖^α` for rotation-invariant models.
    pub fn rotational_kappa(&self) -> Option<f64> {
        self.rot_kappa
    }

    /// Mass of `λ₁`.
    pub fn lambda1_mass(&self) -> f64 {
        self.lambda1.mass(self.dim)
    }

    fn compute_margin(&self) -> f64 {
        if let Some(k) = self.rot_kappa {
            return k;
        }
        let samples = match self.dim {
            1 => 2,
            2 => 2048,
            _ => 4096,
        };
        let (_, v) = quad::sphere_max(self.dim, samples, |e| -self.sigma_alpha_pow(e));
        -v
    }

    /// `σ_α(ξ)^α`.
    pub fn sigma_alpha_pow(&self, xi: &[f64]) -> f64 {
        if let Some(k) = self.rot_kappa {
            return k * norm(xi).powf(self.alpha);
        }
        self.lambda1.abs_pow_integral(self.dim, xi, self.alpha)
    }

    /// `σ_α(ξ) = (∫ |⟨y,ξ⟩|^α λ₁(dy))^{1/α}`.
    pub fn sigma_alpha(&self, xi: &[f64]) -> f64 {
        if let Some(k) = self.rot_kappa {
            return k.powf(1.0 / self.alpha) * norm(xi);
        }
        self.sigma_alpha_pow(xi).powf(1.0 / self.alpha)
    }

    /// `ψ_α(ξ) = -σ_α(ξ)^α`.
    pub fn psi_alpha(&self, xi: &[f64]) -> f64 {
        -self.sigma_alpha_pow(xi)
    }

    /// Imaginary parts of `τ_α(ξ) = i ∇(σ_α^α)(ξ)`.
    pub fn tau_alpha_im(&self, xi: &[f64]) -> Vec<f64> {
        self.lambda1.grad_abs_pow(self.dim, xi, self.alpha)
    }

    /// `τ_α(ξ) = i α ∫ y |⟨y,ξ⟩|^{α-1} sign⟨y,ξ⟩ λ₁(dy)`; `τ_α(0) = 0`.
    pub fn tau_alpha(&self, xi: &[f64]) -> Vec<Complex64> {
        self.tau_alpha_im(xi)
            .into_iter()
            .map(|v| Complex64::new(0.0, v))
            .collect()
    }

    /// Imaginary parts of `m_σ(ξ) = i (π/2) ∫ y sign⟨y,ξ⟩ σ(dy)`.
    pub fn m_sigma_im(&self, xi: &[f64]) -> Vec<f64> {
        self.sigma
            .sign_mean(self.dim, xi)
            .into_iter()
            .map(|v| PI / 2.0 * v)
            .collect()
    }

    pub fn m_sigma(&self, xi: &[f64]) -> Vec<Complex64> {
        self.m_sigma_im(xi)
            .into_iter()
            .map(|v| Complex64::new(0.0, v))
            .collect()
    }

    /// Imaginary parts of the symbol `iα∇σ_α(ξ)` of the anisotropic Riesz
    /// transform `𝓡_α`; zero at `ξ = 0`.
    pub fn m_alpha_im(&self, xi: &[f64]) -> Vec<f64> {
        let s = self.sigma_alpha(xi);
        if s == 0.0 {
            return vec![0.0; self.dim];
        }
        // ∇σ = ∇(σ^α) / (α σ^{α-1})
        let g = self.tau_alpha_im(xi);
        g.into_iter().map(|v| v / s.powf(self.alpha - 1.0)).collect()
    }

    /// `Σ = ∫ y yᵀ σ(dy)`.
    pub fn sigma_matrix(&self) -> SigmaMatrix {
        SigmaMatrix {
            entries: self.sigma.second_moment(self.dim),
        }
    }

    /// Boundary points `θ/σ_α(θ)` of `K_α` on a dense direction sample,
    /// used for support-function evaluations.
    fn boundary_points(&self) -> &Vec<Vec<f64>> {
        self.boundary_cache.get_or_init(|| {
            let rule = match self.dim {
                1 => SphereRule::new(1, 2),
                2 => SphereRule::new(2, 4096),
                _ => SphereRule::new(3, 64),
            };
            rule.nodes
                .iter()
                .map(|t| {
                    let s = self.sigma_alpha(t);
                    t.iter().map(|v| v / s).collect()
                })
                .collect()
        })
    }

    /// Dual norm `σ_α*(x) = sup_{σ_α(z)=1} |⟨x,z⟩|`.
    pub fn sigma_alpha_dual(&self, x: &[f64]) -> f64 {
        let nx = norm(x);
        if nx == 0.0 {
            return 0.0;
        }
        if let Some(k) = self.rot_kappa {
            return nx / k.powf(1.0 / self.alpha);
        }
        if let Some(p) = &self.product {
            // σ_α(ξ) = ‖Mᵀξ‖_α  ⇒  σ_α*(x) = ‖M^{-1}x‖_{α'}
            let q = self.alpha / (self.alpha - 1.0);
            let u: Vec<f64> = p.m_inv.iter().map(|row| dot(row, x)).collect();
            return u.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q);
        }
        if self.dim == 1 {
            return nx / self.sigma_alpha(&[1.0]);
        }
        // sampled support function followed by local refinement
        let pts = self.boundary_points();
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, b) in pts.iter().enumerate() {
            let v = dot(b, x).abs();
            if v > best.1 {
                best = (i, v);
            }
        }
        let dir = {
            let b = &pts[best.0];
            let n = norm(b);
            b.iter().map(|v| v / n).collect::<Vec<f64>>()
        };
        let f = |t: &[f64]| dot(t, x).abs() / self.sigma_alpha(t);
        match self.dim {
            2 => {
                let t0 = dir[1].atan2(dir[0]);
                let h = 4.0 * PI / 4096.0;
                let (_, v) = quad::golden_max(|t| f(&[t.cos(), t.sin()]), t0 - h, t0 + h, 80);
                v.max(best.1)
            }
            _ => {
                let (_, v) = quad::sphere_max(3, 4096, f);
                v.max(best.1)
            }
        }
    }

    /// `𝓛_d(K_α)` and `𝓛_d(K̊_α)`.
    pub fn geometry_constants(&self) -> GeometryConstants {
        let d = self.dim;
        if let Some(k) = self.rot_kappa {
            let r = k.powf(1.0 / self.alpha);
            let w = quad::unit_ball_volume(d);
            return GeometryConstants {
                vol_k_alpha: w / r.powi(d as i32),
                vol_k_alpha_polar: w * r.powi(d as i32),
            };
        }
        if let Some(p) = &self.product {
            let q = self.alpha / (self.alpha - 1.0);
            return GeometryConstants {
                vol_k_alpha: quad::lq_ball_volume(d, self.alpha) / p.abs_det,
                vol_k_alpha_polar: quad::lq_ball_volume(d, q) * p.abs_det,
            };
        }
        let rule = match d {
            1 => SphereRule::new(1, 2),
            2 => SphereRule::new(2, 4096),
            _ => SphereRule::new(3, 64),
        };
        let df = d as f64;
        let vol = rule.integrate(|t| self.sigma_alpha(t).powf(-df)) / df;
        let pts = self.boundary_points();
        let polar = rule.integrate(|t| {
            let h = pts.iter().map(|b| dot(b, t)).fold(f64::NEG_INFINITY, f64::max);
            h.powf(-df)
        }) / df;
        GeometryConstants {
            vol_k_alpha: vol,
            vol_k_alpha_polar: polar,
        }
    }

    /// Canonical JSON description.
    pub fn to_spec(&self) -> ModelSpec {
        let sigma = match &self.sigma {
            SpectralMeasure::Discrete(atoms) => SigmaSpec::Discrete {
                atoms: atoms.clone(),
                normalization: Some(Normalization::Levy),
            },
            SpectralMeasure::RotationInvariant { mass } => SigmaSpec::Rotinv {
                mass: Some(*mass),
                normalization: Some(Normalization::Levy),
            },
            SpectralMeasure::SphericalDensity { nodes, weights } => SigmaSpec::Density {
                directions: Some(nodes.clone()),
                weights: Some(weights.clone()),
                matrix: None,
                power: None,
                mass: None,
                resolution: None,
                normalization: Some(Normalization::Levy),
            },
        };
        ModelSpec {
            alpha: self.alpha,
            dim: self.dim,
            sigma,
            gamma_exponent: self.gamma_exponent,
        }
    }
}

/// Volumes of the unit ball of `σ_α` and of its polar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    pub vol_k_alpha: f64,
    pub vol_k_alpha_polar: f64,
}

fn product_structure(alpha: f64, dim: usize, lambda1: &SpectralMeasure) -> Option<ProductStructure> {
    let SpectralMeasure::Discrete(raw) = lambda1 else {
        return None;
    };
    // atoms on the same line carry the same symmetric mass
    let mut atoms: Vec<Atom> = Vec::new();
    for a in raw {
        match atoms
            .iter_mut()
            .find(|b| (dot(&a.direction, &b.direction).abs() - 1.0).abs() < 1e-12)
        {
            Some(b) => b.weight += a.weight,
            None => atoms.push(a.clone()),
        }
    }
    if atoms.len() != dim {
        return None;
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        (2.0 * atoms[j].weight).powf(1.0 / alpha) * atoms[j].direction[i]
    });
    let det = m.determinant();
    if det.abs() < 1e-12 {
        return None;
    }
    let inv = m.clone().try_inverse()?;
    let rows = |a: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..dim).map(|i| (0..dim).map(|j| a[(i, j)]).collect()).collect()
    };
    // axis-aligned: atom j is ±e_{k(j)} with distinct k
    let mut scales = vec![0.0; dim];
    let mut axis = true;
    for a in atoms {
        let hits: Vec<usize> = (0..dim).filter(|&k| a.direction[k].abs() > 1e-14).collect();
        if hits.len() != 1 || scales[hits[0]] != 0.0 {
            axis = false;
            break;
        }
        scales[hits[0]] = (2.0 * a.weight).powf(1.0 / alpha);
    }
    Some(ProductStructure {
        m: rows(&m),
        m_inv: rows(&inv),
        abs_det: det.abs(),
        axis_scales: if axis { Some(scales) } else { None },
    })
}

// ---------------------------------------------------------------------------
// JSON model description
// ---------------------------------------------------------------------------

/// How the weights/mass in a model description are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// The measure given is the spectral measure `λ₁`.
    Spectral,
    /// The measure given is the spherical part `σ` of the Lévy measure.
    Levy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SigmaSpec {
    /// Default normalisation: `spectral`.
    Discrete {
        atoms: Vec<Atom>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        normalization: Option<Normalization>,
    },
    /// `mass` is relative to `σ_L`; when absent, the canonical
    /// normalisation `σ_α(ξ) = ‖ξ‖/2^{1/α}` is used.  Default
    /// normalisation: `levy`.
    Rotinv {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        normalization: Option<Normalization>,
    },
    /// Either explicit symmetric quadrature (`directions`, `weights`) or
    /// the parametric family `ρ(θ) ∝ (θᵀAθ)^power` with total `mass`,
    /// discretised at `resolution`.  Default normalisation: `levy`.
    Density {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        directions: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        power: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        normalization: Option<Normalization>,
    },
}

/// `{"alpha": .., "dim": .., "sigma": {"kind": ..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub alpha: f64,
    pub dim: usize,
    pub sigma: SigmaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_exponent: Option<f64>,
}

impl ModelSpec {
    /// Validate and build; errors carry JSON pointers rooted at `prefix`.
    pub fn build(&self, prefix: &str) -> Result<StableModel> {
        let alpha = self.alpha;
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::schema(
                format!("{prefix}/alpha"),
                format!("alpha must lie in (1, 2), got {alpha}"),
            ));
        }
        let d = self.dim;
        if d == 0 || d > 3 {
            return Err(Error::schema(format!("{prefix}/dim"), "dim must be 1, 2 or 3"));
        }
        let sp = format!("{prefix}/sigma");
        let (measure, norm) = match &self.sigma {
            SigmaSpec::Discrete { atoms, normalization } => {
                if atoms.is_empty() {
                    return Err(Error::schema(format!("{sp}/atoms"), "at least one atom required"));
                }
                for (i, a) in atoms.iter().enumerate() {
                    if a.direction.len() != d {
                        return Err(Error::schema(
                            format!("{sp}/atoms/{i}/direction"),
                            format!("direction must have {d} components"),
                        ));
                    }
                    if !(a.weight > 0.0) {
                        return Err(Error::schema(
                            format!("{sp}/atoms/{i}/weight"),
                            "weight must be positive",
                        ));
                    }
                    if norm(&a.direction) == 0.0 {
                        return Err(Error::schema(
                            format!("{sp}/atoms/{i}/direction"),
                            "direction must be non-zero",
                        ));
                    }
                }
                let pairs: Vec<(Vec<f64>, f64)> =
                    atoms.iter().map(|a| (a.direction.clone(), a.weight)).collect();
                (
                    SpectralMeasure::discrete(&pairs),
                    normalization.unwrap_or(Normalization::Spectral),
                )
            }
            SigmaSpec::Rotinv { mass, normalization } => {
                let norm = normalization.unwrap_or(Normalization::Levy);
                let m = match mass {
                    Some(m) if *m > 0.0 => *m,
                    Some(_) => {
                        return Err(Error::schema(format!("{sp}/mass"), "mass must be positive"))
                    }
                    None => {
                        let c = rotational_constant(alpha, d);
                        match norm {
                            Normalization::Levy => c,
                            Normalization::Spectral => c * lambda1_factor(alpha),
                        }
                    }
                };
                (SpectralMeasure::RotationInvariant { mass: m }, norm)
            }
            SigmaSpec::Density {
                directions,
                weights,
                matrix,
                power,
                mass,
                resolution,
                normalization,
            } => {
                let norm = normalization.unwrap_or(Normalization::Levy);
                let m = match (directions, weights, matrix) {
                    (Some(dirs), Some(w), None) => {
                        if dirs.len() != w.len() {
                            return Err(Error::schema(
                                format!("{sp}/weights"),
                                "weights and directions differ in length",
                            ));
                        }
                        if let Some(i) = dirs.iter().position(|y| y.len() != d) {
                            return Err(Error::schema(
                                format!("{sp}/directions/{i}"),
                                format!("direction must have {d} components"),
                            ));
                        }
                        SpectralMeasure::SphericalDensity {
                            nodes: dirs
                                .iter()
                                .map(|y| {
                                    let n = norm_of(y);
                                    y.iter().map(|v| v / n).collect()
                                })
                                .collect(),
                            weights: w.clone(),
                        }
                    }
                    (None, None, Some(a)) => {
                        if a.len() != d || a.iter().any(|r| r.len() != d) {
                            return Err(Error::schema(
                                format!("{sp}/matrix"),
                                format!("matrix must be {d}x{d}"),
                            ));
                        }
                        let pw = power.unwrap_or(1.0);
                        let res = resolution.unwrap_or(if d == 3 { 48 } else { 512 });
                        let a = a.clone();
                        let raw = SpectralMeasure::spherical_density(d, res, move |t| {
                            let q: f64 = (0..d)
                                .map(|i| (0..d).map(|j| t[i] * a[i][j] * t[j]).sum::<f64>())
                                .sum();
                            q.max(0.0).powf(pw)
                        });
                        let total = raw.mass(d);
                        if !(total > 0.0) {
                            return Err(Error::schema(
                                format!("{sp}/matrix"),
                                "density vanishes identically",
                            ));
                        }
                        let target = mass.unwrap_or(total);
                        raw.scaled(target / total)
                    }
                    _ => {
                        return Err(Error::schema(
                            sp,
                            "density needs either directions+weights or matrix",
                        ))
                    }
                };
                (m, norm)
            }
        };
        let model = match norm {
            Normalization::Levy => StableModel::new(alpha, d, measure),
            Normalization::Spectral => StableModel::from_lambda1(alpha, d, measure),
        };
        let model = model.map_err(|e| Error::schema(sp.clone(), e.to_string()))?;
        match self.gamma_exponent {
            Some(g) => model
                .with_gamma_exponent(g)
                .map_err(|e| Error::schema(format!("{prefix}/gamma_exponent"), e.to_string())),
            None => Ok(model),
        }
    }
}

fn norm_of(y: &[f64]) -> f64 {
    norm(y)
}

impl StableModel {
    /// Parse a JSON model description.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)
            .map_err(|e| Error::schema("", e.to_string()))?;
        spec.build("")
    }
}
