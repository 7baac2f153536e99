//! Shapes, volumes, anisotropic surface perimeters, semigroup perimeters
//! and the heat content `K_t(A, B) = ⟨P_t 1_A, 1_B⟩`.

use crate::densities::abs_moment_1d;
use crate::error::{Error, Result};
use crate::quad::{self, gamma, SphereRule};
use crate::spectral_engine::{gaussian_semigroup, gradient, Grid, GridField, SpectralEngine};
use crate::stable_model::StableModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Indicator-set descriptors.
#[derive(Debug, Clone)]
pub enum Shape {
    Hyperrectangle { half_widths: Vec<f64>, center: Vec<f64> },
    /// `{‖x - c‖_q ≤ r}`, `q ∈ [1, ∞]`.
    LqBall { q: f64, radius: f64, center: Vec<f64> },
    /// `{σ_α*(x - c) ≤ r} = c + r·K̊_α`.
    SigmaDualBall { model: Box<StableModel>, radius: f64, center: Vec<f64> },
    /// Raw raster on a fixed grid.
    Mask { grid: Grid, inside: Vec<bool> },
}

impl Shape {
    pub fn rect(half_widths: &[f64]) -> Self {
        Shape::Hyperrectangle {
            half_widths: half_widths.to_vec(),
            center: vec![0.0; half_widths.len()],
        }
    }

    pub fn lq_ball(dim: usize, q: f64, radius: f64) -> Self {
        Shape::LqBall { q, radius, center: vec![0.0; dim] }
    }

    pub fn sigma_dual_ball(model: &StableModel, radius: f64) -> Self {
        Shape::SigmaDualBall {
            model: Box::new(model.clone()),
            radius,
            center: vec![0.0; model.dim()],
        }
    }

    /// Mask from the support (`> 0.5`) of a field.
    pub fn mask(field: &GridField) -> Self {
        Shape::Mask {
            grid: *field.grid(),
            inside: field.values().iter().map(|v| *v > 0.5).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Hyperrectangle { half_widths, .. } => half_widths.len(),
            Shape::LqBall { center, .. } | Shape::SigmaDualBall { center, .. } => center.len(),
            Shape::Mask { grid, .. } => grid.dim(),
        }
    }

    /// The same shape dilated by `λ` about its centre.
    pub fn dilate(&self, lam: f64) -> Result<Self> {
        Ok(match self {
            Shape::Hyperrectangle { half_widths, center } => Shape::Hyperrectangle {
                half_widths: half_widths.iter().map(|a| a * lam).collect(),
                center: center.clone(),
            },
            Shape::LqBall { q, radius, center } => Shape::LqBall {
                q: *q,
                radius: radius * lam,
                center: center.clone(),
            },
            Shape::SigmaDualBall { model, radius, center } => Shape::SigmaDualBall {
                model: model.clone(),
                radius: radius * lam,
                center: center.clone(),
            },
            Shape::Mask { .. } => return Err(Error::UnsupportedShape("masks cannot be dilated".into())),
        })
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Hyperrectangle { half_widths, center } => {
                half_widths.len() == center.len() && half_widths.iter().all(|a| *a > 0.0)
            }
            Shape::LqBall { q, radius, .. } => *q >= 1.0 && *radius > 0.0,
            Shape::SigmaDualBall { model, radius, center } => {
                *radius > 0.0 && model.dim() == center.len()
            }
            Shape::Mask { grid, inside } => inside.len() == grid.len() && inside.iter().any(|b| *b),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedShape(format!("degenerate shape {self:?}")))
        }
    }

    /// Membership test for closed-form shapes.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Hyperrectangle { half_widths, center } => x
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((x, c), a)| (x - c).abs() <= *a),
            Shape::LqBall { q, radius, center } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                lq_norm(&y, *q) <= *radius
            }
            Shape::SigmaDualBall { model, radius, center } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                model.sigma_alpha_dual(&y) <= *radius
            }
            Shape::Mask { grid, inside } => {
                let h = grid.spacing();
                let l = grid.half_width();
                let mut ks = [0usize; 3];
                for (a, v) in x.iter().enumerate() {
                    let k = ((v + l) / h).floor();
                    if k < 0.0 || k >= grid.n() as f64 {
                        return false;
                    }
                    ks[a] = k as usize;
                }
                inside[grid.ravel(&ks[..grid.dim()])]
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let ext: Vec<f64>;
        let center: &[f64];
        match self {
            Shape::Hyperrectangle { half_widths, center: c } => {
                ext = half_widths.clone();
                center = c;
            }
            Shape::LqBall { radius, center: c, .. } => {
                ext = vec![*radius; c.len()];
                center = c;
            }
            Shape::SigmaDualBall { model, radius, center: c } => {
                // sup{x_k : σ_α*(x) ≤ r} = r σ_α(e_k)
                ext = (0..c.len())
                    .map(|k| {
                        let mut e = vec![0.0; c.len()];
                        e[k] = 1.0;
                        radius * model.sigma_alpha(&e)
                    })
                    .collect();
                center = c;
            }
            Shape::Mask { grid, inside } => {
                let d = grid.dim();
                let h = grid.spacing();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for (i, _) in inside.iter().enumerate().filter(|(_, b)| **b) {
                    let ks = grid.unravel(i);
                    for a in 0..d {
                        let x = grid.coord(ks[a]);
                        lo[a] = lo[a].min(x);
                        hi[a] = hi[a].max(x + h);
                    }
                }
                return (lo, hi);
            }
        }
        (
            center.iter().zip(&ext).map(|(c, e)| c - e).collect(),
            center.iter().zip(&ext).map(|(c, e)| c + e).collect(),
        )
    }
}

/// `‖x‖_q`, `q ∈ [1, ∞]`.
pub fn lq_norm(x: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        x.iter().fold(0.0, |a, b| a.max(b.abs()))
    } else {
        x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Hard 0/1 indicator sampled at cell centres (grid point plus half a
/// cell along every axis).  The shape must keep a distance of at least
/// `L/4` from the box boundary.
pub fn rasterize(shape: &Shape, grid: &Grid) -> Result<GridField> {
    shape.validate()?;
    if shape.dim() != grid.dim() {
        return Err(Error::SizeMismatch { expected: grid.dim(), got: shape.dim() });
    }
    if let Shape::Mask { grid: g, inside } = shape {
        if g != grid {
            return Err(Error::UnsupportedShape("mask lives on a different grid".into()));
        }
        check_margin(shape, grid)?;
        return GridField::new(*grid, inside.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect());
    }
    check_margin(shape, grid)?;
    let h = grid.spacing();
    let (lo, hi) = shape.bounding_box();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| {
            let x: Vec<f64> = grid.point(i).iter().map(|v| v + 0.5 * h).collect();
            let inside_box = x.iter().zip(&lo).zip(&hi).all(|((v, a), b)| *v >= *a && *v <= *b);
            if inside_box && shape.contains(&x) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    GridField::new(*grid, values)
}

fn check_margin(shape: &Shape, grid: &Grid) -> Result<()> {
    let l = grid.half_width();
    let (lo, hi) = shape.bounding_box();
    let limit = 0.75 * l + 1e-12;
    if lo.iter().chain(&hi).any(|v| v.abs() > limit) {
        return Err(Error::ShapeTooLarge);
    }
    Ok(())
}

/// Exact volume where a closed form exists, otherwise the raster volume.
pub fn volume(shape: &Shape) -> Result<f64> {
    shape.validate()?;
    let d = shape.dim();
    Ok(match shape {
        Shape::Hyperrectangle { half_widths, .. } => half_widths.iter().map(|a| 2.0 * a).product(),
        Shape::LqBall { q, radius, .. } => quad::lq_ball_volume(d, *q) * radius.powi(d as i32),
        Shape::SigmaDualBall { model, radius, .. } => {
            model.geometry_constants().vol_k_alpha_polar * radius.powi(d as i32)
        }
        Shape::Mask { grid, inside } => {
            inside.iter().filter(|b| **b).count() as f64 * grid.cell_volume()
        }
    })
}

/// Monte Carlo volume: `(estimate, standard error)` from uniform samples in
/// the bounding box.
pub fn volume_monte_carlo(shape: &Shape, samples: usize, seed: u64) -> Result<(f64, f64)> {
    shape.validate()?;
    let (lo, hi) = shape.bounding_box();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; lo.len()];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (k, v) in x.iter_mut().enumerate() {
            *v = rng.gen_range(lo[k]..hi[k]);
        }
        if shape.contains(&x) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok((box_vol * p, box_vol * (p * (1.0 - p) / samples as f64).sqrt()))
}

/// `∫_{∂E} σ_α(n) dH^{d-1}` for rectangles and balls (`d ∈ {2, 3}`).
pub fn surface_perimeter_aniso(model: &StableModel, shape: &Shape) -> Result<f64> {
    surface_perimeter_with(shape, |n| model.sigma_alpha(n), Some(model))
}

/// Euclidean surface measure of `∂E`.
pub fn surface_perimeter(shape: &Shape) -> Result<f64> {
    surface_perimeter_with(shape, |n| n.iter().map(|v| v * v).sum::<f64>().sqrt(), None)
}

fn surface_perimeter_with(
    shape: &Shape,
    norm: impl Fn(&[f64]) -> f64,
    model: Option<&StableModel>,
) -> Result<f64> {
    shape.validate()?;
    let d = shape.dim();
    if d == 1 && !matches!(shape, Shape::Mask { .. }) {
        // an interval: two boundary points with normals ±1
        return Ok(2.0 * norm(&[1.0]));
    }
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedShape(format!("surface perimeter needs d in {{1, 2, 3}}, got {d}")));
    }
    let rect_faces = |a: &[f64]| -> f64 {
        (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                let face: f64 = (0..d).filter(|k| *k != i).map(|k| 2.0 * a[k]).product();
                2.0 * norm(&e) * face
            })
            .sum()
    };
    match shape {
        Shape::Hyperrectangle { half_widths, .. } => Ok(rect_faces(half_widths)),
        Shape::LqBall { q, radius, .. } if q.is_infinite() => Ok(rect_faces(&vec![*radius; d])),
        Shape::LqBall { q, radius, .. } => {
            let q = *q;
            let grad = |t: &[f64]| -> Vec<f64> {
                let n = lq_norm(t, q);
                t.iter()
                    .map(|v| v.signum() * (v.abs() / n).powf(q - 1.0))
                    .collect()
            };
            Ok(radius.powi(d as i32 - 1) * polar_boundary_integral(d, |t| lq_norm(t, q), grad, &norm))
        }
        Shape::SigmaDualBall { model: own, radius, .. } => {
            if let Some(m) = model {
                if **own == *m {
                    // σ_α is the support function of K̊_α
                    return Ok(d as f64 * radius.powi(d as i32 - 1) * own.geometry_constants().vol_k_alpha_polar);
                }
            }
            let g = |t: &[f64]| own.sigma_alpha_dual(t);
            let grad = |t: &[f64]| -> Vec<f64> {
                let h = 1e-6;
                (0..d)
                    .map(|k| {
                        let mut a = t.to_vec();
                        let mut b = t.to_vec();
                        a[k] += h;
                        b[k] -= h;
                        (g(&a) - g(&b)) / (2.0 * h)
                    })
                    .collect()
            };
            Ok(radius.powi(d as i32 - 1) * polar_boundary_integral(d, g, grad, &norm))
        }
        Shape::Mask { .. } => Err(Error::UnsupportedShape("masks have no surface perimeter".into())),
    }
}

/// `∫_{∂{g ≤ 1}} N(n) dH = ∫_{S^{d-1}} N(∇g(θ)) g(θ)^{-d} dθ` for a gauge
/// `g` (positively 1-homogeneous, `∇g` 0-homogeneous).
fn polar_boundary_integral(
    d: usize,
    g: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    norm: &impl Fn(&[f64]) -> f64,
) -> f64 {
    let rule = if d == 2 { SphereRule::new(2, 1 << 16) } else { SphereRule::new(3, 384) };
    rule.integrate(|t| norm(&grad(t)) * g(t).powi(-(d as i32)))
}

/// The semigroup driving heat contents: the stable one of a model, or the
/// Gaussian endpoint `e^{-t‖ξ‖²}`.
#[derive(Debug, Clone)]
pub enum HeatFlow {
    Stable(SpectralEngine),
    Gaussian(Grid),
}

impl HeatFlow {
    pub fn stable(model: &StableModel, grid: Grid) -> Result<Self> {
        Ok(HeatFlow::Stable(SpectralEngine::new(model, grid)?))
    }

    pub fn grid(&self) -> &Grid {
        match self {
            HeatFlow::Stable(e) => e.grid(),
            HeatFlow::Gaussian(g) => g,
        }
    }

    /// Index of the flow: `α` or `2`.
    pub fn alpha(&self) -> f64 {
        match self {
            HeatFlow::Stable(e) => e.model().alpha(),
            HeatFlow::Gaussian(_) => 2.0,
        }
    }

    pub fn apply(&self, f: &GridField, t: f64) -> Result<GridField> {
        match self {
            HeatFlow::Stable(e) => e.semigroup(f, t),
            HeatFlow::Gaussian(_) => gaussian_semigroup(f, t),
        }
    }

    /// The norm `σ` with symbol `e^{-tσ(ξ)^α}`.
    pub fn sigma(&self, v: &[f64]) -> f64 {
        match self {
            HeatFlow::Stable(e) => e.model().sigma_alpha(v),
            HeatFlow::Gaussian(_) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    /// `E|Y|` of the one-dimensional marginal with symbol `e^{-|ξ|^α}`.
    pub fn e_abs_y(&self) -> f64 {
        abs_moment_1d(self.alpha(), 1.0)
    }

    /// `∫_{∂E} σ(n) dH`.
    pub fn surface_perimeter(&self, shape: &Shape) -> Result<f64> {
        match self {
            HeatFlow::Stable(e) => surface_perimeter_aniso(e.model(), shape),
            HeatFlow::Gaussian(_) => surface_perimeter(shape),
        }
    }
}

/// `K_t(A, B) = ⟨P_t 1_A, 1_B⟩`.
pub fn heat_content(flow: &HeatFlow, a: &Shape, b: &Shape, t: f64) -> Result<f64> {
    check_t(t)?;
    let ia = rasterize(a, flow.grid())?;
    let ib = rasterize(b, flow.grid())?;
    Ok(flow.apply(&ia, t)?.inner(&ib))
}

/// `K_t(A, A^c) = 𝓛_d(A) - ⟨P_t 1_A, 1_A⟩`.
pub fn heat_content_complement(flow: &HeatFlow, a: &Shape, t: f64) -> Result<f64> {
    check_t(t)?;
    let ia = rasterize(a, flow.grid())?;
    complement_from_indicator(flow, &ia, t)
}

fn complement_from_indicator(flow: &HeatFlow, ia: &GridField, t: f64) -> Result<f64> {
    let pt = flow.apply(ia, t)?;
    Ok(ia.integral() - pt.inner(ia))
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// Strictly decreasing, at least four values, smallest one resolved.
pub fn check_time_sequence(ts: &[f64], alpha: f64, grid: &Grid) -> Result<()> {
    if ts.len() < 4 {
        return Err(Error::BadTimeSequence(format!("need at least 4 times, got {}", ts.len())));
    }
    if ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::BadTimeSequence("times must be positive and finite".into()));
    }
    if ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadTimeSequence("times must be strictly decreasing".into()));
    }
    let t = *ts.last().unwrap();
    let resolved = t.powf(1.0 / alpha) * grid.xi_max();
    if resolved < 4.0 * (1.0 - 1e-9) {
        return Err(Error::ResolutionGuard { t, resolved });
    }
    Ok(())
}

/// `n` log-spaced, strictly decreasing times with `t^{1/α}` ranging over
/// `[guard/ξ_max, span·guard/ξ_max]`; `guard ≥ 4` keeps the smallest time
/// resolved.
pub fn default_time_sequence(alpha: f64, grid: &Grid, n: usize, guard: f64, span: f64) -> Vec<f64> {
    let s_min = guard / grid.xi_max();
    let mut ts = crate::spectral_engine::log_space(s_min.powf(alpha), (s_min * span).powf(alpha), n);
    ts.reverse();
    ts
}

/// Ten times with `t^{1/α}·ξ_max` from `4` to `86`.
pub fn study_times(alpha: f64, grid: &Grid) -> Vec<f64> {
    default_time_sequence(alpha, grid, 10, 4.0, 21.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerimeterKind {
    /// `lim ‖σ_α(∇P_t 1_E)‖₁`, extrapolated in `t^{1/α}`.
    Classical,
    /// `lim ‖D^{α-1} P_t 1_E‖₁`, extrapolated in `t^{1-1/α}`.
    Fractional,
}

/// Per-time semigroup perimeters and their extrapolated limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterStudy {
    pub kind: PerimeterKind,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Exponents `e_j` and coefficients `b_j` of the fitted correction
    /// `Σ_j b_j t^{e_j}`.
    pub rate_exponents: Vec<f64>,
    pub rate_coefficients: Vec<f64>,
    /// RMS residual of the extrapolation fit.
    pub residual: f64,
    /// Values nonincreasing in `t` (within `1e-6` relative).
    pub monotone: bool,
}

/// `‖σ_α(∇P_t 1_E)‖₁` at a single time.
pub fn perimeter_cl_at(flow: &HeatFlow, indicator: &GridField, t: f64) -> Result<f64> {
    let pt = flow.apply(indicator, t)?;
    let g = gradient(&pt)?;
    Ok(g.pointwise(|v| flow.sigma(v)).integral())
}

/// `‖D^{α-1}P_t 1_E‖₁` on the periodic box at a single time.
pub fn perimeter_frac_at(engine: &SpectralEngine, indicator: &GridField, t: f64) -> Result<f64> {
    let pt = engine.semigroup(indicator, t)?;
    Ok(engine.frac_gradient(&pt)?.magnitude().integral())
}

/// `‖D^{α-1}P_t 1_E‖_{L¹(ℝ^d)}` with the far field restored.
///
/// `D^{α-1}P_t 1_E` decays like `|x|^{1-d-α}`, so the periodic box of
/// half-width `L` misses an `O(L^{1-α})` share of the norm. The value is
/// computed on the box and on a box twice as wide with the same spacing,
/// and the `L^{1-α}` term is eliminated.
pub struct FracPerimeter {
    small: SpectralEngine,
    large: SpectralEngine,
    ind_small: GridField,
    ind_large: GridField,
}

impl FracPerimeter {
    pub fn new(engine: &SpectralEngine, shape: &Shape) -> Result<Self> {
        let g = engine.grid();
        let big = Grid::new(g.dim(), 2.0 * g.half_width(), 2 * g.n())?;
        let large = SpectralEngine::new(engine.model(), big)?;
        Ok(FracPerimeter {
            small: engine.clone(),
            ind_small: rasterize(shape, g)?,
            ind_large: rasterize(shape, &big)?,
            large,
        })
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let a = perimeter_frac_at(&self.small, &self.ind_small, t)?;
        let b = perimeter_frac_at(&self.large, &self.ind_large, t)?;
        let r = 2f64.powf(self.small.model().alpha() - 1.0) - 1.0;
        Ok(b + (b - a) / r)
    }
}

/// Classical semigroup perimeter `𝒫_cl(E)`.
pub fn perimeter_cl(flow: &HeatFlow, shape: &Shape, ts: &[f64]) -> Result<PerimeterStudy> {
    perimeter_guards(shape)?;
    check_time_sequence(ts, flow.alpha(), flow.grid())?;
    let ind = rasterize(shape, flow.grid())?;
    let values = ts
        .par_iter()
        .map(|&t| perimeter_cl_at(flow, &ind, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(extrapolate(PerimeterKind::Classical, ts, values, flow.alpha()))
}

/// Fractional semigroup perimeter `𝒫_frac(E)`.
pub fn perimeter_frac(engine: &SpectralEngine, shape: &Shape, ts: &[f64]) -> Result<PerimeterStudy> {
    perimeter_guards(shape)?;
    let al = engine.model().alpha();
    check_time_sequence(ts, al, engine.grid())?;
    let fp = FracPerimeter::new(engine, shape)?;
    let values = ts
        .par_iter()
        .map(|&t| fp.at(t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(extrapolate(PerimeterKind::Fractional, ts, values, al))
}

fn perimeter_guards(shape: &Shape) -> Result<()> {
    if let Shape::Mask { .. } = shape {
        return Err(Error::UnsupportedShape("perimeter limits need a closed-form shape".into()));
    }
    Ok(())
}

fn extrapolate(kind: PerimeterKind, ts: &[f64], values: Vec<f64>, alpha: f64) -> PerimeterStudy {
    let exps = match kind {
        PerimeterKind::Classical => vec![1.0 / alpha, 1.0],
        PerimeterKind::Fractional => vec![1.0 - 1.0 / alpha, 1.0 / alpha],
    };
    let fit = power_fit(ts, &values, &exps);
    let monotone = values
        .windows(2)
        .all(|w| w[0] <= w[1] * (1.0 + 1e-6) + 1e-12);
    PerimeterStudy {
        kind,
        t: ts.to_vec(),
        values,
        limit: fit.intercept,
        rate_exponents: fit.exponents,
        rate_coefficients: fit.coefficients,
        residual: fit.rms,
        monotone,
    }
}

#[derive(Debug, Clone)]
struct PowerFit {
    intercept: f64,
    exponents: Vec<f64>,
    coefficients: Vec<f64>,
    intercept_stderr: f64,
    rms: f64,
}

/// Least squares `y ≈ c + Σ_j b_j t^{e_j}`; exponents that coincide are
/// merged and the basis is truncated so that at least two degrees of
/// freedom remain.
fn power_fit(ts: &[f64], y: &[f64], exps: &[f64]) -> PowerFit {
    let mut e: Vec<f64> = Vec::new();
    for &x in exps {
        if e.iter().all(|v| (v - x).abs() > 1e-9) {
            e.push(x);
        }
    }
    e.truncate(ts.len().saturating_sub(3).max(1));
    let n = ts.len();
    let m = e.len() + 1;
    let a = nalgebra::DMatrix::from_fn(n, m, |i, j| if j == 0 { 1.0 } else { ts[i].powf(e[j - 1]) });
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(&b, 1e-14).expect("svd with vectors");
    let r = &a * &sol - &b;
    let ss = r.norm_squared();
    let dof = (n as f64 - m as f64).max(1.0);
    let cov = (a.transpose() * &a).try_inverse();
    let stderr = cov.map(|c| (c[(0, 0)] * ss / dof).sqrt()).unwrap_or(f64::INFINITY);
    PowerFit {
        intercept: sol[0],
        coefficients: sol.iter().skip(1).copied().collect(),
        exponents: e,
        intercept_stderr: stderr,
        rms: (ss / n as f64).sqrt(),
    }
}

/// Small-time slope of `K_t(E, E^c) / t^{1/α}` and its closed-form
/// reference `(E|Y_α|/2) ∫_{∂E} σ_α(n) dH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSlope {
    pub t: Vec<f64>,
    pub heat_content: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Exponents `e_j` and coefficients `b_j` of the fitted correction
    /// `K_t/t^{1/α} = c + Σ_j b_j t^{e_j}`.
    pub correction_exponents: Vec<f64>,
    pub correction_coefficients: Vec<f64>,
    pub residual: f64,
    pub reference: Option<f64>,
    pub ratio: Option<f64>,
}

/// Fit `K_t(E, E^c)/t^{1/α} = c + b₁ t^{1-1/α} + b₂ t^{1/α} + b₃ t +
/// b₄ h² t^{-2/α}`: the heavy tail of the law contributes `t^{1-1/α}`,
/// curvature and corners `t^{1/α}` and `t`, and the last term absorbs the
/// leading discretization error of hard indicators on a grid of spacing
/// `h`.
pub fn heat_content_slope(flow: &HeatFlow, shape: &Shape, ts: &[f64]) -> Result<HeatSlope> {
    let al = flow.alpha();
    check_time_sequence(ts, al, flow.grid())?;
    let ind = rasterize(shape, flow.grid())?;
    let k = ts
        .par_iter()
        .map(|&t| complement_from_indicator(flow, &ind, t))
        .collect::<Result<Vec<f64>>>()?;
    slope_from_values(flow, shape, ts, k)
}

fn slope_from_values(flow: &HeatFlow, shape: &Shape, ts: &[f64], k: Vec<f64>) -> Result<HeatSlope> {
    let al = flow.alpha();
    let y: Vec<f64> = ts.iter().zip(&k).map(|(t, v)| v / t.powf(1.0 / al)).collect();
    let fit = power_fit(ts, &y, &[1.0 - 1.0 / al, 1.0 / al, 1.0, -2.0 / al]);
    if !(fit.intercept > 0.0) || fit.rms > 0.1 * fit.intercept.abs() {
        return Err(Error::FitDiverged { residual: fit.rms, slope: fit.intercept });
    }
    let reference = match shape {
        Shape::Mask { .. } => None,
        _ => flow.surface_perimeter(shape).ok().map(|p| flow.e_abs_y() / 2.0 * p),
    };
    Ok(HeatSlope {
        t: ts.to_vec(),
        heat_content: k,
        slope: fit.intercept,
        slope_stderr: fit.intercept_stderr,
        correction_exponents: fit.exponents,
        correction_coefficients: fit.coefficients,
        residual: fit.rms,
        reference,
        ratio: reference.map(|r| fit.intercept / r),
    })
}

/// `Γ(1 - 1/α)/π`, the slope-to-perimeter factor `E|Y_α|/2`.
pub fn slope_perimeter_factor(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        1.0 / PI.sqrt()
    } else {
        gamma(1.0 - 1.0 / alpha) / PI
    }
}

/// Combined heat-content and perimeter study on one time sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryStudy {
    pub alpha: f64,
    pub heat: HeatSlope,
    pub classical: PerimeterStudy,
    pub fractional: Option<PerimeterStudy>,
    pub surface_perimeter: Option<f64>,
    pub volume: f64,
    pub raster_volume: f64,
}

/// Heat content, `𝒫_cl` and (for stable flows) `𝒫_frac` on one time
/// sequence.
pub fn geometry_study(flow: &HeatFlow, shape: &Shape, ts: &[f64]) -> Result<GeometryStudy> {
    perimeter_guards(shape)?;
    let al = flow.alpha();
    check_time_sequence(ts, al, flow.grid())?;
    let ind = rasterize(shape, flow.grid())?;
    let fp = match flow {
        HeatFlow::Stable(e) => Some(FracPerimeter::new(e, shape)?),
        HeatFlow::Gaussian(_) => None,
    };
    let rows = ts
        .par_iter()
        .map(|&t| -> Result<(f64, f64, Option<f64>)> {
            let k = complement_from_indicator(flow, &ind, t)?;
            let cl = perimeter_cl_at(flow, &ind, t)?;
            let fr = fp.as_ref().map(|f| f.at(t)).transpose()?;
            Ok((k, cl, fr))
        })
        .collect::<Result<Vec<_>>>()?;
    let k: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let cl: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let heat = slope_from_values(flow, shape, ts, k)?;
    let classical = extrapolate(PerimeterKind::Classical, ts, cl, al);
    let fractional = if rows.iter().all(|r| r.2.is_some()) {
        let fr = rows.iter().map(|r| r.2.unwrap()).collect();
        Some(extrapolate(PerimeterKind::Fractional, ts, fr, al))
    } else {
        None
    };
    Ok(GeometryStudy {
        alpha: al,
        heat,
        classical,
        fractional,
        surface_perimeter: flow.surface_perimeter(shape).ok(),
        volume: volume(shape)?,
        raster_volume: ind.integral(),
    })
}

impl GeometryStudy {
    /// Columns `t, K_t, K_t/t^{1/α}, Pfrac_t, Pcl_t`.
    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "K_t", "K_t/t^(1/alpha)", "Pfrac_t", "Pcl_t"])?;
        for (i, t) in self.heat.t.iter().enumerate() {
            let k = self.heat.heat_content[i];
            let fr = self
                .fractional
                .as_ref()
                .map(|f| format!("{:.12e}", f.values[i]))
                .unwrap_or_default();
            out.write_record([
                format!("{t:.12e}"),
                format!("{k:.12e}"),
                format!("{:.12e}", k / t.powf(1.0 / self.alpha)),
                fr,
                format!("{:.12e}", self.classical.values[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `{slope, slope_stderr, reference, ratio, ...}`.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.heat.slope,
            "slope_stderr": self.heat.slope_stderr,
            "reference": self.heat.reference,
            "ratio": self.heat.ratio,
            "perimeter_cl": self.classical.limit,
            "perimeter_frac": self.fractional.as_ref().map(|f| f.limit),
            "surface_perimeter": self.surface_perimeter,
            "slope_over_perimeter_cl": self.heat.slope / self.classical.limit,
            "volume": self.volume,
            "raster_volume": self.raster_volume,
        })
    }
}
