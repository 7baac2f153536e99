//! Stable densities, their gradients, the kernels `k_{α,T}`, `k_{α,d}`, the
//! potential kernel `V_α` and the scalar moments entering explicit
//! constants.
//!
//! Everything reduces to the radial transforms
//! `C_k(a) = ∫₀^∞ cos(ra) r^k e^{-r^α} dr` and
//! `S_k(a) = ∫₀^∞ sin(ra) r^k e^{-r^α} dr`.  They are computed by direct
//! Gauss–Legendre quadrature on a table `a ∈ [0, 20]` (cubic Hermite
//! interpolation in between) and by their termwise large-`a` expansion
//! beyond, which is also what carries the analytic tails of moment
//! integrals.  The `d`-dimensional density uses the cone representation
//! `p_α(x) = (2π)^{-d} ∫_{S^{d-1}} C_{d-1}(⟨x,θ⟩/σ_α(θ)) σ_L(dθ)/σ_α(θ)^d`
//! and the product path `p_α(x) = Π p_{α,1}((M^{-1}x)_k)/|det M|` when the
//! spectral measure has `d` independent atoms.

use crate::error::{Error, Result};
use crate::quad::{self, gamma, Composite, HermiteTable, SphereRule};
use crate::stable_model::StableModel;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// End of the tabulated range of the radial transforms.
pub const TABLE_END: f64 = 20.0;
const TABLE_STEP: f64 = 1.0 / 128.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Trig {
    Cos,
    Sin,
}

/// Direct quadrature of `∫₀^∞ trig(ra) r^k e^{-r^α} dr`.
fn transform_quadrature(alpha: f64, k: u32, trig: Trig, a: f64) -> f64 {
    let kf = k as f64;
    // e^{-r^α} r^k < 1e-19 beyond r_max
    let mut r_max = 2.0f64;
    while r_max.powf(alpha) - kf * r_max.ln() < 44.0 {
        r_max *= 1.1;
    }
    let first = (1.0f64).min(1.0 / a.abs().max(1.0));
    let mut breaks = vec![0.0];
    // geometric grading toward 0 resolves the r^α singularity
    let mut b = first * 2f64.powi(-40);
    while b < first {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(first);
    let width = (0.5f64).min(1.5 / a.abs().max(1e-12));
    let n = ((r_max - first) / width).ceil().max(1.0) as usize;
    for i in 1..=n {
        breaks.push(first + (r_max - first) * i as f64 / n as f64);
    }
    let rule = Composite::on_breaks(&breaks, 16);
    rule.integrate(|r| {
        let w = r.powf(kf) * (-r.powf(alpha)).exp();
        match trig {
            Trig::Cos => (r * a).cos() * w,
            Trig::Sin => (r * a).sin() * w,
        }
    })
}

/// Coefficients `c_j, ν_j` of the large-`a` expansion `Σ_j c_j a^{-ν_j}`.
fn expansion(alpha: f64, k: u32, trig: Trig) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut fact = 1.0;
    for j in 0..40 {
        if j > 0 {
            fact *= j as f64;
        }
        let nu = k as f64 + 1.0 + j as f64 * alpha;
        let phase = match trig {
            Trig::Cos => (PI * nu / 2.0).cos(),
            Trig::Sin => (PI * nu / 2.0).sin(),
        };
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * gamma(nu) * phase / fact;
        // the cos/sin phase vanishes identically for some (j, k)
        let c = if c.abs() < 1e-15 * gamma(nu) / fact { 0.0 } else { c };
        out.push((c, nu));
    }
    out
}

/// Evaluate an expansion at `a`, truncated at its smallest term.
fn eval_expansion(terms: &[(f64, f64)], a: f64, deriv: bool) -> f64 {
    let mut acc = 0.0;
    let mut last = f64::INFINITY;
    for &(c, nu) in terms {
        let t = if deriv {
            -nu * c * a.powf(-nu - 1.0)
        } else {
            c * a.powf(-nu)
        };
        if c != 0.0 {
            if t.abs() > last {
                break;
            }
            last = t.abs();
        }
        acc += t;
    }
    acc
}

/// `∫_A^∞ a^m (Σ_j c_j a^{-ν_j}) da`, termwise.
fn expansion_tail_moment(terms: &[(f64, f64)], a0: f64, m: f64) -> f64 {
    let mut acc = 0.0;
    let mut last = f64::INFINITY;
    for &(c, nu) in terms {
        if c == 0.0 {
            continue;
        }
        let e = nu - m - 1.0;
        let t = c * a0.powf(-e) / e;
        if t.abs() > last {
            break;
        }
        last = t.abs();
        acc += t;
    }
    acc
}

/// A radial transform: table on `[0, TABLE_END]` plus expansion beyond.
#[derive(Debug)]
struct Transform {
    table: HermiteTable,
    terms: Vec<(f64, f64)>,
    odd: bool,
}

impl Transform {
    fn build(alpha: f64, k: u32, trig: Trig) -> Self {
        let n = (TABLE_END / TABLE_STEP).round() as usize + 1;
        // d/da C_k = -S_{k+1},  d/da S_k = C_{k+1}
        let (dtrig, dsign) = match trig {
            Trig::Cos => (Trig::Sin, -1.0),
            Trig::Sin => (Trig::Cos, 1.0),
        };
        let rows: Vec<(f64, f64)> = {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let a = i as f64 * TABLE_STEP;
                    (
                        transform_quadrature(alpha, k, trig, a),
                        dsign * transform_quadrature(alpha, k + 1, dtrig, a),
                    )
                })
                .collect()
        };
        let (y, dy) = rows.into_iter().unzip();
        Self {
            table: HermiteTable::new(0.0, TABLE_STEP, y, dy),
            terms: expansion(alpha, k, trig),
            odd: trig == Trig::Sin,
        }
    }

    /// Value and derivative at any real `a`.
    fn eval(&self, a: f64) -> (f64, f64) {
        let s = if self.odd && a < 0.0 { -1.0 } else { 1.0 };
        let x = a.abs();
        let (v, dv) = if x <= TABLE_END {
            self.table.eval(x)
        } else {
            (eval_expansion(&self.terms, x, false), eval_expansion(&self.terms, x, true))
        };
        // odd: f(-a) = -f(a), f'(-a) = f'(a); even: f(-a) = f(a), f'(-a) = -f'(a)
        if self.odd {
            (s * v, dv)
        } else if a < 0.0 {
            (v, -dv)
        } else {
            (v, dv)
        }
    }
}

type TransformKey = (u64, u32, Trig);

fn transform(alpha: f64, k: u32, trig: Trig) -> Arc<Transform> {
    static CACHE: OnceLock<Mutex<HashMap<TransformKey, Arc<Transform>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (alpha.to_bits(), k, trig);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let t = Arc::new(Transform::build(alpha, k, trig));
    cache.lock().unwrap().entry(key).or_insert(t).clone()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

/// One-dimensional standard symmetric stable density
/// `p_{α,1}(x) = (2π)^{-1} ∫ e^{ixξ} e^{-|ξ|^α} dξ`, `α ∈ (1, 2]`.
pub fn density_1d(alpha: f64, x: f64) -> f64 {
    if alpha == 2.0 {
        return (-x * x / 4.0).exp() / (2.0 * PI.sqrt());
    }
    transform(alpha, 0, Trig::Cos).eval(x).0 / PI
}

/// `p_{α,1}'(x)`.
pub fn density_1d_deriv(alpha: f64, x: f64) -> f64 {
    if alpha == 2.0 {
        return -x / 2.0 * density_1d(2.0, x);
    }
    transform(alpha, 0, Trig::Cos).eval(x).1 / PI
}

/// `(p_{α,1}(x), p_{α,1}'(x))` in one lookup.
pub fn density_1d_with_deriv(alpha: f64, x: f64) -> (f64, f64) {
    if alpha == 2.0 {
        let p = density_1d(2.0, x);
        return (p, -x / 2.0 * p);
    }
    let (v, dv) = transform(alpha, 0, Trig::Cos).eval(x);
    (v / PI, dv / PI)
}

/// Direct cosine-transform quadrature of `p_{α,1}(x)` (no table, no
/// expansion); the reference the tabulated path is tested against.
pub fn density_1d_quadrature(alpha: f64, x: f64) -> f64 {
    transform_quadrature(alpha, 0, Trig::Cos, x) / PI
}

/// Validated one-dimensional density evaluation.
pub fn density_1d_checked(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(density_1d(alpha, x))
}

/// `E|Y|^p` for the standard one-dimensional law, closed form
/// `2^p Γ((1+p)/2) Γ(1-p/α) / (√π Γ(1-p/2))`, `p < α`.
pub fn abs_moment_1d(alpha: f64, p: f64) -> f64 {
    if alpha == 2.0 {
        return 2f64.powf(p) * gamma((1.0 + p) / 2.0) / PI.sqrt();
    }
    2f64.powf(p) * gamma((1.0 + p) / 2.0) * gamma(1.0 - p / alpha)
        / (PI.sqrt() * gamma(1.0 - p / 2.0))
}

/// `∫ |x|^m p_{α,1}(x) dx` by quadrature of the density (table part plus
/// termwise tail).
pub fn moment_1d_quadrature(alpha: f64, m: f64) -> f64 {
    let t = transform(alpha, 0, Trig::Cos);
    let rule = Composite::uniform(0.0, TABLE_END, 0.125, 12);
    let body = rule.integrate(|x| x.powf(m) * t.eval(x).0);
    let tail = if alpha == 2.0 {
        0.0
    } else {
        expansion_tail_moment(&t.terms, TABLE_END, m)
    };
    2.0 * (body + tail) / PI
}

/// Densities of a `d`-dimensional model.
#[derive(Debug, Clone)]
pub struct Density {
    model: StableModel,
    path: Path,
}

#[derive(Debug, Clone)]
enum Path {
    /// `x = M z`, `p(x) = Π p_1(z_k) / |det M|`.
    Product { m_inv: Vec<Vec<f64>>, abs_det: f64 },
    /// Rotation invariant: `σ_α(ξ)^α = κ‖ξ‖^α`.
    Radial { scale: f64 },
    /// General model through the cone representation.
    Cone,
}

impl Density {
    pub fn new(model: &StableModel) -> Result<Self> {
        let d = model.dim();
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDim(d));
        }
        let path = if let Some(p) = model.product_structure() {
            Path::Product {
                m_inv: p.m_inv.clone(),
                abs_det: p.abs_det,
            }
        } else if d == 1 {
            let s = model.sigma_alpha(&[1.0]);
            Path::Product {
                m_inv: vec![vec![1.0 / s]],
                abs_det: s,
            }
        } else if let Some(k) = model.rotational_kappa() {
            Path::Radial {
                scale: k.powf(1.0 / model.alpha()),
            }
        } else {
            Path::Cone
        };
        Ok(Self {
            model: model.clone(),
            path,
        })
    }

    pub fn model(&self) -> &StableModel {
        &self.model
    }

    pub fn is_product(&self) -> bool {
        matches!(self.path, Path::Product { .. })
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.path, Path::Radial { .. })
    }

    /// `p_α(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_and_gradient(x).0
    }

    /// `∇p_α(x)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let al = self.model.alpha();
        match &self.path {
            Path::Product { m_inv, abs_det } => {
                let d = x.len();
                let z: Vec<f64> = m_inv.iter().map(|r| dot(r, x)).collect();
                let pd: Vec<(f64, f64)> = z.iter().map(|&v| density_1d_with_deriv(al, v)).collect();
                let p: f64 = pd.iter().map(|v| v.0).product::<f64>() / abs_det;
                // ∂_z p_Z, then ∇_x = M^{-T} ∇_z
                let gz: Vec<f64> = (0..d)
                    .map(|j| {
                        (0..d)
                            .map(|k| if k == j { pd[k].1 } else { pd[k].0 })
                            .product::<f64>()
                            / abs_det
                    })
                    .collect();
                let g = (0..d)
                    .map(|i| (0..d).map(|j| m_inv[j][i] * gz[j]).sum())
                    .collect();
                (p, g)
            }
            Path::Radial { scale } => {
                let r = norm(x);
                let (p, dp) = radial_density(al, x.len(), r / scale);
                let d = x.len() as f64;
                let pv = p / scale.powf(d);
                let dv = dp / scale.powf(d + 1.0);
                let g = if r == 0.0 {
                    vec![0.0; x.len()]
                } else {
                    x.iter().map(|v| dv * v / r).collect()
                };
                (pv, g)
            }
            Path::Cone => self.cone(x),
        }
    }

    /// Cone-representation evaluation, available for every model with
    /// `d ∈ {2, 3}` (used as an independent path in tests).
    pub fn cone_value(&self, x: &[f64]) -> Result<f64> {
        let d = self.model.dim();
        if !(2..=3).contains(&d) {
            return Err(Error::UnsupportedDim(d));
        }
        Ok(self.cone(x).0)
    }

    fn cone(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = self.model.dim();
        let al = self.model.alpha();
        let c = transform(al, (d - 1) as u32, Trig::Cos);
        let norm_c = (2.0 * PI).powi(d as i32);
        let eval = |rule: &SphereRule| -> (f64, Vec<f64>) {
            let mut p = 0.0;
            let mut g = vec![0.0; d];
            for (t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = self.model.sigma_alpha(t);
                let a = dot(t, x) / s;
                let (v, dv) = c.eval(a);
                let ws = w / s.powi(d as i32);
                p += ws * v;
                for k in 0..d {
                    g[k] += ws * dv * t[k] / s;
                }
            }
            (p / norm_c, g.into_iter().map(|v| v / norm_c).collect())
        };
        // refine the sphere rule until the value settles
        let scale = norm(x) / self.model.nondeg_margin().powf(1.0 / al);
        let mut n = ((8.0 * scale) as usize).clamp(64, 1 << 15);
        if d == 3 {
            n = (n / 8).clamp(24, 128);
        }
        let mut prev = eval(&SphereRule::new(d, n));
        loop {
            let next_n = 2 * n;
            let cur = eval(&SphereRule::new(d, next_n));
            let tol = 1e-10 * prev.0.abs().max(1e-300) + 1e-15;
            let limit = if d == 2 { 1 << 18 } else { 512 };
            if (cur.0 - prev.0).abs() < tol || next_n >= limit {
                return cur;
            }
            prev = cur;
            n = next_n;
        }
    }
}

/// Standard rotation-invariant density (symbol `e^{-‖ξ‖^α}`) as a function
/// of the radius, with its radial derivative.
pub fn radial_density(alpha: f64, d: usize, r: f64) -> (f64, f64) {
    match d {
        1 => {
            let (p, dp) = density_1d_with_deriv(alpha, r);
            (p, dp)
        }
        _ if r > RADIAL_SWITCH && alpha < 2.0 => radial_expansion(alpha, d, r),
        2 => {
            // (2π)^{-2} ∫_0^{2π} C_1(r cos θ) dθ, even in θ ↦ π - θ
            let c = transform(alpha, 1, Trig::Cos);
            let m = ((16.0 * r) as usize).max(256);
            let h = PI / m as f64;
            let mut p = 0.0;
            let mut dp = 0.0;
            for j in 0..m {
                let ct = ((j as f64 + 0.5) * h).cos();
                let (v, dv) = c.eval(r * ct);
                p += v;
                dp += dv * ct;
            }
            let f = 2.0 * h / (2.0 * PI).powi(2);
            (p * f, dp * f)
        }
        3 => {
            // (2π)^{-3} 2π ∫_{-1}^{1} C_2(r z) dz
            let c = transform(alpha, 2, Trig::Cos);
            let width = (0.25f64).min(2.0 / r.max(1e-12));
            let rule = Composite::uniform(0.0, 1.0, width, 16);
            let mut p = 0.0;
            let mut dp = 0.0;
            for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
                let (v, dv) = c.eval(r * z);
                p += w * v;
                dp += w * dv * z;
            }
            let f = 4.0 * PI / (2.0 * PI).powi(3);
            (p * f, dp * f)
        }
        _ => (f64::NAN, f64::NAN),
    }
}

/// Radius beyond which the radial expansion replaces the sphere integral.
const RADIAL_SWITCH: f64 = 40.0;

/// `p(r) ~ Σ_j b_j r^{-d-jα}` for the rotation-invariant standard law.
fn radial_expansion(alpha: f64, d: usize, r: f64) -> (f64, f64) {
    let df = d as f64;
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut fact = 1.0;
    let mut last = f64::INFINITY;
    for j in 1..40 {
        fact *= j as f64;
        let s = j as f64 * alpha;
        // FT of |ξ|^s is 2^{s+d} π^{d/2} Γ((d+s)/2)/Γ(-s/2) |x|^{-d-s}
        let inv_gamma = -(PI * s / 2.0).sin() * gamma(1.0 + s / 2.0) / PI;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let b = sign / fact * 2f64.powf(s + df) * PI.powf(df / 2.0) * gamma((df + s) / 2.0)
            * inv_gamma
            / (2.0 * PI).powf(df);
        let t = b * r.powf(-df - s);
        if t.abs() > last {
            break;
        }
        last = t.abs();
        p += t;
        dp += -(df + s) * t / r;
    }
    (p, dp)
}

/// `k_{α,T}(x) = -α ∫₀^T t^{d-α} ∇p_α(tx) dt`.
pub fn kernel_kt(density: &Density, x: &[f64], t_max: f64) -> Result<Vec<f64>> {
    let d = x.len();
    let al = density.model().alpha();
    if d != density.model().dim() {
        return Err(Error::SizeMismatch { expected: density.model().dim(), got: d });
    }
    if !(t_max > 0.0) {
        return Err(Error::NegativeTime(t_max));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; d]);
    }
    let mut acc = vec![0.0; d];
    t_integral(x, t_max, d as f64 - al + 1.0, |t| {
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        density.gradient(&tx)
    }, &mut acc);
    Ok(acc.into_iter().map(|v| -al * v).collect())
}

/// `k_{α,d}(x)`: `k_{α,T}` with `T = ∞` for the standard product model
/// `σ_α(ξ)^α = Σ_k |ξ_k|^α`.
pub fn kernel_axes(alpha: f64, d: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if x.len() != d {
        return Err(Error::SizeMismatch { expected: d, got: x.len() });
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::OriginSingularity);
    }
    let model = StableModel::product(alpha, &vec![0.5; d])?;
    let dens = Density::new(&model)?;
    let t1 = far_horizon(x);
    let mut k = kernel_kt(&dens, x, t1)?;
    // beyond t1 every non-zero coordinate of tx is in the power-law regime
    let c1 = tail_constant(alpha);
    let p0 = density_1d(alpha, 0.0);
    let df = d as f64;
    for j in 0..d {
        if x[j] == 0.0 {
            continue;
        }
        let mut coef = -(alpha + 1.0) * c1 * x[j].signum() * x[j].abs().powf(-alpha - 2.0);
        let mut pow = df - 2.0 * alpha - 2.0;
        for (k2, &xk) in x.iter().enumerate() {
            if k2 == j {
                continue;
            }
            if xk == 0.0 {
                coef *= p0;
            } else {
                coef *= c1 * xk.abs().powf(-alpha - 1.0);
                pow -= alpha + 1.0;
            }
        }
        k[j] += -alpha * coef * t1.powf(pow + 1.0) / -(pow + 1.0);
    }
    Ok(k)
}

/// `p_{α,1}(y) ~ c |y|^{-1-α}`, `c = Γ(α+1) sin(πα/2)/π`.
fn tail_constant(alpha: f64) -> f64 {
    gamma(alpha + 1.0) * (PI * alpha / 2.0).sin() / PI
}

/// `V_α(x) = α ∫₀^∞ t^{d-α-1} p_α(tx) dt` (`d ≥ 2`).
pub fn potential_kernel(density: &Density, x: &[f64]) -> Result<f64> {
    let d = x.len();
    let al = density.model().alpha();
    if d != density.model().dim() {
        return Err(Error::SizeMismatch { expected: density.model().dim(), got: d });
    }
    if d < 2 {
        return Err(Error::UnsupportedDim(d));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::OriginSingularity);
    }
    let df = d as f64;
    match &density.path {
        Path::Radial { scale } => {
            // V is the Riesz kernel of (κ‖ξ‖^α)^{-1}
            let c = gamma((df - al) / 2.0) / (2f64.powf(al) * PI.powf(df / 2.0) * gamma(al / 2.0));
            Ok(c * norm(x).powf(al - df) / scale.powf(al))
        }
        Path::Product { m_inv, abs_det } => {
            let xn = norm(x);
            let z: Vec<f64> = m_inv
                .iter()
                .map(|r| {
                    let v = dot(r, x);
                    if v.abs() < 1e-13 * xn * norm(r) { 0.0 } else { v }
                })
                .collect();
            let t1 = far_horizon(&z);
            let mut acc = vec![0.0];
            t_integral(x, t1, df - al, |t| {
                let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
                vec![density.value(&tx)]
            }, &mut acc);
            // power-law tail of Π p_1(t z_k)
            let c1 = tail_constant(al);
            let p0 = density_1d(al, 0.0);
            let mut coef = 1.0 / abs_det;
            let mut pow = df - al - 1.0;
            for &zk in &z {
                if zk == 0.0 {
                    coef *= p0;
                } else {
                    coef *= c1 * zk.abs().powf(-al - 1.0);
                    pow -= al + 1.0;
                }
            }
            Ok(al * (acc[0] + coef * t1.powf(pow + 1.0) / -(pow + 1.0)))
        }
        Path::Cone => Err(Error::UnsupportedModel(
            "potential kernel needs a product or rotation-invariant model".into(),
        )),
    }
}

/// A horizon beyond which every non-zero coordinate of `t·x` exceeds `1e5`.
fn far_horizon(x: &[f64]) -> f64 {
    let m = x
        .iter()
        .filter(|v| **v != 0.0)
        .fold(f64::INFINITY, |a, b| a.min(b.abs()));
    1e5 / m
}

/// `∫₀^{t1} t^{e-1} g(t) dt` for vector-valued smooth `g`, with a
/// singularity-removing substitution on the first panel and geometric
/// panels beyond.
fn t_integral(x: &[f64], t1: f64, e: f64, g: impl Fn(f64) -> Vec<f64>, acc: &mut [f64]) {
    let scale = 1.0 / norm(x).max(1e-300);
    let t0 = (1e-3 * scale).min(t1);
    let gl = quad::gauss_legendre(16);
    // [0, t0]: t = t0 v^{1/e}, t^{e-1} dt = t0^e / e dv
    for &(u, w) in &gl {
        let v = 0.5 * (u + 1.0);
        let t = t0 * v.powf(1.0 / e);
        let val = g(t);
        for (a, gv) in acc.iter_mut().zip(val) {
            *a += 0.5 * w * t0.powf(e) / e * gv;
        }
    }
    if t1 > t0 {
        let panels = ((t1 / t0).log2().ceil() as usize * 2).max(1);
        let rule = Composite::geometric(t0, t1, panels, 16);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let val = g(t);
            for (a, gv) in acc.iter_mut().zip(val) {
                *a += w * t.powf(e - 1.0) * gv;
            }
        }
    }
}

/// Scalar moments of a model, keyed as in the JSON record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `E|Y_α|` of the standard one-dimensional law (closed form).
    #[serde(rename = "E_abs_Y")]
    pub e_abs_y: f64,
    /// The same moment by density quadrature.
    #[serde(rename = "E_abs_Y_quadrature")]
    pub e_abs_y_quadrature: f64,
    /// `∫ ‖y‖ μ_α(dy)`.
    pub radial_mean: f64,
    /// `‖p_α‖_∞ = p_α(0)`.
    pub p_sup: f64,
    /// `∫ ‖∇p_α‖`.
    #[serde(rename = "grad_p_L1")]
    pub grad_p_l1: Option<f64>,
    /// `(p, ‖∇p_α/p_α‖_{L^p(μ_α)})` for every requested `p`.
    #[serde(rename = "logderiv_Lp")]
    pub logderiv_lp: Vec<(f64, f64)>,
}

/// Moments of `model`; log-derivative norms for each `p` in `p_list`.
pub fn moments(model: &StableModel, p_list: &[f64]) -> Result<Moments> {
    let dens = Density::new(model)?;
    let al = model.alpha();
    let d = model.dim();
    let zero = vec![0.0; d];
    let grad = if dens.is_product() || dens.is_radial() {
        Some(grad_l1(&dens)?)
    } else {
        None
    };
    let mut logs = Vec::new();
    for &p in p_list {
        if !(p >= 1.0) {
            return Err(Error::BadExponent(format!("log-derivative moment needs p >= 1, got {p}")));
        }
        logs.push((p, logderiv_norm(&dens, p)?));
    }
    Ok(Moments {
        e_abs_y: abs_moment_1d(al, 1.0),
        e_abs_y_quadrature: moment_1d_quadrature(al, 1.0),
        radial_mean: radial_mean(model),
        p_sup: dens.value(&zero),
        grad_p_l1: grad,
        logderiv_lp: logs,
    })
}

/// `∫ ‖y‖ μ_α(dy) = π^{-(d+1)/2} Γ((d+1)/2) Γ(1-1/α) ∫ σ_α dσ_L`.
pub fn radial_mean(model: &StableModel) -> f64 {
    let d = model.dim();
    let df = d as f64;
    let rule = match d {
        1 => SphereRule::new(1, 2),
        2 => SphereRule::new(2, 4096),
        _ => SphereRule::new(3, 96),
    };
    let s = rule.integrate(|t| model.sigma_alpha(t));
    gamma((df + 1.0) / 2.0) * gamma(1.0 - 1.0 / model.alpha()) * s / PI.powf((df + 1.0) / 2.0)
}

/// Composite rule on the real line through `z = sinh(u)`.
fn line_rule(panels_per_side: usize, per_panel: usize, u_max: f64) -> Vec<(f64, f64)> {
    let breaks: Vec<f64> = (0..=2 * panels_per_side)
        .map(|i| -u_max + u_max * i as f64 / panels_per_side as f64)
        .collect();
    let c = Composite::on_breaks(&breaks, per_panel);
    c.nodes
        .iter()
        .zip(&c.weights)
        .map(|(&u, &w)| (u.sinh(), w * u.cosh()))
        .collect()
}

/// Half-line version for radial integrals.
fn half_line_rule(panels: usize, per_panel: usize, u_max: f64) -> Vec<(f64, f64)> {
    let breaks: Vec<f64> = (0..=panels).map(|i| u_max * i as f64 / panels as f64).collect();
    let c = Composite::on_breaks(&breaks, per_panel);
    c.nodes
        .iter()
        .zip(&c.weights)
        .map(|(&u, &w)| (u.sinh(), w * u.cosh()))
        .collect()
}

/// `∫ F(∇p, p) dx` for the product and radial paths, where `F` is
/// evaluated in the coordinates that make the integral tractable.
fn integrate_density_functional(
    dens: &Density,
    f: impl Fn(f64, &[f64]) -> f64 + Sync,
) -> Result<f64> {
    let al = dens.model().alpha();
    let d = dens.model().dim();
    match &dens.path {
        Path::Product { m_inv, abs_det } => {
            // x = M z: dx = |det M| dz, ∇_x p = M^{-T} ∇_z p_Z / |det M|
            let (per_side, per_panel) = match d {
                1 => (48, 12),
                2 => (36, 10),
                _ => (24, 6),
            };
            let rule = line_rule(per_side, per_panel, 22.0);
            let vals: Vec<(f64, f64)> = rule
                .iter()
                .map(|&(z, _)| density_1d_with_deriv(al, z))
                .collect();
            let n = rule.len();
            let total = n.pow(d as u32);
            use rayon::prelude::*;
            let acc: f64 = (0..total)
                .into_par_iter()
                .with_min_len(4096)
                .map(|flat| {
                    let mut idx = [0usize; 3];
                    let mut r = flat;
                    for a in (0..d).rev() {
                        idx[a] = r % n;
                        r /= n;
                    }
                    let mut w = 1.0;
                    let mut pz = 1.0;
                    for a in 0..d {
                        w *= rule[idx[a]].1;
                        pz *= vals[idx[a]].0;
                    }
                    if pz <= 0.0 {
                        return 0.0;
                    }
                    let gz: Vec<f64> = (0..d)
                        .map(|j| {
                            (0..d)
                                .map(|k| if k == j { vals[idx[k]].1 } else { vals[idx[k]].0 })
                                .product::<f64>()
                        })
                        .collect();
                    let gx: Vec<f64> = (0..d)
                        .map(|i| (0..d).map(|j| m_inv[j][i] * gz[j]).sum::<f64>() / abs_det)
                        .collect();
                    w * f(pz / abs_det, &gx) * abs_det
                })
                .sum();
            Ok(acc)
        }
        Path::Radial { scale } => {
            let df = d as f64;
            let area = quad::sphere_area(d);
            let rule = half_line_rule(60, 12, 22.0);
            let mut acc = 0.0;
            for &(r, w) in &rule {
                let (p, dp) = radial_density(al, d, r);
                let pv = p / scale.powf(df);
                let gv = dp / scale.powf(df + 1.0);
                let mut g = vec![0.0; d];
                g[0] = gv;
                // x = scale·r: dx = scale^d r^{d-1} dr dσ
                acc += w * area * r.powf(df - 1.0) * scale.powf(df) * f(pv, &g);
            }
            Ok(acc)
        }
        Path::Cone => Err(Error::UnsupportedModel(
            "moment quadrature needs a product or rotation-invariant model".into(),
        )),
    }
}

/// `∫ ‖∇p_α‖ dx` (Euclidean norm).
pub fn grad_l1(dens: &Density) -> Result<f64> {
    integrate_density_functional(dens, |_, g| norm(g))
}

/// `‖∇p_α/p_α‖_{L^p(μ_α)} = (∫ ‖∇p_α‖^p p_α^{1-p} dx)^{1/p}`.
pub fn logderiv_norm(dens: &Density, p: f64) -> Result<f64> {
    let v = integrate_density_functional(dens, |pv, g| {
        if pv <= 0.0 {
            0.0
        } else {
            norm(g).powf(p) * pv.powf(1.0 - p)
        }
    })?;
    Ok(v.powf(1.0 / p))
}

/// `(x, p_{α,1}(x))` rows for plotting.
pub fn density_table_csv(alpha: f64, xs: &[f64], w: impl std::io::Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "value"])?;
    for &x in xs {
        out.write_record([format!("{x}"), format!("{:e}", density_1d(alpha, x))])?;
    }
    out.flush()?;
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
