use super::fft::fft_nd;
use super::grid::{Grid, GridField, VectorField};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, Composite};
use crate::stable_model::{SpectralMeasure, StableModel};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Relative imaginary residue tolerated in real-declared outputs.
pub const REAL_TOLERANCE: f64 = 1e-8;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// `spectrum(ξ_m) = cellvol · Σ_k f(x_k) e^{-i⟨x_k, ξ_m⟩}` in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

/// Phase `e^{-i⟨x_0, ξ_m⟩} = (-1)^{Σ m}` linking the raw DFT to the
/// box-centred transform.
fn phase(grid: &Grid, idx: usize) -> f64 {
    let ks = grid.unravel(idx);
    let s: i64 = (0..grid.dim()).map(|a| grid.freq_index(ks[a])).sum();
    if s.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward transform with the box-centred, volume-weighted convention.
pub fn fourier(field: &GridField) -> Spectrum {
    let g = *field.grid();
    let cv = g.cell_volume();
    let data = field
        .dft()
        .iter()
        .enumerate()
        .map(|(i, v)| v * (cv * phase(&g, i)))
        .collect();
    Spectrum { grid: g, data }
}

/// Inverse of [`fourier`], returning the complex samples.
pub fn inverse_fourier_complex(spec: &Spectrum) -> Result<Vec<Complex64>> {
    let g = spec.grid;
    if spec.data.len() != g.len() {
        return Err(Error::SizeMismatch {
            expected: g.len(),
            got: spec.data.len(),
        });
    }
    let cv = g.cell_volume();
    let mut buf: Vec<Complex64> = spec
        .data
        .iter()
        .enumerate()
        .map(|(i, v)| v * (phase(&g, i) / cv))
        .collect();
    fft_nd(&mut buf, &g, true);
    Ok(buf)
}

/// Inverse of [`fourier`] for spectra of real fields.
pub fn inverse_fourier(spec: &Spectrum) -> Result<GridField> {
    let buf = inverse_fourier_complex(spec)?;
    let norm_in: f64 = spec.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    certify_real(spec.grid, buf, norm_in / spec.grid.cell_volume())
}

fn certify_real(grid: Grid, buf: Vec<Complex64>, floor_scale: f64) -> Result<GridField> {
    let re: f64 = buf.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
    let im: f64 = buf.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
    let floor = 1e-12 * floor_scale / (grid.len() as f64).sqrt();
    if im > REAL_TOLERANCE * re + floor {
        return Err(Error::NonHermitianOutput(im / re.max(f64::MIN_POSITIVE)));
    }
    GridField::new(grid, buf.into_iter().map(|v| v.re).collect())
}

/// Replace every Nyquist-plane coefficient by the Hermitian average with
/// its partner.  Off the Nyquist planes a symbol with `s(-ξ) = conj s(ξ)`
/// is untouched; on them `-ξ` is not a grid frequency and the average is
/// the only real-preserving choice.
pub fn hermitian_fix_nyquist(buf: &mut [Complex64], grid: &Grid) {
    for i in 0..buf.len() {
        if !grid.is_nyquist(i) {
            continue;
        }
        let p = grid.partner(i);
        if p < i {
            continue;
        }
        let v = 0.5 * (buf[i] + buf[p].conj());
        buf[i] = v;
        buf[p] = v.conj();
    }
}

/// Multiply the raw DFT of `f` by `symbol` (given per flat frequency
/// index) and return to physical space, certifying a real result.
pub(crate) fn apply_indexed(
    f: &GridField,
    symbol: impl Fn(usize) -> Complex64 + Sync,
) -> Result<GridField> {
    let g = *f.grid();
    let src = f.dft();
    let mut buf: Vec<Complex64> = src
        .par_iter()
        .enumerate()
        .map(|(i, v)| v * symbol(i))
        .collect();
    hermitian_fix_nyquist(&mut buf, &g);
    let scale: f64 = buf.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    fft_nd(&mut buf, &g, true);
    certify_real(g, buf, scale)
}

/// Generic scalar multiplier `symbol(ξ)`.
pub fn apply_multiplier(
    f: &GridField,
    symbol: impl Fn(&[f64]) -> Complex64 + Sync,
) -> Result<GridField> {
    let g = *f.grid();
    apply_indexed(f, |i| symbol(&g.frequency(i)))
}

/// Generic vector multiplier `symbol(ξ) ∈ ℂ^d`.
pub fn apply_vector_multiplier(
    f: &GridField,
    symbol: impl Fn(&[f64]) -> Vec<Complex64> + Sync,
) -> Result<VectorField> {
    let g = *f.grid();
    let table: Vec<Vec<Complex64>> = (0..g.len())
        .into_par_iter()
        .map(|i| symbol(&g.frequency(i)))
        .collect();
    let d = table.first().map_or(0, |v| v.len());
    let components = (0..d)
        .map(|k| apply_indexed(f, |i| table[i][k]))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField { components })
}

/// Classical gradient (symbol `iξ`).
pub fn gradient(f: &GridField) -> Result<VectorField> {
    let g = *f.grid();
    let components = (0..g.dim())
        .map(|a| {
            apply_indexed(f, |i| {
                let ks = g.unravel(i);
                Complex64::new(0.0, g.freq(ks[a]))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField { components })
}

/// Classical divergence of a vector field (symbol `Σ iξ_k`).
pub fn divergence(v: &VectorField) -> Result<GridField> {
    let g = *v.grid();
    sum_components(v, |i, a| Complex64::new(0.0, g.freq(g.unravel(i)[a])))
}

fn sum_components(
    v: &VectorField,
    symbol: impl Fn(usize, usize) -> Complex64 + Sync,
) -> Result<GridField> {
    let g = *v.grid();
    let mut acc = vec![C0; g.len()];
    for (a, c) in v.components.iter().enumerate() {
        for (i, s) in c.dft().iter().enumerate() {
            acc[i] += s * symbol(i, a);
        }
    }
    hermitian_fix_nyquist(&mut acc, &g);
    let scale: f64 = acc.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    fft_nd(&mut acc, &g, true);
    certify_real(g, acc, scale)
}

/// Gaussian heat semigroup `e^{-t‖ξ‖²}` (the `α = 2` endpoint).
pub fn gaussian_semigroup(f: &GridField, t: f64) -> Result<GridField> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let g = *f.grid();
    apply_indexed(f, |i| {
        let xi = g.frequency(i);
        Complex64::new((-t * xi.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })
}

/// Riesz potential `I^s`, symbol `‖ξ‖^{-s}` with the zero mode annihilated.
pub fn riesz_potential(f: &GridField, s: f64) -> Result<GridField> {
    let g = *f.grid();
    if !(s > 0.0 && s < g.dim() as f64) {
        return Err(Error::BadExponent(format!("Riesz potential order {s} outside (0, d)")));
    }
    let l2 = (f.inner(f) / g.box_volume()).sqrt();
    let mean = f.mean();
    if mean.abs() > 1e-8 * l2.max(f64::MIN_POSITIVE) {
        return Err(Error::MeanNotZero(mean));
    }
    apply_indexed(f, |i| {
        let n = norm(&g.frequency(i));
        if n == 0.0 {
            C0
        } else {
            Complex64::new(n.powf(-s), 0.0)
        }
    })
}

/// `(-Δ)^{s/2}`, symbol `‖ξ‖^s`.
pub fn laplacian_power(f: &GridField, s: f64) -> Result<GridField> {
    let g = *f.grid();
    apply_indexed(f, |i| Complex64::new(norm(&g.frequency(i)).powf(s), 0.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Multiplier operators attached to one model on one grid.  Symbol tables
/// (`σ_α^α` and `τ_α`) are evaluated once at construction.
#[derive(Debug, Clone)]
pub struct SpectralEngine {
    model: StableModel,
    grid: Grid,
    sig_pow: Vec<f64>,
    tau: Vec<Vec<f64>>,
}

impl SpectralEngine {
    pub fn new(model: &StableModel, grid: Grid) -> Result<Self> {
        if model.dim() != grid.dim() {
            return Err(Error::SizeMismatch {
                expected: model.dim(),
                got: grid.dim(),
            });
        }
        let rows: Vec<(f64, Vec<f64>)> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let xi = grid.frequency(i);
                (model.sigma_alpha_pow(&xi), model.tau_alpha_im(&xi))
            })
            .collect();
        let d = grid.dim();
        let mut sig_pow = Vec::with_capacity(grid.len());
        let mut tau = vec![Vec::with_capacity(grid.len()); d];
        for (s, t) in rows {
            sig_pow.push(s);
            for k in 0..d {
                tau[k].push(t[k]);
            }
        }
        Ok(Self {
            model: model.clone(),
            grid,
            sig_pow,
            tau,
        })
    }

    pub fn model(&self) -> &StableModel {
        &self.model
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `σ_α(ξ)^α` at every grid frequency (FFT order).
    pub fn sigma_pow_table(&self) -> &[f64] {
        &self.sig_pow
    }

    /// Imaginary parts of `τ_α` at every grid frequency, per component.
    pub fn tau_table(&self) -> &[Vec<f64>] {
        &self.tau
    }

    fn check(&self, f: &GridField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::SizeMismatch {
                expected: self.grid.len(),
                got: f.grid().len(),
            });
        }
        Ok(())
    }

    /// `P_t f`, symbol `e^{-t σ_α(ξ)^α}`.
    pub fn semigroup(&self, f: &GridField, t: f64) -> Result<GridField> {
        self.check(f)?;
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        apply_indexed(f, |i| Complex64::new((-t * self.sig_pow[i]).exp(), 0.0))
    }

    /// `𝒜_α f`, symbol `-σ_α(ξ)^α`.
    pub fn generator(&self, f: &GridField) -> Result<GridField> {
        self.check(f)?;
        apply_indexed(f, |i| Complex64::new(-self.sig_pow[i], 0.0))
    }

    /// `D^{α-1} f`, symbol `τ_α`.
    pub fn frac_gradient(&self, f: &GridField) -> Result<VectorField> {
        self.check(f)?;
        let components = self
            .tau
            .iter()
            .map(|t| apply_indexed(f, |i| Complex64::new(0.0, t[i])))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components })
    }

    /// Fractional divergence `Σ_k D_k^{α-1} v_k`, symbol `Σ_k τ_{α,k} v̂_k`.
    pub fn frac_divergence(&self, v: &VectorField) -> Result<GridField> {
        sum_components(v, |i, a| Complex64::new(0.0, self.tau[a][i]))
    }

    /// `(-𝒜_α)^s`, symbol `σ_α(ξ)^{αs}`, `s > 0`.
    pub fn frac_power(&self, f: &GridField, s: f64) -> Result<GridField> {
        self.check(f)?;
        if !(s > 0.0) {
            return Err(Error::BadExponent(format!("fractional power {s} must be positive")));
        }
        apply_indexed(f, |i| Complex64::new(self.sig_pow[i].powf(s), 0.0))
    }

    /// `(λ - 𝒜_α)^{-s/2}`, symbol `(λ + σ_α(ξ)^α)^{-s/2}`.
    pub fn resolvent_power(&self, f: &GridField, s: f64, lam: f64) -> Result<GridField> {
        self.check(f)?;
        if !(s > 0.0) || !(lam > 0.0) {
            return Err(Error::BadExponent(format!(
                "resolvent power needs s > 0 and λ > 0, got s = {s}, λ = {lam}"
            )));
        }
        apply_indexed(f, |i| Complex64::new((lam + self.sig_pow[i]).powf(-s / 2.0), 0.0))
    }

    /// Gamma-transform quadrature of `(λ - 𝒜_α)^{-s/2} f`:
    /// `Γ(s/2)^{-1} ∫₀^∞ e^{-λt} t^{s/2-1} P_t f dt` on `nodes` log-spaced
    /// points (applied per frequency, so the cost is one transform).
    pub fn resolvent_power_quadrature(
        &self,
        f: &GridField,
        s: f64,
        lam: f64,
        nodes: usize,
    ) -> Result<GridField> {
        self.check(f)?;
        let a = s / 2.0;
        // substitute t = e^u: ∫ e^{-(λ+σ)e^u} e^{a u} du over a wide window
        let (u0, u1) = (-40.0 / a.max(0.05), (60.0 / lam).ln().max(5.0));
        let h = (u1 - u0) / (nodes - 1) as f64;
        let us: Vec<f64> = (0..nodes).map(|k| u0 + k as f64 * h).collect();
        let g = crate::quad::gamma(a);
        apply_indexed(f, |i| {
            let m = lam + self.sig_pow[i];
            // trapezoid on the doubly-exponentially decaying integrand
            let mut acc = 0.0;
            for (k, &u) in us.iter().enumerate() {
                let w = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
                acc += w * (-m * u.exp() + a * u).exp();
            }
            Complex64::new(acc * h / g, 0.0)
        })
    }

    /// Anisotropic Riesz transform `R_σ`, symbol `m_σ(ξ)`.
    pub fn riesz_sigma(&self, f: &GridField) -> Result<VectorField> {
        self.check(f)?;
        let m = &self.model;
        apply_vector_multiplier(f, |xi| m.m_sigma(xi))
    }

    /// Local operator `D_σ`, symbol `iΣξ`.
    pub fn local_d_sigma(&self, f: &GridField) -> Result<VectorField> {
        self.check(f)?;
        let s = self.model.sigma_matrix();
        apply_vector_multiplier(f, |xi| {
            s.apply(xi).into_iter().map(|v| Complex64::new(0.0, v)).collect()
        })
    }

    /// `𝓡_α`, symbol `iα∇σ_α(ξ)` (zero at the origin).
    pub fn riesz_alpha(&self, f: &GridField) -> Result<VectorField> {
        self.check(f)?;
        let g = self.grid;
        let al = self.model.alpha();
        let components = (0..g.dim())
            .map(|k| {
                apply_indexed(f, |i| {
                    let s = self.sig_pow[i];
                    if s == 0.0 {
                        C0
                    } else {
                        Complex64::new(0.0, self.tau[k][i] / s.powf((al - 1.0) / al))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components })
    }

    /// Riesz polypotential `I^{α-1,d}`, symbol `Π_k |ξ_k|^{-(α-1)/d}`, zero
    /// on every hyperplane `ξ_k = 0`.
    pub fn riesz_polypotential(&self, f: &GridField) -> Result<GridField> {
        self.check(f)?;
        let g = self.grid;
        let e = (self.model.alpha() - 1.0) / g.dim() as f64;
        apply_indexed(f, |i| {
            let xi = g.frequency(i);
            if xi.iter().any(|v| *v == 0.0) {
                C0
            } else {
                Complex64::new(xi.iter().map(|v| v.abs().powf(-e)).product(), 0.0)
            }
        })
    }

    /// `t_{α,β}`: symbol `(1+σ_β^β)^{(β-1)/β} / (1+σ_α^α)^{(α-1)/α}` with
    /// `α` from this engine and `β` from `other`.
    pub fn t_alpha_beta(&self, other: &StableModel, f: &GridField) -> Result<GridField> {
        self.check(f)?;
        if other.dim() != self.grid.dim() {
            return Err(Error::SizeMismatch {
                expected: self.grid.dim(),
                got: other.dim(),
            });
        }
        let g = self.grid;
        let (a, b) = (self.model.alpha(), other.alpha());
        apply_indexed(f, |i| {
            let sb = other.sigma_alpha_pow(&g.frequency(i));
            Complex64::new(
                (1.0 + sb).powf((b - 1.0) / b) / (1.0 + self.sig_pow[i]).powf((a - 1.0) / a),
                0.0,
            )
        })
    }

    /// Pointwise `σ_α(∇f)`.
    pub fn sigma_of_gradient(&self, f: &GridField) -> Result<GridField> {
        let grad = gradient(f)?;
        Ok(grad.pointwise(|v| self.model.sigma_alpha(v)))
    }

    /// Gradient length through the carré du champ,
    /// `(∇_{ν_α} f)² = 𝒜_α(f²) - 2 f 𝒜_α f`, for every spherical part.
    /// `f²` must be resolved by the grid (bandwidth below `ξ_max/2`).
    pub fn gradient_length_spectral(&self, f: &GridField) -> Result<GridField> {
        self.check(f)?;
        let sq = f.map(|v| v * v);
        let a_sq = self.generator(&sq)?;
        let af = self.generator(f)?;
        let vals = a_sq
            .values()
            .iter()
            .zip(f.values().iter().zip(af.values()))
            .map(|(a, (v, b))| (a - 2.0 * v * b).max(0.0).sqrt())
            .collect();
        GridField::new(self.grid, vals)
    }

    /// Gradient length `∇_{ν_α} f(x) = (∫ |f(x+u) - f(x)|² ν_α(du))^{1/2}`
    /// for discrete spherical parts, by radial quadrature on translated
    /// copies of `f` (spectral interpolation between samples).
    ///
    /// For atoms whose direction is periodic on the torus (axes and
    /// diagonals) the radial integral is exact over all periods through
    /// the weight `Σ_{j≥0} (s + jP)^{-α-1}`; otherwise it is truncated at
    /// `2L` and the decorrelated tail `(f(x)² - 2f(x)m₁ + m₂) R^{-α}/α` is
    /// added.
    pub fn gradient_length(&self, f: &GridField) -> Result<GridField> {
        self.check(f)?;
        let atoms = match self.model.sigma() {
            SpectralMeasure::Discrete(a) => a.clone(),
            _ => return Err(Error::UnsupportedMeasure),
        };
        let g = self.grid;
        let al = self.model.alpha();
        let l2 = 2.0 * g.half_width();
        let h = g.spacing();
        let bw = effective_bandwidth(f).max(1.0 / l2);
        let fv = f.values();
        let m1 = f.mean();
        let m2 = fv.iter().map(|v| v * v).sum::<f64>() / fv.len() as f64;
        let mut acc = vec![0.0; g.len()];
        let small = gauss_legendre(10);
        for atom in &atoms {
            let y = &atom.direction;
            let period = torus_period(y, l2);
            let reach = period.unwrap_or(l2);
            let s0 = h.min(reach / 4.0);
            // periodic weight correction ω(s) = 1 + s^{α+1} Σ_{j≥1} (s+jP)^{-α-1}
            let omega = |s: f64| -> f64 {
                match period {
                    Some(p) => 1.0 + s.powf(al + 1.0) * periodic_tail(s, p, al),
                    None => 1.0,
                }
            };
            let mut nodes: Vec<(f64, f64)> = Vec::new();
            // (0, s0]: u = (s/s0)^{2-α} removes the s^{1-α} singularity;
            // the integrand there is |Δf|²/s² · s^{1-α} ω
            for &(u, w) in &small {
                let uu = 0.5 * (u + 1.0);
                let s = s0 * uu.powf(1.0 / (2.0 - al));
                let wt = 0.5 * w * s0.powf(2.0 - al) / (2.0 - al) * omega(s) / (s * s);
                nodes.push((s, wt));
            }
            // [s0, reach]: panels resolving the oscillation of f
            let width = (2.0 / bw).min(reach / 8.0);
            let comp = Composite::uniform(s0, reach, width, 8);
            for (&s, &w) in comp.nodes.iter().zip(&comp.weights) {
                nodes.push((s, w * s.powf(-al - 1.0) * omega(s)));
            }
            let contrib: Vec<Vec<f64>> = nodes
                .par_iter()
                .map(|&(s, wt)| {
                    let mut out = vec![0.0; g.len()];
                    for sign in [1.0, -1.0] {
                        let shift: Vec<f64> = y.iter().map(|v| sign * s * v).collect();
                        let moved = translate(f, &shift).expect("real translate");
                        for (o, (a, b)) in out.iter_mut().zip(moved.values().iter().zip(fv)) {
                            *o += wt * (a - b) * (a - b);
                        }
                    }
                    out
                })
                .collect();
            for c in contrib {
                for (a, v) in acc.iter_mut().zip(c) {
                    *a += atom.weight * v;
                }
            }
            if period.is_none() {
                let tail = reach.powf(-al) / al;
                for (a, &v) in acc.iter_mut().zip(fv) {
                    *a += atom.weight * 2.0 * (v * v - 2.0 * v * m1 + m2).max(0.0) * tail;
                }
            }
        }
        GridField::new(g, acc.into_iter().map(|v| v.max(0.0).sqrt()).collect())
    }
}

/// Period along `y` on the torus of side `l2` for axis and diagonal
/// directions (components in `{0, ±c}`).
fn torus_period(y: &[f64], l2: f64) -> Option<f64> {
    let c = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if y.iter().all(|v| v.abs() < 1e-12 || (v.abs() - c).abs() < 1e-12) {
        Some(l2 / c)
    } else {
        None
    }
}

/// `Σ_{j≥1} (s + jP)^{-α-1}` by direct summation plus an Euler–Maclaurin
/// tail.
fn periodic_tail(s: f64, p: f64, al: f64) -> f64 {
    let jmax = 64;
    let mut acc = 0.0;
    for j in 1..=jmax {
        acc += (s + j as f64 * p).powf(-al - 1.0);
    }
    let x = s + (jmax as f64 + 0.5) * p;
    acc + x.powf(-al) / (al * p)
}

/// Frequency magnitude beyond which the spectrum of `f` carries less than
/// `1e-16` of its energy.
fn effective_bandwidth(f: &GridField) -> f64 {
    let g = *f.grid();
    let spec = f.dft();
    let mut pairs: Vec<(f64, f64)> = spec
        .iter()
        .enumerate()
        .map(|(i, v)| (norm(&g.frequency(i)), v.norm_sqr()))
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total == 0.0 {
        return 1.0;
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut tail = 0.0;
    for (k, e) in pairs {
        tail += e;
        if tail > 1e-16 * total {
            return k.max(PI / g.half_width());
        }
    }
    PI / g.half_width()
}

/// `x ↦ f(x + shift)` through the trigonometric interpolant.
pub fn translate(f: &GridField, shift: &[f64]) -> Result<GridField> {
    let g = *f.grid();
    apply_indexed(f, |i| {
        let xi = g.frequency(i);
        let ph: f64 = xi.iter().zip(shift).map(|(a, b)| a * b).sum();
        Complex64::new(ph.cos(), ph.sin())
    })
}
