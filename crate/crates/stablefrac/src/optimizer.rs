//! Rayleigh-quotient minimization for the fractional Sobolev constant
//! `S_{p,α,d} = inf ‖D^{α−1}f‖_p^p / ‖f‖_{p*}^p`.
//!
//! On the torus constants have zero energy, so the flow runs on mean-free
//! fields.  By default the quotient is the grid one and minimizers
//! concentrate at the grid scale; the `dealias` option restricts to a band on
//! which the grid quadrature is exact, which makes every estimate a true
//! upper bound of the continuum torus infimum.  The returned estimate is an upper bound of the grid infimum.

use crate::error::{Error, Result};
use crate::spectral_engine::{apply_indexed, Grid, GridField, SpectralEngine, VectorField};
use crate::stable_model::StableModel;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Critical exponent `p* = pd/(d − p(α−1))`.
pub fn critical_exponent(alpha: f64, d: usize, p: f64) -> Result<f64> {
    let df = d as f64;
    if !(p > 1.0 && p * (alpha - 1.0) < df) {
        return Err(Error::BadExponents(format!(
            "p = {p} must lie in (1, d/(α−1)) = (1, {})",
            df / (alpha - 1.0)
        )));
    }
    Ok(p * df / (df - p * (alpha - 1.0)))
}

fn weighted_lp(f: &GridField, q: f64) -> f64 {
    let cv = f.grid().cell_volume();
    (cv * f.values().iter().map(|v| v.abs().powf(q)).sum::<f64>()).powf(1.0 / q)
}

fn energy(engine: &SpectralEngine, f: &GridField, p: f64) -> Result<(f64, VectorField)> {
    let df = engine.frac_gradient(f)?;
    let mag = df.magnitude();
    let cv = f.grid().cell_volume();
    Ok((cv * mag.values().iter().map(|v| v.powf(p)).sum::<f64>(), df))
}

/// `‖D^{α−1}f‖_p^p / ‖f‖_{p*}^p`.
pub fn rayleigh_quotient(model: &StableModel, grid: &Grid, f: &GridField, p: f64) -> Result<f64> {
    let engine = SpectralEngine::new(model, *grid)?;
    quotient_with(&engine, f, p)
}

fn quotient_with(engine: &SpectralEngine, f: &GridField, p: f64) -> Result<f64> {
    let m = engine.model();
    let q = critical_exponent(m.alpha(), m.dim(), p)?;
    let den = weighted_lp(f, q);
    if !(den > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(energy(engine, f, p)?.0 / den.powf(p))
}

/// `Q(f(·/λ)) / Q(f) − 1` on the grid (zero in the continuum).
pub fn dilation_drift(
    model: &StableModel,
    grid: &Grid,
    profile: impl Fn(&[f64]) -> f64,
    lambda: f64,
    p: f64,
) -> Result<f64> {
    let engine = SpectralEngine::new(model, *grid)?;
    let f = GridField::from_fn(*grid, &profile);
    let fl = GridField::from_fn(*grid, |x| {
        let y: Vec<f64> = x.iter().map(|v| v / lambda).collect();
        profile(&y)
    });
    Ok(quotient_with(&engine, &fl, p)? / quotient_with(&engine, &f, p)? - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOptions {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Stop when `|ΔQ|/Q` of an accepted step falls below this.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Widths of the Gaussian starting bumps, as fractions of `L`.
    #[serde(default = "default_widths")]
    pub start_widths: Vec<f64>,
    #[serde(default = "default_step")]
    pub initial_step: f64,
    /// Restrict to the band `⌈p*⌉·|k| < N` where the grid quadrature of the
    /// quotient is exact; without it only modes the grid cannot see (the
    /// mean and the Nyquist planes) are removed.
    #[serde(default)]
    pub dealias: bool,
}

fn default_max_iter() -> usize {
    10_000
}
fn default_rel_tol() -> f64 {
    1e-8
}
fn default_widths() -> Vec<f64> {
    vec![1.0 / 8.0, 1.0 / 12.0, 1.0 / 5.0]
}
fn default_step() -> f64 {
    1.0
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_iter: default_max_iter(),
            rel_tol: default_rel_tol(),
            start_widths: default_widths(),
            initial_step: default_step(),
            dealias: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
}

/// One accepted descent step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub quotient: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    /// Current field, normalized to `‖f‖_{p*} = 1`.
    pub field: GridField,
    pub trace: Vec<TraceRow>,
    pub step: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct SobolevEstimate {
    /// Best quotient found: an upper bound of the grid infimum.
    pub s_estimate: f64,
    pub p: f64,
    pub p_star: f64,
    pub flow: FlowState,
    /// Width (fraction of `L`) of the start that produced the estimate.
    pub start_width: f64,
    /// Final quotient of every start, in option order.
    pub starts: Vec<(f64, f64)>,
    pub euler_lagrange_residual: f64,
    pub warnings: Vec<String>,
}

impl SobolevEstimate {
    pub fn write_trace_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.flow.trace {
            wr.serialize(row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Minimize the quotient from Gaussian bumps of several widths; the best
/// start wins (ties go to the earliest).
pub fn minimize_sobolev(
    model: &StableModel,
    grid: &Grid,
    p: f64,
    opts: &OptimizerOptions,
) -> Result<SobolevEstimate> {
    let g = *grid;
    let l = g.half_width();
    let starts: Vec<GridField> = opts
        .start_widths
        .iter()
        .map(|w| {
            let s = w * l;
            GridField::from_fn(g, move |x| (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * s * s)).exp())
        })
        .collect();
    minimize_from(model, grid, p, opts, &starts)
}

/// Multistart minimization from explicit initial fields.
pub fn minimize_from(
    model: &StableModel,
    grid: &Grid,
    p: f64,
    opts: &OptimizerOptions,
    starts: &[GridField],
) -> Result<SobolevEstimate> {
    let engine = SpectralEngine::new(model, *grid)?;
    let p_star = critical_exponent(model.alpha(), model.dim(), p)?;
    if starts.is_empty() {
        return Err(Error::BadSpec("at least one start is required".into()));
    }
    let flows: Vec<FlowState> = starts
        .par_iter()
        .map(|f0| descend(&engine, f0, p, p_star, opts))
        .collect::<Result<_>>()?;
    let quotient = |f: &FlowState| f.trace.last().map(|r| r.quotient).unwrap_or(f64::INFINITY);
    let best = (0..flows.len())
        .min_by(|a, b| quotient(&flows[*a]).total_cmp(&quotient(&flows[*b])))
        .unwrap();
    let widths: Vec<f64> = if opts.start_widths.len() == starts.len() {
        opts.start_widths.clone()
    } else {
        (0..starts.len()).map(|i| i as f64).collect()
    };
    let starts_out = widths.iter().zip(&flows).map(|(w, f)| (*w, quotient(f))).collect();
    let flow = flows.into_iter().nth(best).unwrap();
    let residual = euler_lagrange_residual(&engine, &flow.field, p, p_star, opts.dealias)?;
    Ok(SobolevEstimate {
        s_estimate: quotient(&flow),
        p,
        p_star,
        start_width: widths[best],
        starts: starts_out,
        euler_lagrange_residual: residual,
        warnings: if p == 2.0 {
            Vec::new()
        } else {
            vec![format!("p = {p} ≠ 2: non-quadratic energy, the estimate is exploratory")]
        },
        flow,
    })
}

/// Largest admissible frequency index per axis: `K` with `⌈p*⌉·K < N`, so
/// that grid sums of `|f|^{p*}` (for integer `p*`) and `|D^{α−1}f|²` are
/// exact integrals of the trigonometric polynomial `f`.
pub fn band_limit(grid: &Grid, p_star: f64) -> usize {
    let m = p_star.ceil().max(2.0) as usize;
    (grid.n() - 1) / m
}

fn admissible_band(grid: &Grid, p_star: f64, dealias: bool) -> usize {
    if dealias {
        band_limit(grid, p_star)
    } else {
        grid.n() / 2 - 1
    }
}

/// Projection onto admissible fields: no mean (constants have zero energy)
/// and no frequency beyond the band limit `K` (`K = N/2 - 1` drops exactly
/// the Nyquist planes, where the odd gradient symbol vanishes on the grid).
fn project(f: &GridField, k: usize) -> Result<GridField> {
    let g = *f.grid();
    let d = g.dim();
    apply_indexed(f, |i| {
        let ks = g.unravel(i);
        let inside = (0..d).all(|a| g.freq_index(ks[a]).unsigned_abs() as usize <= k);
        if i == 0 || !inside {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Functional derivatives of `N = ‖D^{α−1}f‖_p^p` and `M = ‖f‖_{p*}^p`
/// with respect to the grid `L²` pairing.
fn derivatives(engine: &SpectralEngine, f: &GridField, p: f64, q: f64) -> Result<(f64, GridField, f64, GridField)> {
    // the adjoint of D^{α−1} is minus the fractional divergence; using the
    // engine operators keeps the gradient consistent on Nyquist planes
    let (n, grad) = energy(engine, f, p)?;
    let df = if p == 2.0 {
        engine.frac_divergence(&grad)?.scale(-2.0)
    } else {
        let mag = grad.magnitude();
        let weighted = VectorField {
            components: grad
                .components
                .iter()
                .map(|c| c.zip_map(&mag, |v, m| if m > 0.0 { v * m.powf(p - 2.0) } else { 0.0 }))
                .collect(),
        };
        engine.frac_divergence(&weighted)?.scale(-p)
    };
    let norm = weighted_lp(f, q);
    let m = norm.powf(p);
    let dm = f.map(|v| p * norm.powf(p - q) * v.abs().powf(q - 2.0) * v);
    Ok((n, df, m, dm))
}

/// `(1 + |τ|²)^{-1}`: a positive Fourier-diagonal preconditioner.
fn precondition(engine: &SpectralEngine, g: &GridField) -> Result<GridField> {
    let tau = engine.tau_table();
    apply_indexed(g, |i| Complex64::new(1.0 / (1.0 + tau.iter().map(|t| t[i] * t[i]).sum::<f64>()), 0.0))
}

fn normalize(f: &GridField, q: f64) -> Result<GridField> {
    let n = weighted_lp(f, q);
    if !(n > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(f.scale(1.0 / n))
}

fn descend(engine: &SpectralEngine, f0: &GridField, p: f64, q: f64, opts: &OptimizerOptions) -> Result<FlowState> {
    let k = admissible_band(engine.grid(), q, opts.dealias);
    let mut f = normalize(&project(f0, k)?, q)?;
    let mut qv = quotient_with(engine, &f, p)?;
    let mut step = opts.initial_step;
    let mut trace = vec![TraceRow { iteration: 0, quotient: qv, step: 0.0 }];
    let mut stop = StopReason::MaxIterations;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let (n, dn, m, dm) = derivatives(engine, &f, p, q)?;
        let grad = project(&dn.sub(&dm.scale(n / m)).scale(1.0 / m), k)?;
        let dir = precondition(engine, &grad)?.scale(-1.0);
        let slope = grad.inner(&dir);
        if !(slope < 0.0) {
            stop = StopReason::Converged;
            break;
        }
        let mut accepted = None;
        while step >= 1e-12 {
            let trial = normalize(&f.add(&dir.scale(step)), q)?;
            let qt = quotient_with(engine, &trial, p)?;
            // Armijo condition on the quotient
            if qt < qv && qt <= qv + 1e-4 * step * slope {
                accepted = Some((trial, qt));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, qt)) = accepted else {
            return Err(Error::Stalled);
        };
        let change = (qv - qt) / qv;
        f = trial;
        qv = qt;
        trace.push(TraceRow { iteration: it, quotient: qv, step });
        if change < opts.rel_tol {
            stop = StopReason::Converged;
            break;
        }
        step *= 2.0;
    }
    Ok(FlowState { field: f, trace, step, iterations: it, stop })
}

/// `‖∂N − μ∂M‖₂/‖∂N‖₂` on mean-free fields, `μ` the least-squares
/// multiplier.
pub fn euler_lagrange_residual(engine: &SpectralEngine, f: &GridField, p: f64, q: f64, dealias: bool) -> Result<f64> {
    let (_, dn, _, dm) = derivatives(engine, f, p, q)?;
    let k = admissible_band(engine.grid(), q, dealias);
    let (dn, dm) = (project(&dn, k)?, project(&dm, k)?);
    let mu = dn.inner(&dm) / dm.inner(&dm);
    Ok(dn.sub(&dm.scale(mu)).inner(&dn.sub(&dm.scale(mu))).sqrt() / dn.inner(&dn).sqrt())
}

/// Average of `f` over circles `|x| = r` (linear interpolation of a fine
/// radial profile); requires `d = 2`.
pub fn radial_average(f: &GridField) -> Result<GridField> {
    let g = *f.grid();
    if g.dim() != 2 {
        return Err(Error::UnsupportedDim(g.dim()));
    }
    let dr = g.spacing() / 4.0;
    let pts = g.points();
    let rmax = g.half_width() * 2f64.sqrt();
    let bins = (rmax / dr).ceil() as usize + 2;
    let mut sum = vec![0.0; bins];
    let mut cnt = vec![0.0; bins];
    for (x, v) in pts.iter().zip(f.values()) {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt() / dr;
        let k = r.floor() as usize;
        let w = r - k as f64;
        sum[k] += (1.0 - w) * v;
        cnt[k] += 1.0 - w;
        sum[k + 1] += w * v;
        cnt[k + 1] += w;
    }
    let prof: Vec<f64> = sum.iter().zip(&cnt).map(|(s, c)| if *c > 0.0 { s / c } else { 0.0 }).collect();
    let vals = pts
        .iter()
        .map(|x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt() / dr;
            let k = r.floor() as usize;
            let w = r - k as f64;
            (1.0 - w) * prof[k] + w * prof[k + 1]
        })
        .collect();
    GridField::new(g, vals)
}
