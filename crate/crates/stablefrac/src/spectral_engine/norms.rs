use super::engine::{apply_indexed, SpectralEngine};
use super::grid::GridField;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Functional norms on grid fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Lp { p: f64 },
    Sup,
    /// `sup_t t·μ{|f| > t}^{1/q}`.
    WeakLq { q: f64 },
    /// `‖f‖_{p*,p}`.
    Lorentz { p_star: f64, p: f64 },
    /// `sup_t t^{-s/α}‖P_t f‖_∞` over a log-spaced time grid, `s < 0`.
    Besov {
        s: f64,
        #[serde(default)]
        t_grid: Option<Vec<f64>>,
    },
    /// `sup_{x,R} R^{β-d} ∫_{B(x,R)} |f|^r`, raised to `1/r`.
    Morrey {
        r: f64,
        beta: f64,
        #[serde(default = "default_radii")]
        radii: usize,
    },
}

fn default_radii() -> usize {
    16
}

/// Default Besov time grid: 40 log-spaced nodes in `[1e-4, 1e2]`.
pub fn default_besov_times() -> Vec<f64> {
    log_space(1e-4, 1e2, 40)
}

pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Evaluate a norm.  Besov norms need the engine of the semigroup.
pub fn functional_norm(
    f: &GridField,
    spec: &NormSpec,
    engine: Option<&SpectralEngine>,
) -> Result<f64> {
    let g = *f.grid();
    let cv = g.cell_volume();
    let v = f.values();
    match spec {
        NormSpec::Lp { p } => {
            if !(*p >= 1.0 && p.is_finite()) {
                return Err(Error::BadSpec(format!("L^p needs p >= 1, got {p}")));
            }
            Ok((v.iter().map(|x| x.abs().powf(*p)).sum::<f64>() * cv).powf(1.0 / p))
        }
        NormSpec::Sup => Ok(f.max_abs()),
        NormSpec::WeakLq { q } => {
            if !(*q > 0.0) {
                return Err(Error::BadSpec(format!("weak L^q needs q > 0, got {q}")));
            }
            let a = sorted_desc(v);
            Ok(a.iter()
                .enumerate()
                .map(|(k, x)| x * ((k + 1) as f64 * cv).powf(1.0 / q))
                .fold(0.0, f64::max))
        }
        NormSpec::Lorentz { p_star, p } => lorentz(v, cv, *p_star, *p),
        NormSpec::Besov { s, t_grid } => {
            if !(*s < 0.0) {
                return Err(Error::BadSpec(format!("Besov index must be negative, got {s}")));
            }
            let eng = engine.ok_or_else(|| Error::BadSpec("Besov norm needs a semigroup".into()))?;
            let al = eng.model().alpha();
            let ts = t_grid.clone().unwrap_or_else(default_besov_times);
            if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::BadSpec("Besov time grid must be non-empty and positive".into()));
            }
            let mut best: f64 = 0.0;
            for t in ts {
                let pt = eng.semigroup(f, t)?;
                best = best.max(t.powf(-s / al) * pt.max_abs());
            }
            Ok(best)
        }
        NormSpec::Morrey { r, beta, radii } => morrey(f, *r, *beta, *radii),
    }
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    a
}

/// `‖f‖^p_{p*,p} = (p*/p) ∫₀^∞ G(t)^{p/p*} dt` with `G` the distribution
/// function of `|f|^p`; on samples `G` is a staircase and the integral is
/// exact.
fn lorentz(v: &[f64], cv: f64, ps: f64, p: f64) -> Result<f64> {
    if !(ps >= 1.0 && p >= 1.0) {
        return Err(Error::BadSpec(format!("Lorentz indices must be >= 1, got ({ps}, {p})")));
    }
    let a: Vec<f64> = sorted_desc(v).into_iter().map(|x| x.powf(p)).collect();
    let e = p / ps;
    let mut acc = 0.0;
    for k in 0..a.len() {
        let next = a.get(k + 1).copied().unwrap_or(0.0);
        acc += (a[k] - next) * ((k + 1) as f64 * cv).powf(e);
    }
    Ok((ps / p * acc).powf(1.0 / p))
}

/// Ball averages through periodic FFT convolution with ball indicators on
/// a log grid of radii from one cell to `L/2`; every grid point is a
/// centre.
fn morrey(f: &GridField, r: f64, beta: f64, radii: usize) -> Result<f64> {
    let g = *f.grid();
    if !(r >= 1.0) || radii == 0 {
        return Err(Error::BadSpec(format!("Morrey needs r >= 1 and radii > 0, got r = {r}")));
    }
    let d = g.dim() as f64;
    let fr = GridField::new(g, f.values().iter().map(|x| x.abs().powf(r)).collect())?;
    let h = g.spacing();
    let mut best: f64 = 0.0;
    for rad in log_space(h, g.half_width() / 2.0, radii) {
        // ball indicator centred at the origin, wrapped to the torus
        let ball = GridField::from_fn(g, |x| {
            let n2: f64 = x.iter().map(|v| v * v).sum();
            if n2 <= rad * rad {
                1.0
            } else {
                0.0
            }
        });
        let bd = ball.dft();
        let cv = g.cell_volume();
        // ball is centred at grid index N/2; undo that offset by a phase
        let conv = apply_indexed(&fr, |i| {
            let ks = g.unravel(i);
            let s: i64 = (0..g.dim()).map(|a| g.freq_index(ks[a])).sum();
            let sign = if s.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            bd[i] * Complex64::new(cv * sign, 0.0)
        })?;
        let m = conv.values().iter().fold(0.0, |a: f64, b| a.max(*b));
        best = best.max(rad.powf(beta - d) * m);
    }
    Ok(best.powf(1.0 / r))
}
