//! Quadrature helpers shared by the density, geometry and model code.
//!
//! Everything here is a thin layer over Gauss–Legendre rules (from the
//! `gauss-quad` crate) plus the sphere rules used for spectral measures.

use gauss_quad::GaussLegendre;
use std::f64::consts::PI;

/// Gauss–Legendre nodes/weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(n.max(2))
        .expect("degree >= 2")
        .as_node_weight_pairs()
        .to_vec()
}

/// A composite Gauss–Legendre rule on a list of panel breakpoints.
#[derive(Debug, Clone)]
pub struct Composite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Composite {
    /// Composite rule with `per_panel` nodes on each `[b_i, b_{i+1}]`.
    pub fn on_breaks(breaks: &[f64], per_panel: usize) -> Self {
        let gl = gauss_legendre(per_panel);
        let mut nodes = Vec::with_capacity(breaks.len() * per_panel);
        let mut weights = Vec::with_capacity(breaks.len() * per_panel);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for &(x, wt) in &gl {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Self { nodes, weights }
    }

    /// Uniform panels of width at most `max_width` on `[a, b]`.
    pub fn uniform(a: f64, b: f64, max_width: f64, per_panel: usize) -> Self {
        let panels = (((b - a) / max_width).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Self::on_breaks(&breaks, per_panel)
    }

    /// Geometrically graded panels on `[a, b]`, `0 < a < b`.
    pub fn geometric(a: f64, b: f64, panels: usize, per_panel: usize) -> Self {
        let r = (b / a).ln() / panels as f64;
        let breaks: Vec<f64> = (0..=panels).map(|i| a * (r * i as f64).exp()).collect();
        Self::on_breaks(&breaks, per_panel)
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Quadrature rule on the unit sphere `S^{d-1}` with respect to the surface
/// measure `σ_L`.  Rules are symmetric: node `j` and node `antipode[j]` are
/// opposite points carrying equal weight.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `S^0 = {±1}` with counting measure, the circle with `n` equispaced
    /// nodes (n rounded up to even), or the 2-sphere with a Gauss–Legendre
    /// rule in `cos θ` times a trapezoid rule in `φ` (`n` latitude nodes).
    pub fn new(dim: usize, n: usize) -> Self {
        match dim {
            1 => Self {
                dim,
                nodes: vec![vec![1.0], vec![-1.0]],
                weights: vec![1.0, 1.0],
            },
            2 => {
                let m = (n.max(4) + 1) / 2 * 2;
                let h = 2.0 * PI / m as f64;
                let nodes = (0..m)
                    .map(|j| {
                        let t = (j as f64 + 0.5) * h;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                Self {
                    dim,
                    nodes,
                    weights: vec![h; m],
                }
            }
            3 => {
                let nz = n.max(4);
                let nphi = 2 * nz;
                let gl = gauss_legendre(nz);
                let hphi = 2.0 * PI / nphi as f64;
                let mut nodes = Vec::with_capacity(nz * nphi);
                let mut weights = Vec::with_capacity(nz * nphi);
                for &(z, wz) in &gl {
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    for k in 0..nphi {
                        let p = (k as f64 + 0.5) * hphi;
                        nodes.push(vec![s * p.cos(), s * p.sin(), z]);
                        weights.push(wz * hphi);
                    }
                }
                Self { dim, nodes, weights }
            }
            _ => panic!("sphere rules exist only for d <= 3"),
        }
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }
}

/// Surface area of `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Volume of the Euclidean unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma(1.0 + d as f64 / 2.0)
}

/// `∫_{S^{d-1}} |θ_1|^p σ_L(dθ)`.
pub fn abs_moment_sphere(d: usize, p: f64) -> f64 {
    2.0 * PI.powf((d as f64 - 1.0) / 2.0) * gamma((p + 1.0) / 2.0) / gamma((d as f64 + p) / 2.0)
}

/// Volume of the unit ball of `ℓ_q^d`.
pub fn lq_ball_volume(d: usize, q: f64) -> f64 {
    if q.is_infinite() {
        return 2f64.powi(d as i32);
    }
    (2.0 * gamma(1.0 + 1.0 / q)).powi(d as i32) / gamma(1.0 + d as f64 / q)
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximize `f` over the unit sphere of `R^d` (`d <= 3`) by dense sampling
/// followed by local golden-section refinement in angular coordinates.
/// Returns the maximizing direction and the maximum.
pub fn sphere_max(d: usize, samples: usize, mut f: impl FnMut(&[f64]) -> f64) -> (Vec<f64>, f64) {
    match d {
        1 => {
            let a = f(&[1.0]);
            let b = f(&[-1.0]);
            if a >= b {
                (vec![1.0], a)
            } else {
                (vec![-1.0], b)
            }
        }
        2 => {
            // search the full circle: f need not be even
            let m = samples.max(16);
            let h = 2.0 * PI / m as f64;
            let mut best = (0.0, f64::NEG_INFINITY);
            for j in 0..m {
                let t = j as f64 * h;
                let v = f(&[t.cos(), t.sin()]);
                if v > best.1 {
                    best = (t, v);
                }
            }
            let (t, v) = golden_max(|t| f(&[t.cos(), t.sin()]), best.0 - h, best.0 + h, 60);
            if v >= best.1 {
                (vec![t.cos(), t.sin()], v)
            } else {
                (vec![best.0.cos(), best.0.sin()], best.1)
            }
        }
        3 => {
            let pt = |th: f64, ph: f64| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let m = samples.max(64);
            let golden = PI * (3.0 - 5f64.sqrt());
            let mut best = ((0.0, 0.0), f64::NEG_INFINITY);
            for j in 0..m {
                let z = 1.0 - 2.0 * (j as f64 + 0.5) / m as f64;
                let th = z.acos();
                let ph = golden * j as f64;
                let v = f(&pt(th, ph));
                if v > best.1 {
                    best = ((th, ph), v);
                }
            }
            // alternating golden refinement in (θ, φ)
            let (mut th, mut ph) = best.0;
            let mut v = best.1;
            let mut w = 2.0 * (4.0 * PI / m as f64).sqrt();
            for _ in 0..40 {
                let (t1, v1) = golden_max(|t| f(&pt(t, ph)), th - w, th + w, 40);
                if v1 >= v {
                    th = t1;
                    v = v1;
                }
                let sw = w / th.sin().abs().max(1e-3);
                let (p1, v2) = golden_max(|p| f(&pt(th, p)), ph - sw.min(PI), ph + sw.min(PI), 40);
                if v2 >= v {
                    ph = p1;
                    v = v2;
                }
                w *= 0.5;
                if w < 1e-9 {
                    break;
                }
            }
            (pt(th, ph).to_vec(), v)
        }
        _ => panic!("sphere search supports d <= 3"),
    }
}

/// Cubic Hermite interpolation table on a uniform grid.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    pub x0: f64,
    pub h: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

impl HermiteTable {
    pub fn new(x0: f64, h: f64, y: Vec<f64>, dy: Vec<f64>) -> Self {
        assert_eq!(y.len(), dy.len());
        Self { x0, h, y, dy }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    /// Value and derivative at `x` inside the table range.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let s = (x - self.x0) / self.h;
        let i = (s.floor() as isize).clamp(0, self.y.len() as isize - 2) as usize;
        let t = s - i as f64;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.dy[i] * self.h, self.dy[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let dv = (dh00 * y0 + dh10 * m0 + dh01 * y1 + dh11 * m1) / self.h;
        (v, dv)
    }
}
