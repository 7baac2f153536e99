use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Periodic box `[-L, L)^d` sampled with `N` points per axis.
///
/// Samples sit at `x_k = -L + k·2L/N`; frequencies are `ξ_m = π m / L`
/// with `m ∈ [-N/2, N/2)`, stored in FFT order (`m = k` for `k < N/2`,
/// `m = k - N` otherwise).  Arrays are row-major with axis 0 slowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        if n < 16 || n % 2 != 0 {
            return Err(Error::BadSpec(format!(
                "points per axis must be even and >= 16, got {n}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::BadSpec(format!("half width must be positive, got {half_width}")));
        }
        Ok(Self { dim, half_width, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2L/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// `(2L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `(2L)^d`.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Largest resolved frequency magnitude per axis, `πN/(2L)`.
    pub fn xi_max(&self) -> f64 {
        PI * self.n as f64 / (2.0 * self.half_width)
    }

    /// Coordinate of sample `k` along an axis.
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    /// Signed frequency index of FFT slot `k`.
    pub fn freq_index(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Frequency `π m / L` of FFT slot `k`.
    pub fn freq(&self, k: usize) -> f64 {
        PI * self.freq_index(k) as f64 / self.half_width
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Flat index of a multi-index.
    pub fn ravel(&self, ks: &[usize]) -> usize {
        ks.iter().take(self.dim).fold(0, |acc, &k| acc * self.n + k)
    }

    /// Sample point of a flat index.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let ks = self.unravel(idx);
        (0..self.dim).map(|a| self.coord(ks[a])).collect()
    }

    /// Frequency vector of a flat index.
    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        let ks = self.unravel(idx);
        (0..self.dim).map(|a| self.freq(ks[a])).collect()
    }

    /// Flat index of the Hermitian partner `-k mod N` (componentwise).
    pub fn partner(&self, idx: usize) -> usize {
        let ks = self.unravel(idx);
        let mut p = [0usize; 3];
        for a in 0..self.dim {
            p[a] = (self.n - ks[a]) % self.n;
        }
        self.ravel(&p[..self.dim])
    }

    /// True when some component sits on the Nyquist slot `N/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let ks = self.unravel(idx);
        (0..self.dim).any(|a| ks[a] == self.n / 2)
    }

    /// All sample points, one `Vec` per point.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// All frequency vectors in FFT order.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.frequency(i)).collect()
    }

    /// Sample a function on the grid.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        (0..self.len())
            .map(|i| {
                let ks = self.unravel(i);
                for a in 0..self.dim {
                    x[a] = self.coord(ks[a]);
                }
                f(&x)
            })
            .collect()
    }
}

/// A real scalar field on a grid, with a lazily computed spectrum.
#[derive(Debug)]
pub struct GridField {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for GridField {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.clone(),
            spectrum: self.spectrum.clone(),
        }
    }
}

impl PartialEq for GridField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            spectrum: OnceLock::new(),
        }
    }

    /// Sample `f` at the grid points.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self {
            grid,
            values: grid.sample(f),
            spectrum: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Mutable access; invalidates the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectrum = OnceLock::new();
        &mut self.values
    }

    /// Raw DFT of the samples (no phase, no cell volume), cached.
    pub fn dft(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut buf: Vec<Complex64> =
                self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            super::fft::fft_nd(&mut buf, &self.grid, false);
            buf
        })
    }

    /// `∫ f dx` by the Riemann sum.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Mean over the box.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `⟨f, g⟩ = ∫ f g dx`.
    pub fn inner(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> GridField {
        GridField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn scale(&self, c: f64) -> GridField {
        self.map(|v| c * v)
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a + b)
    }

    /// Periodic translation by whole grid cells along each axis.
    pub fn roll(&self, shift: &[i64]) -> GridField {
        let g = self.grid;
        let n = g.n() as i64;
        let mut out = vec![0.0; g.len()];
        for (i, v) in self.values.iter().enumerate() {
            let ks = g.unravel(i);
            let mut t = [0usize; 3];
            for a in 0..g.dim() {
                t[a] = (ks[a] as i64 + shift[a]).rem_euclid(n) as usize;
            }
            out[g.ravel(&t[..g.dim()])] = *v;
        }
        GridField {
            grid: g,
            values: out,
            spectrum: OnceLock::new(),
        }
    }
}

/// A `d`-vector field: one scalar field per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<GridField>,
}

impl VectorField {
    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> GridField {
        let g = *self.grid();
        let vals = (0..g.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values()[i] * c.values()[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        GridField::new(g, vals).expect("sizes agree")
    }

    /// Apply a function to the vector at every sample.
    pub fn pointwise(&self, f: impl Fn(&[f64]) -> f64) -> GridField {
        let g = *self.grid();
        let d = self.dim();
        let mut v = vec![0.0; d];
        let vals = (0..g.len())
            .map(|i| {
                for (k, c) in self.components.iter().enumerate() {
                    v[k] = c.values()[i];
                }
                f(&v)
            })
            .collect();
        GridField::new(g, vals).expect("sizes agree")
    }

    /// `Σ_k ⟨u_k, v_k⟩`.
    pub fn inner(&self, other: &VectorField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField {
            components: self.components.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }
}
