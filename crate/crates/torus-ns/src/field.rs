//! Scalar and vector fields on a [`TorusGrid`], in collocation values or
//! Fourier coefficients, plus the sup-norm measurements used everywhere.

use crate::error::{Error, Result};
use crate::grid::{TorusGrid, MAX_DIM};
use num_complex::Complex64;

/// Scalar field sampled at the collocation points (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Sample a function of the collocation coordinates.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        let mut idx = [0usize; MAX_DIM];
        let mut x = [0.0f64; MAX_DIM];
        for (flat, v) in values.iter_mut().enumerate() {
            grid.unravel(flat, &mut idx);
            for axis in 0..grid.dim() {
                x[axis] = grid.coordinate(idx[axis]);
            }
            *v = f(&x[..grid.dim()]);
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Max of |f| over the collocation points.
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Scalar field as Fourier coefficients: the stored value at lattice point
/// `k` is the coefficient of `e^{i k·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Field with a single unit coefficient at wavenumber `k`.
    pub fn single_mode(grid: TorusGrid, k: &[i64], amplitude: Complex64) -> Self {
        assert_eq!(k.len(), grid.dim());
        let strides = grid.strides();
        let mut flat = 0usize;
        for (axis, &kj) in k.iter().enumerate() {
            flat += grid.index_of_wavenumber(kj) * strides[axis];
        }
        let mut f = Self::zeros(grid);
        f.coeffs[flat] = amplitude;
        f
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at wavenumber vector `k`.
    pub fn coeff_at(&self, k: &[i64]) -> Complex64 {
        assert_eq!(k.len(), self.grid.dim());
        let strides = self.grid.strides();
        let mut flat = 0usize;
        for (axis, &kj) in k.iter().enumerate() {
            flat += self.grid.index_of_wavenumber(kj) * strides[axis];
        }
        self.coeffs[flat]
    }

    /// Mean value over the torus (the `k = 0` coefficient).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Largest violation of `c(-k) = conj(c(k))`; zero for fields that
    /// represent real functions. The Nyquist index maps to itself.
    pub fn conjugate_symmetry_error(&self) -> f64 {
        let g = self.grid;
        let m = g.modes();
        let strides = g.strides();
        let mut worst = 0.0f64;
        let mut idx = [0usize; MAX_DIM];
        for flat in 0..self.coeffs.len() {
            g.unravel(flat, &mut idx);
            let mut mirror = 0usize;
            for axis in 0..g.dim() {
                let mi = if idx[axis] == 0 { 0 } else { m - idx[axis] };
                mirror += mi * strides[axis];
            }
            let d = (self.coeffs[mirror] - self.coeffs[flat].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Max coefficient magnitude (an l^∞ bound in coefficient space).
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn add_assign(&mut self, other: &SpectralField) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, other.grid);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

/// Vector field with `n = dim` spectral components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::GridMismatch("vector field has no components".into()));
        }
        let grid = components[0].grid();
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.grid() != grid) {
            return Err(Error::GridMismatch("components on different grids".into()));
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut SpectralField {
        &mut self.components[i]
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> VectorField {
        VectorField { components: self.components.iter().map(f).collect() }
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.components {
            c.scale(s);
        }
    }

    pub fn add_assign(&mut self, other: &VectorField) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add_assign(b);
        }
    }

    pub fn axpy(&mut self, s: f64, other: &VectorField) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(s, b);
        }
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

    /// Spectral energy `½ Σ_k |û(k)|²` summed over components.
    pub fn spectral_energy(&self) -> f64 {
        0.5 * self
            .components
            .iter()
            .map(|c| c.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
    }

    pub fn conjugate_symmetry_error(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.conjugate_symmetry_error())
            .fold(0.0, f64::max)
    }
}

/// Vector field sampled on collocation points.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVectorField {
    components: Vec<RealField>,
}

impl RealVectorField {
    pub fn new(components: Vec<RealField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::GridMismatch("vector field has no components".into()));
        }
        let grid = components[0].grid();
        if components.len() != grid.dim() || components.iter().any(|c| c.grid() != grid) {
            return Err(Error::GridMismatch("components disagree with grid".into()));
        }
        Ok(Self { components })
    }

    pub fn grid(&self) -> TorusGrid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &RealField {
        &self.components[i]
    }

    pub fn components(&self) -> &[RealField] {
        &self.components
    }

    /// `max_x sqrt(Σ_i f_i(x)²)` over the collocation points.
    pub fn sup_norm(&self) -> f64 {
        let n = self.components.len();
        let len = self.components[0].values().len();
        let mut worst = 0.0f64;
        for p in 0..len {
            let mut s = 0.0;
            for c in &self.components[..n] {
                let v = c.values()[p];
                s += v * v;
            }
            worst = worst.max(s);
        }
        worst.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    #[test]
    fn value_count_enforced() {
        let g = TorusGrid::new(2, 8).unwrap();
        assert!(RealField::new(g, vec![0.0; 63]).is_err());
        assert!(RealField::new(g, vec![0.0; 64]).is_ok());
        assert!(SpectralField::new(g, vec![Complex64::default(); 65]).is_err());
    }

    #[test]
    fn vector_components_share_grid() {
        let g = TorusGrid::new(2, 8).unwrap();
        let h = TorusGrid::new(2, 10).unwrap();
        let a = SpectralField::zeros(g);
        let b = SpectralField::zeros(h);
        assert!(VectorField::new(vec![a.clone(), b]).is_err());
        assert!(VectorField::new(vec![a.clone()]).is_err());
        assert!(VectorField::new(vec![a.clone(), a]).is_ok());
    }

    #[test]
    fn sup_of_single_sine_is_one() {
        // M divisible by 4 puts x = π/2 on the grid.
        let g = TorusGrid::new(3, 8).unwrap();
        let f = RealField::from_fn(g, |x| x[0].sin());
        let v = RealVectorField::new(vec![
            f,
            RealField::zeros(g),
            RealField::zeros(g),
        ])
        .unwrap();
        assert!((v.sup_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sup_of_zero_field_is_zero() {
        let g = TorusGrid::new(2, 8).unwrap();
        let v = RealVectorField::new(vec![RealField::zeros(g), RealField::zeros(g)]).unwrap();
        assert_eq!(v.sup_norm(), 0.0);
    }

    #[test]
    fn conjugate_symmetry_error_detects_asymmetry() {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut f = SpectralField::single_mode(g, &[1, 0], Complex64::new(0.5, 0.25));
        // Partner is missing entirely.
        assert!(f.conjugate_symmetry_error() > 0.5);
        let flat = g.index_of_wavenumber(-1) * g.strides()[0];
        f.coeffs_mut()[flat] = Complex64::new(0.5, -0.25);
        assert!(f.conjugate_symmetry_error() < 1e-16);
    }
}
