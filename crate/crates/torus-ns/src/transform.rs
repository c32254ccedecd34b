//! Forward and inverse Fourier transforms between collocation values and
//! coefficients of `e^{i k·x}`.
//!
//! Normalization: for `f(x) = e^{i k·x}` the stored coefficient at `k` is
//! exactly 1, so multiplier formulas apply verbatim to the stored values.

use crate::field::{RealField, RealVectorField, SpectralField, VectorField};
use crate::grid::TorusGrid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool); // (length, forward)

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// In-place FFT along one axis of a row-major hypercube. Strided axes are
/// handled in tiles of `TILE` lines gathered contiguously, which keeps the
/// inner transforms on cache-resident rows.
fn fft_axis(data: &mut [Complex64], grid: TorusGrid, axis: usize, forward: bool) {
    let m = grid.modes();
    let stride = grid.strides()[axis];
    let fft = plan(m, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    if stride == 1 {
        for line in data.chunks_exact_mut(m) {
            fft.process_with_scratch(line, &mut scratch);
        }
        return;
    }

    const TILE: usize = 16;
    let mut tile = vec![Complex64::default(); TILE * m];
    let block = stride * m;
    let blocks = data.len() / block;
    for b in 0..blocks {
        let base = b * block;
        let mut inner = 0;
        while inner < stride {
            let width = TILE.min(stride - inner);
            // Gather `width` lines: tile row l holds line (inner + l).
            for j in 0..m {
                let src = base + inner + j * stride;
                for l in 0..width {
                    tile[l * m + j] = data[src + l];
                }
            }
            for l in 0..width {
                fft.process_with_scratch(&mut tile[l * m..(l + 1) * m], &mut scratch);
            }
            for j in 0..m {
                let dst = base + inner + j * stride;
                for l in 0..width {
                    data[dst + l] = tile[l * m + j];
                }
            }
            inner += width;
        }
    }
}

pub(crate) fn fft_all_axes(data: &mut [Complex64], grid: TorusGrid, forward: bool) {
    for axis in 0..grid.dim() {
        fft_axis(data, grid, axis, forward);
    }
}

/// Collocation values -> Fourier coefficients.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = f.grid();
    let mut data: Vec<Complex64> =
        f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all_axes(&mut data, grid, true);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    SpectralField::new(grid, data).expect("length preserved")
}

/// Fourier coefficients -> collocation values (real part; the imaginary
/// residue of a conjugate-symmetric field is at roundoff).
pub fn inverse_transform(f: &SpectralField) -> RealField {
    let grid = f.grid();
    let mut data = f.coeffs().to_vec();
    fft_all_axes(&mut data, grid, false);
    let values = data.iter().map(|c| c.re).collect();
    RealField::new(grid, values).expect("length preserved")
}

pub fn forward_transform_vector(f: &RealVectorField) -> VectorField {
    VectorField::new(f.components().iter().map(forward_transform).collect())
        .expect("components share grid")
}

pub fn inverse_transform_vector(f: &VectorField) -> RealVectorField {
    RealVectorField::new(f.components().iter().map(inverse_transform).collect())
        .expect("components share grid")
}

/// `max_x sqrt(Σ_i u_i(x)²)` of a spectral vector field, measured on the
/// collocation points after an inverse transform.
pub fn sup_norm(u: &VectorField) -> f64 {
    inverse_transform_vector(u).sup_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cosine_splits_into_two_half_modes() {
        let g = TorusGrid::new(3, 8).unwrap();
        let f = RealField::from_fn(g, |x| x[0].cos());
        let c = forward_transform(&f);
        assert_abs_diff_eq!(c.coeff_at(&[1, 0, 0]).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.coeff_at(&[-1, 0, 0]).re, 0.5, epsilon = 1e-14);
        assert!(c.coeff_at(&[1, 0, 0]).im.abs() < 1e-14);
        let energy: f64 = c.coeffs().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(energy, 0.5, epsilon = 1e-13);
    }

    #[test]
    fn constant_maps_to_pure_mean_mode() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = RealField::from_fn(g, |_| 1.0);
        let c = forward_transform(&f);
        assert_abs_diff_eq!(c.mean().re, 1.0, epsilon = 1e-14);
        let off_mean: f64 = c.coeffs()[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(off_mean < 1e-14);
    }

    #[test]
    fn unit_exponential_coefficient_is_one() {
        // Normalization contract: f = e^{ik·x} has stored coefficient 1 at k.
        let g = TorusGrid::new(2, 8).unwrap();
        let mut data = vec![Complex64::default(); g.len()];
        let mut idx = [0usize; crate::grid::MAX_DIM];
        for (flat, v) in data.iter_mut().enumerate() {
            g.unravel(flat, &mut idx);
            let phase = 2.0 * g.coordinate(idx[0]) + g.coordinate(idx[1]);
            *v = Complex64::new(phase.cos(), phase.sin());
        }
        fft_all_axes(&mut data, g, true);
        let scale = 1.0 / g.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        let c = SpectralField::new(g, data).unwrap();
        assert_abs_diff_eq!(c.coeff_at(&[2, 1]).re, 1.0, epsilon = 1e-13);
        assert!(c.coeff_at(&[2, 1]).im.abs() < 1e-13);
        assert!(c.coeff_at(&[-2, -1]).norm() < 1e-13);
    }
}
