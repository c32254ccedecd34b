//! Construction of divergence-free, band-limited initial velocity fields
//! with a prescribed sup-norm amplitude.

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField, VectorField};
use crate::grid::{TorusGrid, MAX_DIM};
use crate::leray::leray_project;
use crate::transform::{forward_transform, sup_norm};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Named initial-field families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialFieldSpec {
    /// The Taylor-Green vortex, scaled to the requested `|f|_∞`.
    TaylorGreen { amplitude: f64 },
    /// Seeded random coefficients on `0 < |k|_∞ ≤ max_wavenumber`,
    /// Leray-projected and rescaled to the requested `|f|_∞`.
    RandomBandlimited {
        seed: u64,
        max_wavenumber: u32,
        amplitude: f64,
    },
}

impl InitialFieldSpec {
    pub fn amplitude(&self) -> f64 {
        match self {
            Self::TaylorGreen { amplitude } => *amplitude,
            Self::RandomBandlimited { amplitude, .. } => *amplitude,
        }
    }
}

/// Build the requested field on `grid`: divergence-free, band-limited, real,
/// with measured sup-norm equal to the requested amplitude.
pub fn make_initial_field(grid: TorusGrid, spec: &InitialFieldSpec) -> Result<VectorField> {
    if !(spec.amplitude() > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial field amplitude must be positive, got {}",
            spec.amplitude()
        )));
    }
    let mut f = match spec {
        InitialFieldSpec::TaylorGreen { .. } => taylor_green(grid),
        InitialFieldSpec::RandomBandlimited { seed, max_wavenumber, .. } => {
            if *max_wavenumber < 1 || *max_wavenumber as usize >= grid.modes() / 2 {
                return Err(Error::InvalidParameter(format!(
                    "max_wavenumber must lie in [1, M/2), got {max_wavenumber}"
                )));
            }
            random_bandlimited(grid, *seed, *max_wavenumber)
        }
    };
    let sup = sup_norm(&f);
    if sup == 0.0 {
        return Err(Error::InvalidParameter(
            "initial field is identically zero; cannot rescale".into(),
        ));
    }
    f.scale(spec.amplitude() / sup);
    Ok(f)
}

/// Taylor-Green vortex: 2-D `(cos x_1 sin x_2, -sin x_1 cos x_2)`, 3-D
/// `(cos x_1 sin x_2 sin x_3, -sin x_1 cos x_2 sin x_3, 0)`. Both are
/// divergence-free trigonometric polynomials with unit sup-norm.
pub fn taylor_green(grid: TorusGrid) -> VectorField {
    let components: Vec<SpectralField> = match grid.dim() {
        2 => vec![
            forward_transform(&RealField::from_fn(grid, |x| x[0].cos() * x[1].sin())),
            forward_transform(&RealField::from_fn(grid, |x| -(x[0].sin() * x[1].cos()))),
        ],
        _ => vec![
            forward_transform(&RealField::from_fn(grid, |x| {
                x[0].cos() * x[1].sin() * x[2].sin()
            })),
            forward_transform(&RealField::from_fn(grid, |x| {
                -(x[0].sin() * x[1].cos() * x[2].sin())
            })),
            SpectralField::zeros(grid),
        ],
    };
    VectorField::new(components).expect("components share grid")
}

/// Random conjugate-symmetric coefficients on the band, then projection.
fn random_bandlimited(grid: TorusGrid, seed: u64, kmax: u32) -> VectorField {
    leray_project(&random_bandlimited_unprojected(grid, seed, kmax))
}

/// Seeded random band-limited real vector field without projection or
/// rescaling; general (not divergence-free) trial data for the estimate
/// measurements.
pub fn random_bandlimited_unprojected(grid: TorusGrid, seed: u64, kmax: u32) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let kmax = kmax as i64;
    let strides = grid.strides();

    let mut components = Vec::with_capacity(n);
    for _ in 0..n {
        let mut c = SpectralField::zeros(grid);
        // Iterate the band in a fixed order; fill each conjugate pair from
        // its canonical representative (first nonzero entry positive).
        let mut k = [0i64; MAX_DIM];
        fill_band(&mut rng, &mut c, grid, &strides, &mut k, 0, kmax);
        components.push(c);
    }
    VectorField::new(components).expect("components share grid")
}

fn fill_band(
    rng: &mut ChaCha8Rng,
    c: &mut SpectralField,
    grid: TorusGrid,
    strides: &[usize; MAX_DIM],
    k: &mut [i64; MAX_DIM],
    axis: usize,
    kmax: i64,
) {
    if axis == grid.dim() {
        if k[..grid.dim()].iter().all(|&kj| kj == 0) {
            return;
        }
        let first = k[..grid.dim()].iter().find(|&&kj| kj != 0).copied().unwrap();
        if first < 0 {
            return; // handled by the canonical partner
        }
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        let mut flat = 0usize;
        let mut mirror = 0usize;
        for a in 0..grid.dim() {
            flat += grid.index_of_wavenumber(k[a]) * strides[a];
            mirror += grid.index_of_wavenumber(-k[a]) * strides[a];
        }
        c.coeffs_mut()[flat] = Complex64::new(re, im);
        c.coeffs_mut()[mirror] = Complex64::new(re, -im);
        return;
    }
    for kj in -kmax..=kmax {
        k[axis] = kj;
        fill_band(rng, c, grid, strides, k, axis + 1, kmax);
    }
    k[axis] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::divergence;
    use crate::transform::inverse_transform;
    use approx::assert_abs_diff_eq;

    #[test]
    fn taylor_green_3d_is_divergence_free_with_requested_sup() {
        let g = TorusGrid::new(3, 16).unwrap();
        let f = make_initial_field(g, &InitialFieldSpec::TaylorGreen { amplitude: 2.5 }).unwrap();
        assert!(divergence(&f).max_coeff() < 1e-13);
        assert_abs_diff_eq!(sup_norm(&f), 2.5, epsilon = 1e-12);
        assert!(f.conjugate_symmetry_error() < 1e-14);
    }

    #[test]
    fn random_field_divergence_free_unit_sup_real() {
        let g = TorusGrid::new(3, 16).unwrap();
        let spec = InitialFieldSpec::RandomBandlimited {
            seed: 1,
            max_wavenumber: 4,
            amplitude: 1.0,
        };
        let f = make_initial_field(g, &spec).unwrap();
        let div = inverse_transform(&divergence(&f));
        assert!(div.sup() < 1e-12);
        assert_abs_diff_eq!(sup_norm(&f), 1.0, epsilon = 1e-9);
        assert!(f.conjugate_symmetry_error() < 1e-14);
    }

    #[test]
    fn same_seed_reproduces_field_exactly() {
        let g = TorusGrid::new(2, 12).unwrap();
        let spec = InitialFieldSpec::RandomBandlimited {
            seed: 42,
            max_wavenumber: 3,
            amplitude: 0.7,
        };
        let a = make_initial_field(g, &spec).unwrap();
        let b = make_initial_field(g, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let g = TorusGrid::new(2, 8).unwrap();
        assert!(make_initial_field(g, &InitialFieldSpec::TaylorGreen { amplitude: 0.0 }).is_err());
        assert!(make_initial_field(
            g,
            &InitialFieldSpec::RandomBandlimited { seed: 1, max_wavenumber: 4, amplitude: 1.0 }
        )
        .is_err());
        assert!(make_initial_field(
            g,
            &InitialFieldSpec::RandomBandlimited { seed: 1, max_wavenumber: 0, amplitude: 1.0 }
        )
        .is_err());
    }
}
