//! Quadratic nonlinearities `g(u)` given by a coefficient tensor, with a
//! recomputed bounding constant `C_g` satisfying `|g(u)| ≤ C_g |u|²`.

use crate::error::{Error, Result};
use crate::field::{RealField, VectorField};
use crate::grid::{MultiIndex, MAX_DIM};
use crate::leray::leray_project;
use crate::spectral::{dealias, spectral_derivative};
use crate::transform::{forward_transform, inverse_transform};
use serde::{Deserialize, Serialize};

/// One forcing term `D_i ℙ g(u)` with `g_i(u) = Σ_jl a[i][j][l] u_j u_l`.
///
/// `advected_axis` is the `i` of the derivative prefix; the stored `c_g` is
/// derived from the tensor (Frobenius norms of the symmetrized component
/// matrices), never taken on trust.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GSpec {
    dim: usize,
    advected_axis: usize,
    tensor: Vec<Vec<Vec<f64>>>,
    c_g: f64,
}

impl GSpec {
    pub fn new(dim: usize, advected_axis: usize, tensor: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        if advected_axis >= dim {
            return Err(Error::InvalidParameter(format!(
                "advected axis {advected_axis} out of range for dimension {dim}"
            )));
        }
        let square = tensor.len() == dim
            && tensor
                .iter()
                .all(|m| m.len() == dim && m.iter().all(|row| row.len() == dim));
        if !square {
            return Err(Error::InvalidParameter(
                "coefficient tensor must be dim × dim × dim".into(),
            ));
        }
        let c_g = derived_bound(dim, &tensor);
        Ok(Self { dim, advected_axis, tensor, c_g })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn advected_axis(&self) -> usize {
        self.advected_axis
    }

    /// The bounding constant of `|g(u)| ≤ C_g |u|²`.
    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    /// `g(u)` at one point.
    pub fn evaluate(&self, u: &[f64]) -> [f64; MAX_DIM] {
        let mut g = [0.0; MAX_DIM];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                for l in 0..self.dim {
                    acc += self.tensor[i][j][l] * u[j] * u[l];
                }
            }
            g[i] = acc;
        }
        g
    }

    /// Largest `|g(u)|` over a dense sample of the unit sphere; by
    /// homogeneity this estimates the true operator norm from below, so it
    /// can never exceed a valid `c_g`.
    pub fn sampled_sphere_max(&self, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        let mut eval = |u: &[f64]| {
            let g = self.evaluate(u);
            let norm: f64 = g[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(norm);
        };
        match self.dim {
            2 => {
                for i in 0..samples {
                    let phi = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
                    eval(&[phi.cos(), phi.sin(), 0.0]);
                }
            }
            _ => {
                // Fibonacci sphere.
                let golden = (1.0 + 5f64.sqrt()) / 2.0;
                for i in 0..samples {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / samples as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * i as f64 / golden;
                    eval(&[r * phi.cos(), r * phi.sin(), z]);
                }
            }
        }
        worst
    }

    /// The forcing term `D_i ℙ g(u)` of the abstract system: `g` applied
    /// pointwise in physical space, transformed, dealiased, projected, then
    /// differentiated along the advected axis.
    pub fn forcing_term(&self, u: &VectorField) -> VectorField {
        self.forcing_term_opts(u, true)
    }

    /// [`GSpec::forcing_term`] with the dealias mask optional.
    pub fn forcing_term_opts(&self, u: &VectorField, apply_dealias: bool) -> VectorField {
        let grid = u.grid();
        assert_eq!(grid.dim(), self.dim, "GSpec dimension mismatch");
        let phys: Vec<RealField> = u.components().iter().map(inverse_transform).collect();
        let len = grid.len();
        let mut g_vals: Vec<Vec<f64>> = vec![vec![0.0; len]; self.dim];
        let mut point = [0.0f64; MAX_DIM];
        for p in 0..len {
            for (axis, comp) in phys.iter().enumerate() {
                point[axis] = comp.values()[p];
            }
            let g = self.evaluate(&point);
            for (axis, vals) in g_vals.iter_mut().enumerate() {
                vals[p] = g[axis];
            }
        }
        let spectral = VectorField::new(
            g_vals
                .into_iter()
                .map(|vals| {
                    let f = forward_transform(&RealField::new(grid, vals).expect("length preserved"));
                    if apply_dealias {
                        dealias(&f)
                    } else {
                        f
                    }
                })
                .collect(),
        )
        .expect("components share grid");
        let projected = leray_project(&spectral);
        let di = MultiIndex::unit(self.dim, self.advected_axis);
        projected.map(|c| spectral_derivative(c, &di))
    }

    /// The terms `Σ_i D_i ℙ g^{(i)}(u)` with `g^{(i)}(u)_j = -u_i u_j`,
    /// which reproduce the projected Navier-Stokes advection `-ℙ(u·∇u)`.
    pub fn navier_stokes_encoding(dim: usize) -> Result<Vec<GSpec>> {
        (0..dim)
            .map(|axis| {
                let mut tensor = vec![vec![vec![0.0; dim]; dim]; dim];
                for (j, mat) in tensor.iter_mut().enumerate() {
                    mat[axis][j] = -1.0;
                }
                GSpec::new(dim, axis, tensor)
            })
            .collect()
    }
}

/// `sqrt(Σ_i ‖sym(A_i)‖_F²)`: a valid bound because
/// `|u^T A u| = |u^T sym(A) u| ≤ ‖sym(A)‖_2 |u|² ≤ ‖sym(A)‖_F |u|²`.
fn derived_bound(dim: usize, tensor: &[Vec<Vec<f64>>]) -> f64 {
    let mut total = 0.0;
    for mat in tensor.iter().take(dim) {
        let mut frob = 0.0;
        for j in 0..dim {
            for l in 0..dim {
                let s = 0.5 * (mat[j][l] + mat[l][j]);
                frob += s * s;
            }
        }
        total += frob;
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GSpec::new(3, 3, vec![vec![vec![0.0; 3]; 3]; 3]).is_err());
        assert!(GSpec::new(3, 0, vec![vec![vec![0.0; 3]; 2]; 3]).is_err());
        assert!(GSpec::new(4, 0, vec![vec![vec![0.0; 4]; 4]; 4]).is_err());
    }

    #[test]
    fn bound_dominates_sphere_sample() {
        for spec in GSpec::navier_stokes_encoding(3).unwrap() {
            let sampled = spec.sampled_sphere_max(20_000);
            assert!(
                spec.c_g() >= sampled,
                "derived bound {} below sampled max {}",
                spec.c_g(),
                sampled
            );
            // For g_j = -u_i u_j the true operator norm is 1.
            assert!((sampled - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn evaluate_matches_tensor_contraction() {
        let mut tensor = vec![vec![vec![0.0; 2]; 2]; 2];
        tensor[0][0][1] = 2.0; // g_0 = 2 u_0 u_1
        tensor[1][1][1] = -1.0; // g_1 = -u_1²
        let spec = GSpec::new(2, 1, tensor).unwrap();
        let g = spec.evaluate(&[3.0, 0.5, 0.0]);
        assert_eq!(g[0], 3.0);
        assert_eq!(g[1], -0.25);
        assert!(spec.c_g() >= spec.sampled_sphere_max(4096));
    }
}
