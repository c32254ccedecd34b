//! Spectral differentiation `D^α`, divergence, the two-thirds dealias rule,
//! and the `|𝒟^j u|_∞` measurement over all multiindices of one order.

use crate::field::{RealField, SpectralField, VectorField};
use crate::grid::MultiIndex;
use crate::transform::inverse_transform;
use num_complex::Complex64;

/// Apply the mixed partial `D^α`: each coefficient is multiplied by
/// `(ik)^α = Π_j (i k_j)^{α_j}`.
///
/// The Nyquist mode `k_j = M/2` has no conjugate partner; on any axis where
/// `α_j` is odd its coefficient is zeroed, which keeps derivatives of real
/// fields real.
pub fn spectral_derivative(f: &SpectralField, alpha: &MultiIndex) -> SpectralField {
    let grid = f.grid();
    assert_eq!(alpha.dim(), grid.dim(), "multiindex dimension mismatch");
    let order = alpha.order();
    if order == 0 {
        return f.clone();
    }
    // i^order cycles through 1, i, -1, -i.
    let i_pow = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let nyquist = grid.nyquist();
    let mut out = f.clone();
    let coeffs = out.coeffs_mut();
    grid.for_each_mode(|flat, k| {
        let mut mag = 1.0f64;
        let mut kill = false;
        for axis in 0..grid.dim() {
            let a = alpha.order_on_axis(axis);
            if a == 0 {
                continue;
            }
            if k[axis] == nyquist && a % 2 == 1 {
                kill = true;
                break;
            }
            mag *= (k[axis] as f64).powi(a as i32);
        }
        if kill {
            coeffs[flat] = Complex64::new(0.0, 0.0);
        } else {
            coeffs[flat] *= i_pow * mag;
        }
    });
    out
}

/// `∇·u = Σ_i D_i u_i` in coefficient space.
pub fn divergence(u: &VectorField) -> SpectralField {
    let grid = u.grid();
    let mut out = SpectralField::zeros(grid);
    for axis in 0..grid.dim() {
        let d = spectral_derivative(u.component(axis), &MultiIndex::unit(grid.dim(), axis));
        out.add_assign(&d);
    }
    out
}

/// Two-thirds rule: zero every coefficient with `3 |k_j| > M` on any axis,
/// so quadratic products of retained modes are alias-free.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let m = grid.modes() as i64;
    let mut out = f.clone();
    let coeffs = out.coeffs_mut();
    grid.for_each_mode(|flat, k| {
        for &kj in &k[..grid.dim()] {
            if 3 * kj.abs() > m {
                coeffs[flat] = Complex64::new(0.0, 0.0);
                break;
            }
        }
    });
    out
}

pub fn dealias_vector(u: &VectorField) -> VectorField {
    u.map(dealias)
}

/// Whether the two-thirds mask keeps wavenumber `k_j` on a grid with `m`
/// modes per axis.
pub fn dealias_keeps(m: usize, kj: i64) -> bool {
    3 * kj.abs() <= m as i64
}

/// Physical fields of `D^α u` for one multiindex, all components.
fn derivative_components(u: &VectorField, alpha: &MultiIndex) -> Vec<RealField> {
    u.components()
        .iter()
        .map(|c| inverse_transform(&spectral_derivative(c, alpha)))
        .collect()
}

/// `|𝒟^j u|_∞ = max_{|α| = j} |D^α u|_∞`, the sup over collocation points of
/// the Euclidean norm across components, maximized over all multiindices of
/// total order `j`.
pub fn dj_sup_norm(u: &VectorField, j: u32) -> f64 {
    let grid = u.grid();
    let mut worst = 0.0f64;
    for alpha in MultiIndex::all_of_order(grid.dim(), j) {
        let parts = derivative_components(u, &alpha);
        let len = grid.len();
        let mut local = 0.0f64;
        for p in 0..len {
            let mut s = 0.0;
            for c in &parts {
                let v = c.values()[p];
                s += v * v;
            }
            local = local.max(s);
        }
        worst = worst.max(local.sqrt());
    }
    worst
}

/// `dj_sup_norm` for every order `0..=j_max`, reusing nothing fancier than
/// the per-order loop; index `j` of the result is `|𝒟^j u|_∞`.
pub fn dj_sup_norms(u: &VectorField, j_max: u32) -> Vec<f64> {
    (0..=j_max).map(|j| dj_sup_norm(u, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealField;
    use crate::grid::TorusGrid;
    use crate::transform::{forward_transform, sup_norm};
    use approx::assert_abs_diff_eq;

    fn sine_x1(g: TorusGrid) -> SpectralField {
        forward_transform(&RealField::from_fn(g, |x| x[0].sin()))
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = TorusGrid::new(3, 8).unwrap();
        let d = spectral_derivative(&sine_x1(g), &MultiIndex::new(3, &[1, 0, 0]).unwrap());
        let vals = inverse_transform(&d);
        let expect = RealField::from_fn(g, |x| x[0].cos());
        for (a, b) in vals.values().iter().zip(expect.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = TorusGrid::new(2, 8).unwrap();
        let c = forward_transform(&RealField::from_fn(g, |_| 3.5));
        for alpha in [
            MultiIndex::new(2, &[1, 0]).unwrap(),
            MultiIndex::new(2, &[0, 2]).unwrap(),
            MultiIndex::new(2, &[2, 3]).unwrap(),
        ] {
            assert!(spectral_derivative(&c, &alpha).max_coeff() < 1e-15);
        }
    }

    #[test]
    fn mixed_partial_multiplier_arithmetic() {
        // D_1 D_2 applied to e^{i(2x_1 + x_2)} gives (2i)(i) = -2 times it.
        let g = TorusGrid::new(2, 8).unwrap();
        let f = SpectralField::single_mode(g, &[2, 1], Complex64::new(1.0, 0.0));
        let d = spectral_derivative(&f, &MultiIndex::new(2, &[1, 1]).unwrap());
        let c = d.coeff_at(&[2, 1]);
        assert_abs_diff_eq!(c.re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn nyquist_zeroed_for_odd_orders_only() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = SpectralField::single_mode(g, &[4, 0], Complex64::new(1.0, 0.0));
        let odd = spectral_derivative(&f, &MultiIndex::new(2, &[1, 0]).unwrap());
        assert!(odd.max_coeff() < 1e-15);
        let even = spectral_derivative(&f, &MultiIndex::new(2, &[2, 0]).unwrap());
        assert_abs_diff_eq!(even.coeff_at(&[4, 0]).re, -16.0, epsilon = 1e-13);
    }

    #[test]
    fn divergence_examples() {
        let g = TorusGrid::new(3, 8).unwrap();
        let zero_div = VectorField::new(vec![
            forward_transform(&RealField::from_fn(g, |x| x[1].sin())),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ])
        .unwrap();
        assert!(divergence(&zero_div).max_coeff() < 1e-14);

        let with_div = VectorField::new(vec![
            sine_x1(g),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ])
        .unwrap();
        let d = inverse_transform(&divergence(&with_div));
        let expect = RealField::from_fn(g, |x| x[0].cos());
        for (a, b) in d.values().iter().zip(expect.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn dealias_rule_boundaries() {
        let g = TorusGrid::new(2, 16).unwrap();
        let keep = SpectralField::single_mode(g, &[1, 0], Complex64::new(1.0, 0.0));
        assert_eq!(dealias(&keep), keep);
        // 3 * 5 = 15 <= 16 kept; 3 * 6 = 18 > 16 zeroed; 7 > 16/3 zeroed.
        assert!(dealias_keeps(16, 5));
        assert!(!dealias_keeps(16, 6));
        let drop = SpectralField::single_mode(g, &[7, 0], Complex64::new(1.0, 0.0));
        assert!(dealias(&drop).max_coeff() < 1e-15);
    }

    #[test]
    fn dj_sup_norm_small_cases() {
        let g = TorusGrid::new(3, 8).unwrap();
        let u = VectorField::new(vec![
            sine_x1(g),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ])
        .unwrap();
        // j = 0 is the plain sup-norm.
        assert_abs_diff_eq!(dj_sup_norm(&u, 0), sup_norm(&u), epsilon = 1e-15);
        assert_abs_diff_eq!(dj_sup_norm(&u, 1), 1.0, epsilon = 1e-13);

        let u2 = VectorField::new(vec![
            forward_transform(&RealField::from_fn(g, |x| (2.0 * x[0]).sin())),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ])
        .unwrap();
        assert_abs_diff_eq!(dj_sup_norm(&u2, 2), 4.0, epsilon = 1e-12);
    }
}
