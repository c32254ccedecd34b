//! Riesz transforms, the Leray projector onto divergence-free fields,
//! pressure recovery from the velocity, and the projected advection term in
//! its two algebraically equal forms.

use crate::field::{RealField, SpectralField, VectorField};
use crate::grid::MultiIndex;
use crate::spectral::{dealias, spectral_derivative};
use crate::transform::{forward_transform, inverse_transform};
use num_complex::Complex64;

/// Riesz transform `R_i`: multiplier `i k_i / |k|` for `k ≠ 0`, zero on the
/// mean mode. Modes at the Nyquist index on the transform axis are zeroed
/// (odd symbol, no conjugate partner).
pub fn riesz_transform(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid();
    assert!(axis < grid.dim(), "axis out of range");
    let nyquist = grid.nyquist();
    let mut out = f.clone();
    let coeffs = out.coeffs_mut();
    grid.for_each_mode(|flat, k| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 || k[axis] == nyquist {
            coeffs[flat] = Complex64::new(0.0, 0.0);
        } else {
            coeffs[flat] *= Complex64::new(0.0, k[axis] as f64 / k2.sqrt());
        }
    });
    out
}

/// Leray projection: per-mode multiply by `δ_ij - k_i k_j / |k|²`; the mean
/// mode is untouched (constants are divergence-free and must stay fixed).
pub fn leray_project(u: &VectorField) -> VectorField {
    let grid = u.grid();
    let n = grid.dim();
    let mut out = u.clone();
    grid.for_each_mode(|flat, k| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 {
            return;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for i in 0..n {
            dot += k[i] as f64 * u.component(i).coeffs()[flat];
        }
        dot /= k2;
        for i in 0..n {
            out.component_mut(i).coeffs_mut()[flat] -= k[i] as f64 * dot;
        }
    });
    out
}

/// Gradient of a scalar, `(D_1 p, ..., D_n p)`.
pub fn gradient(p: &SpectralField) -> VectorField {
    let n = p.grid().dim();
    VectorField::new(
        (0..n)
            .map(|axis| spectral_derivative(p, &MultiIndex::unit(n, axis)))
            .collect(),
    )
    .expect("components share grid")
}

/// Dealiased coefficients of the pointwise product of two spectral fields.
fn product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let pa = inverse_transform(a);
    let pb = inverse_transform(b);
    let grid = a.grid();
    let mut vals = pa.into_values();
    for (v, w) in vals.iter_mut().zip(pb.values()) {
        *v *= w;
    }
    dealias(&forward_transform(
        &RealField::new(grid, vals).expect("length preserved"),
    ))
}

/// Physical-space samples of every component and every gradient entry
/// `∂_i u_j`, shared by the nonlinear-term evaluations.
fn physical_with_gradients(u: &VectorField) -> (Vec<RealField>, Vec<Vec<RealField>>) {
    let n = u.dim();
    let phys: Vec<RealField> = u.components().iter().map(inverse_transform).collect();
    let grads: Vec<Vec<RealField>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    inverse_transform(&spectral_derivative(
                        u.component(j),
                        &MultiIndex::unit(n, i),
                    ))
                })
                .collect()
        })
        .collect();
    (phys, grads)
}

/// Pressure from the velocity by the spectral Poisson solve of
/// `Δp = -∇·(u·∇)u`: with dealiased products `w_ij = u_i u_j`,
/// `p̂(k) = -Σ_ij k_i k_j ŵ_ij(k) / |k|²` for `k ≠ 0` and `p̂(0) = 0`.
///
/// A divergence-free `u` is assumed; violations only degrade the physical
/// meaning, not the solve.
pub fn pressure_from_velocity(u: &VectorField) -> SpectralField {
    let grid = u.grid();
    let n = grid.dim();
    let phys: Vec<RealField> = u.components().iter().map(inverse_transform).collect();
    let mut w = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let mut vals = phys[i].values().to_vec();
            for (v, b) in vals.iter_mut().zip(phys[j].values()) {
                *v *= b;
            }
            let what = dealias(&forward_transform(
                &RealField::new(grid, vals).expect("length preserved"),
            ));
            w.push(((i, j), what));
        }
    }
    let mut p = SpectralField::zeros(grid);
    let coeffs = p.coeffs_mut();
    grid.for_each_mode(|flat, k| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 {
            return;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for ((i, j), what) in &w {
            let factor = (k[*i] * k[*j]) as f64 * if i == j { 1.0 } else { 2.0 };
            acc += factor * what.coeffs()[flat];
        }
        coeffs[flat] = -acc / k2;
    });
    p
}

/// Pressure by composing Riesz transforms, `p = Σ_ij R_i R_j (u_i u_j)`,
/// the independent route used to cross-check the Poisson solve.
pub fn pressure_via_riesz(u: &VectorField) -> SpectralField {
    let grid = u.grid();
    let n = grid.dim();
    let mut p = SpectralField::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            let w = product(u.component(i), u.component(j));
            p.add_assign(&riesz_transform(&riesz_transform(&w, j), i));
        }
    }
    p
}

fn maybe_dealias(f: SpectralField, apply: bool) -> SpectralField {
    if apply {
        dealias(&f)
    } else {
        f
    }
}

/// `-ℙ(u·∇u)` in the advective form: products `u_i ∂_i u_j` are formed in
/// physical space, transformed back, dealiased, then projected.
pub fn nonlinear_term(u: &VectorField) -> VectorField {
    nonlinear_term_opts(u, true)
}

/// [`nonlinear_term`] with the dealias mask optional.
pub fn nonlinear_term_opts(u: &VectorField, dealias: bool) -> VectorField {
    let grid = u.grid();
    let n = grid.dim();
    let (phys, grads) = physical_with_gradients(u);
    let mut advected = Vec::with_capacity(n);
    for j in 0..n {
        let mut vals = vec![0.0; grid.len()];
        for i in 0..n {
            for ((v, a), b) in vals.iter_mut().zip(phys[i].values()).zip(grads[j][i].values()) {
                *v += a * b;
            }
        }
        advected.push(maybe_dealias(
            forward_transform(&RealField::new(grid, vals).expect("length preserved")),
            dealias,
        ));
    }
    let mut out = leray_project(&VectorField::new(advected).expect("components share grid"));
    out.scale(-1.0);
    out
}

/// `-Σ_i D_i ℙ(u_i u)`, the divergence form of the same term; equal to
/// [`nonlinear_term`] whenever `∇·u = 0`.
pub fn nonlinear_term_divergence_form(u: &VectorField) -> VectorField {
    nonlinear_term_divergence_form_opts(u, true)
}

/// [`nonlinear_term_divergence_form`] with the dealias mask optional.
pub fn nonlinear_term_divergence_form_opts(u: &VectorField, dealias: bool) -> VectorField {
    let grid = u.grid();
    let n = grid.dim();
    let phys: Vec<RealField> = u.components().iter().map(inverse_transform).collect();
    let mut out = VectorField::zeros(grid);
    for i in 0..n {
        let mut flux = Vec::with_capacity(n);
        for j in 0..n {
            let mut vals = phys[i].values().to_vec();
            for (v, b) in vals.iter_mut().zip(phys[j].values()) {
                *v *= b;
            }
            flux.push(maybe_dealias(
                forward_transform(&RealField::new(grid, vals).expect("length preserved")),
                dealias,
            ));
        }
        let projected = leray_project(&VectorField::new(flux).expect("components share grid"));
        let di = MultiIndex::unit(n, i);
        for j in 0..n {
            let d = spectral_derivative(projected.component(j), &di);
            out.component_mut(j).axpy(-1.0, &d);
        }
    }
    out
}

/// `L²` pairing `⟨u, v⟩ = Σ_k û(k) · conj(v̂(k))` summed over components.
pub fn l2_pairing(u: &VectorField, v: &VectorField) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in u.components().iter().zip(v.components()) {
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            acc += x * y.conj();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::spectral::divergence;
    use crate::transform::sup_norm;
    use approx::assert_abs_diff_eq;

    fn single_sine(g: TorusGrid, axis: usize) -> SpectralField {
        forward_transform(&RealField::from_fn(g, move |x| x[axis].sin()))
    }

    #[test]
    fn riesz_of_sine_by_multiplier_arithmetic() {
        // R_1 has symbol i k_1/|k|, so at k = ±(1,0,0) it multiplies by ±i
        // and sin x_1 maps to cos x_1.
        let g = TorusGrid::new(3, 8).unwrap();
        let r = riesz_transform(&single_sine(g, 0), 0);
        let expect = RealField::from_fn(g, |x| x[0].cos());
        let got = inverse_transform(&r);
        for (a, b) in got.values().iter().zip(expect.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn riesz_annihilates_constants() {
        let g = TorusGrid::new(2, 8).unwrap();
        let c = forward_transform(&RealField::from_fn(g, |_| 2.0));
        assert!(riesz_transform(&c, 1).max_coeff() < 1e-15);
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity_plus_mean() {
        let g = TorusGrid::new(2, 12).unwrap();
        let f = forward_transform(&RealField::from_fn(g, |x| {
            1.7 + (x[0]).sin() + (2.0 * x[1]).cos() + (x[0] + 3.0 * x[1]).sin()
        }));
        let mut sum = SpectralField::zeros(g);
        for i in 0..2 {
            sum.add_assign(&riesz_transform(&riesz_transform(&f, i), i));
        }
        // Expect -f + mean(f), whose own mean coefficient is zero.
        let mut expect = f.clone();
        expect.scale(-1.0);
        expect.coeffs_mut()[0] += Complex64::new(1.7, 0.0);
        assert!(sum.sub(&expect).max_coeff() < 1e-13);
    }

    #[test]
    fn leray_annihilates_gradients_and_fixes_divergence_free() {
        let g = TorusGrid::new(3, 8).unwrap();
        let p = single_sine(g, 0);
        let grad = gradient(&p);
        let projected = leray_project(&grad);
        assert!(sup_norm(&projected) < 1e-13);

        let df = VectorField::new(vec![
            single_sine(g, 1),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ])
        .unwrap();
        let fixed = leray_project(&df);
        assert!(sup_norm(&fixed.sub(&df)) < 1e-13);
    }

    #[test]
    fn leray_idempotent_and_divergence_free_output() {
        let g = TorusGrid::new(2, 8).unwrap();
        let u = VectorField::new(vec![
            forward_transform(&RealField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin())),
            forward_transform(&RealField::from_fn(g, |x| (2.0 * x[0]).cos() * x[1].sin())),
        ])
        .unwrap();
        let once = leray_project(&u);
        let twice = leray_project(&once);
        assert!(sup_norm(&twice.sub(&once)) < 1e-13);
        assert!(divergence(&once).max_coeff() < 1e-13);
    }

    #[test]
    fn taylor_green_pressure_closed_form() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = VectorField::new(vec![
            forward_transform(&RealField::from_fn(g, |x| x[0].cos() * x[1].sin())),
            forward_transform(&RealField::from_fn(g, |x| -(x[0].sin() * x[1].cos()))),
        ])
        .unwrap();
        let p = inverse_transform(&pressure_from_velocity(&u));
        let expect = RealField::from_fn(g, |x| {
            -0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())
        });
        for (a, b) in p.values().iter().zip(expect.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn constant_velocity_has_zero_pressure() {
        let g = TorusGrid::new(2, 8).unwrap();
        let u = VectorField::new(vec![
            forward_transform(&RealField::from_fn(g, |_| 0.7)),
            forward_transform(&RealField::from_fn(g, |_| -0.2)),
        ])
        .unwrap();
        assert!(pressure_from_velocity(&u).max_coeff() < 1e-15);
    }

    #[test]
    fn nonlinear_term_vanishes_on_zero_and_constant_fields() {
        let g = TorusGrid::new(2, 8).unwrap();
        let zero = VectorField::zeros(g);
        assert!(sup_norm(&nonlinear_term(&zero)) < 1e-15);

        let c = VectorField::new(vec![
            forward_transform(&RealField::from_fn(g, |_| 1.3)),
            forward_transform(&RealField::from_fn(g, |_| -0.4)),
        ])
        .unwrap();
        assert!(sup_norm(&nonlinear_term(&c)) < 1e-14);
        assert!(sup_norm(&nonlinear_term_divergence_form(&c)) < 1e-14);
    }
}
