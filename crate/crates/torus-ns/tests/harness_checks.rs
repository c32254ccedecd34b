//! Harness-level checks: the V(t) window bound, exact scale covariance of
//! the measurements, stability of the future-control ratio, and the forced
//! response sweep.

use torus_ns::estimates::{
    c0_from_forced_constant, compute_v, future_control_check, geometric_grid,
    measure_semigroup_constants, scaling_check, single_sine_mode, verify_corollary_22,
};
use torus_ns::grid::TorusGrid;
use torus_ns::initial::{make_initial_field, taylor_green, InitialFieldSpec};
use torus_ns::solver::{simulate, SolverConfig};

#[test]
fn forced_ratio_bounded_over_trial_sweep() {
    let grid = TorusGrid::new(2, 16).unwrap();
    let t_grid = geometric_grid(1e-3, 3.0, 10);
    let fr = verify_corollary_22(grid, 10, &t_grid, 77, 3).unwrap();
    assert!(fr.c.is_finite() && fr.c > 0.0);
    for curve in &fr.curves {
        assert!(curve.iter().all(|r| r.is_finite()));
    }
    // Every per-trial max is within the global C by construction.
    assert!(fr.per_trial_max.iter().all(|&m| m <= fr.c + 1e-15));
}

#[test]
fn v_stays_below_window_bound() {
    // V(t) < 2C|f|_∞ on t < c0/|f|² with the measured forced constant.
    let grid = TorusGrid::new(2, 16).unwrap();
    let t_grid = geometric_grid(1e-3, 3.0, 10);
    let c = verify_corollary_22(grid, 10, &t_grid, 77, 3).unwrap().c;
    let c0 = c0_from_forced_constant(c);

    let amplitude = 1.0;
    let f = make_initial_field(
        grid,
        &InitialFieldSpec::RandomBandlimited { seed: 5, max_wavenumber: 3, amplitude },
    )
    .unwrap();
    let mut cfg = SolverConfig::new(grid, c0 / (amplitude * amplitude));
    cfg.dt = Some(0.01);
    cfg.sample_every = 4;
    cfg.jmax_diagnostics = 1;
    let traj = simulate(&f, &cfg).unwrap();
    assert!(traj.terminated_early.is_none());

    let bound = 2.0 * c * amplitude;
    for (t, v) in compute_v(&traj).unwrap() {
        assert!(v < bound, "V({t:.4}) = {v:.4} >= 2C|f| = {bound:.4}");
    }
}

#[test]
fn semigroup_constants_are_scale_covariant() {
    // Rescaling f -> λ f(λ·), t -> t/λ² leaves every ratio unchanged.
    let coarse = TorusGrid::new(2, 12).unwrap();
    let fine = TorusGrid::new(2, 24).unwrap();
    let t_grid = geometric_grid(1e-3, 2.0, 8);
    let t_fine: Vec<f64> = t_grid.iter().map(|t| t / 4.0).collect();

    // Single-mode family member: sin(x_1) on the coarse grid pairs with
    // sin(2 x_1) scaled by 2 on the fine grid.
    use torus_ns::estimates::single_sine_field;
    use torus_ns::heat::apply_heat_semigroup_vector;
    use torus_ns::spectral::dj_sup_norms;

    let f = single_sine_field(coarse);
    let mut f_l = single_sine_mode(fine, 2);
    f_l.scale(2.0);

    for (&t, &tl) in t_grid.iter().zip(&t_fine) {
        let base = dj_sup_norms(&apply_heat_semigroup_vector(&f, t).unwrap(), 2);
        let scaled = dj_sup_norms(&apply_heat_semigroup_vector(&f_l, tl).unwrap(), 2);
        for j in 0..=2usize {
            let a = t.powf(j as f64 / 2.0) * base[j] / 1.0;
            let b = tl.powf(j as f64 / 2.0) * scaled[j] / 2.0;
            assert!(
                ((a - b) / a.max(1e-300)).abs() < 1e-6,
                "j={j} t={t}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn scaling_lambda_one_is_identity() {
    let grid = TorusGrid::new(2, 12).unwrap();
    let f = taylor_green(grid);
    let r = scaling_check(&f, 1, 2, 0.005, 0.1, 4).unwrap();
    assert!(r.max_mismatch() < 1e-12, "lambda=1 mismatch {:?}", r);
}

#[test]
fn scaling_lambda_two_taylor_green() {
    let grid = TorusGrid::new(2, 12).unwrap();
    let f = taylor_green(grid);
    let r = scaling_check(&f, 2, 2, 0.004, 0.2, 10).unwrap();
    for (j, &m) in r.derivative_mismatch.iter().enumerate() {
        assert!(m < 1e-6, "j={j} mismatch {m:.3e}");
    }
    assert!(r.pressure_mismatch < 1e-6, "pressure {:.3e}", r.pressure_mismatch);
}

#[test]
fn scaling_rejects_lambda_zero() {
    let grid = TorusGrid::new(2, 12).unwrap();
    let f = taylor_green(grid);
    assert!(scaling_check(&f, 0, 1, 0.01, 0.1, 1).is_err());
}

#[test]
fn future_control_stable_under_grid_refinement() {
    // 3-D Taylor-Green at two resolutions: the ratio moves by < 5%.
    let c0 = 0.2;
    let t1 = 0.25;
    let mut ratios = Vec::new();
    for m in [12usize, 24] {
        let grid = TorusGrid::new(3, m).unwrap();
        let f = taylor_green(grid);
        let mut cfg = SolverConfig::new(grid, 1.2);
        cfg.dt = Some(0.004);
        cfg.sample_every = 5;
        cfg.jmax_diagnostics = 1;
        let traj = simulate(&f, &cfg).unwrap();
        let r = future_control_check(&traj, 1, t1, c0).unwrap();
        ratios.push(r.ratio);
    }
    let drift = (ratios[1] - ratios[0]).abs() / ratios[0];
    assert!(drift < 0.05, "ratios {ratios:?} drift {drift:.4}");
}

#[test]
fn future_control_invariant_under_rescaling() {
    // Rescaled experiment: f_λ on the refined grid with dt/λ², checked with
    // the same c0 and t1/λ²; both maxima scale by λ^{j+1}.
    use torus_ns::estimates::rescale_velocity;
    let lambda = 2u32;
    let l2 = (lambda * lambda) as f64;
    let c0 = 0.2;
    let t1 = 0.3;
    let j = 1u32;

    let grid = TorusGrid::new(2, 12).unwrap();
    let f = make_initial_field(
        grid,
        &InitialFieldSpec::RandomBandlimited { seed: 21, max_wavenumber: 3, amplitude: 1.0 },
    )
    .unwrap();

    let mut cfg = SolverConfig::new(grid, 1.5);
    cfg.dt = Some(0.005);
    cfg.sample_every = 6;
    cfg.jmax_diagnostics = 1;
    let base = simulate(&f, &cfg).unwrap();
    let rb = future_control_check(&base, j, t1, c0).unwrap();

    let f_l = rescale_velocity(&f, lambda).unwrap();
    let mut cfg_l = SolverConfig::new(f_l.grid(), 1.5 / l2);
    cfg_l.dt = Some(0.005 / l2);
    cfg_l.sample_every = 6;
    cfg_l.jmax_diagnostics = 1;
    let fine = simulate(&f_l, &cfg_l).unwrap();
    // |f_λ| = λ|f| shifts the window start by 1/λ² and |u_λ(t1/λ²)| = λ|u(t1)|
    // shifts τ the same way, so the same c0 applies verbatim.
    let rf = future_control_check(&fine, j, t1 / l2, c0).unwrap();

    let scale = (lambda as f64).powi(j as i32 + 1);
    assert!(
        ((rf.lhs - scale * rb.lhs) / (scale * rb.lhs)).abs() < 1e-6,
        "lhs {} vs {}",
        rf.lhs,
        scale * rb.lhs
    );
    assert!(
        ((rf.rhs - scale * rb.rhs) / (scale * rb.rhs)).abs() < 1e-6,
        "rhs {} vs {}",
        rf.rhs,
        scale * rb.rhs
    );
    assert!(((rf.ratio - rb.ratio) / rb.ratio).abs() < 1e-6);
}

#[test]
fn semigroup_measurement_small_grid_sanity() {
    let grid = TorusGrid::new(2, 12).unwrap();
    let t_grid = geometric_grid(1e-3, 5.0, 8);
    let m = measure_semigroup_constants(grid, 2, 8, &t_grid, 3, 3).unwrap();
    // The canonical single-mode member pins C_1 near (2e)^{-1/2} from below.
    assert!(m.c_plain[1] > 0.40 && m.c_plain[1] < 0.45, "C_1 = {}", m.c_plain[1]);
    assert!(m.max_principle_excess <= 1e-12);
    assert!(m.stability() < 0.05);
}
