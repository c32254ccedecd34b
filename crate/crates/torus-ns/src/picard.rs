//! Picard iteration on the mild (Duhamel) form
//! `u(t) = e^{tΔ} f - ∫_0^t e^{(t-s)Δ} ℙ(u·∇u)(s) ds`, used as an
//! integrator-independent oracle, and the Duhamel residual of a finished
//! trajectory, used as a correctness certificate.

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::heat::apply_heat_semigroup_vector;
use crate::quadrature::{gauss_legendre, simpson_weights};
use crate::solver::{RhsKind, Trajectory};
use crate::spectral::dealias_vector;
use crate::transform::sup_norm;

/// Outcome of [`picard_solve`]: the final iterate at `t` and the sup-norm
/// differences between successive iterates there (the contraction trace).
#[derive(Debug, Clone)]
pub struct PicardResult {
    pub field: VectorField,
    pub iterate_diffs: Vec<f64>,
}

/// Fixed-point iteration `u^{m+1}(t) = e^{tΔ}f - ∫_0^t e^{(t-s)Δ}
/// ℙ(u^m·∇u^m)(s) ds`, with the integral evaluated by Gauss-Legendre
/// quadrature in `s` and the iterates stored on the quadrature nodes
/// (values between nodes come from Lagrange interpolation of the
/// nonlinearity, which is linear in the stored stage fields).
///
/// `t` must sit inside the contraction window `t ≤ 0.1 / |f|_∞²`; an
/// iteration whose differences grow is reported as divergence.
pub fn picard_solve(
    f: &VectorField,
    t: f64,
    iterations: usize,
    quadrature_nodes: usize,
) -> Result<PicardResult> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if iterations < 1 {
        return Err(Error::InvalidParameter("iterations must be >= 1".into()));
    }
    if quadrature_nodes < 2 {
        return Err(Error::InvalidParameter("quadrature_nodes must be >= 2".into()));
    }
    let f = dealias_vector(f);
    let sup_f = sup_norm(&f);
    if sup_f > 0.0 && t > 0.1 / (sup_f * sup_f) + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "t = {t} outside the contraction window t <= 0.1/|f|_inf^2 = {}",
            0.1 / (sup_f * sup_f)
        )));
    }

    let outer = gauss_legendre(quadrature_nodes)?;
    let nodes: Vec<f64> = outer.nodes.iter().map(|&x| t * 0.5 * (1.0 + x)).collect();
    let inner = gauss_legendre(quadrature_nodes.max(8))?;

    // u^0 on the nodes and at t: the heat flow of f.
    let mut stages: Vec<VectorField> = nodes
        .iter()
        .map(|&s| apply_heat_semigroup_vector(&f, s))
        .collect::<Result<Vec<_>>>()?;
    let mut at_t = apply_heat_semigroup_vector(&f, t)?;

    let rhs = RhsKind::NavierStokes;
    let mut diffs = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        // N = -ℙ(u·∇u) on each node, so the mild form reads
        // u(τ) = e^{τΔ}f + ∫_0^τ e^{(τ-s)Δ} N(u(s)) ds.
        let forcing: Vec<VectorField> = stages.iter().map(|u| rhs.eval(u, true)).collect();

        let integral_to = |tau: f64| -> Result<VectorField> {
            let mut acc = VectorField::zeros(f.grid());
            for (&xp, &wp) in inner.nodes.iter().zip(&inner.weights) {
                let sigma = tau * 0.5 * (1.0 + xp);
                let weight = wp * tau * 0.5;
                // Interpolate the forcing at sigma from the stored nodes.
                let mut g_sigma = VectorField::zeros(f.grid());
                for (q, gq) in forcing.iter().enumerate() {
                    g_sigma.axpy(lagrange_basis(&nodes, q, sigma), gq);
                }
                acc.axpy(weight, &apply_heat_semigroup_vector(&g_sigma, tau - sigma)?);
            }
            Ok(acc)
        };

        for (q, &s) in nodes.iter().enumerate() {
            let mut next = apply_heat_semigroup_vector(&f, s)?;
            next.add_assign(&integral_to(s)?);
            stages[q] = next;
        }
        let mut next_t = apply_heat_semigroup_vector(&f, t)?;
        next_t.add_assign(&integral_to(t)?);

        diffs.push(sup_norm(&next_t.sub(&at_t)));
        at_t = next_t;

        let m = diffs.len();
        if m >= 2 && diffs[m - 1] > diffs[m - 2] && diffs[m - 1] > 1e-13 {
            return Err(Error::PicardDiverged(diffs));
        }
    }

    Ok(PicardResult { field: at_t, iterate_diffs: diffs })
}

fn lagrange_basis(nodes: &[f64], q: usize, x: f64) -> f64 {
    let mut v = 1.0;
    for (r, &nr) in nodes.iter().enumerate() {
        if r != q {
            v *= (x - nr) / (nodes[q] - nr);
        }
    }
    v
}

/// Sup-norm of `u(T) - e^{TΔ}u(0) - ∫_0^T e^{(T-s)Δ} N(u(s)) ds` with the
/// integral taken by composite Simpson over the stored samples and `N` the
/// trajectory's own right-hand side. Small residuals certify that the
/// trajectory solves its mild equation independently of the integrator.
pub fn duhamel_residual_with(traj: &Trajectory, rhs: &RhsKind) -> Result<f64> {
    let samples = &traj.fields;
    if samples.len() != traj.times.len() || samples.is_empty() {
        return Err(Error::InsufficientSamples(
            "trajectory was recorded without stored fields".into(),
        ));
    }
    let count = samples.len();
    if count < 3 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 3 samples, got {count}"
        )));
    }
    let h = traj.times[1] - traj.times[0];
    for w in traj.times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1e-12) {
            return Err(Error::InsufficientSamples(
                "samples are not uniformly spaced".into(),
            ));
        }
    }
    let weights = simpson_weights(count, h)?;
    let t_end = traj.final_time();

    let mut mild = apply_heat_semigroup_vector(&samples[0], t_end)?;
    for ((u_s, &w), &s) in samples.iter().zip(&weights).zip(&traj.times) {
        let n = rhs.eval(u_s, true);
        mild.axpy(w, &apply_heat_semigroup_vector(&n, t_end - s)?);
    }
    Ok(sup_norm(&samples[count - 1].sub(&mild)))
}

/// [`duhamel_residual_with`] for the Navier-Stokes right-hand side.
pub fn duhamel_residual(traj: &Trajectory) -> Result<f64> {
    duhamel_residual_with(traj, &RhsKind::NavierStokes)
}
