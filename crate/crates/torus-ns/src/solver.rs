//! Time evolution of the projected momentum equation `u_t = Δu - ℙ(u·∇u)`
//! and the abstract quadratic system `u_t = Δu + Σ D_i ℙ g(u)` by an
//! integrating-factor Runge-Kutta scheme of order 4: the heat part is
//! applied exactly through `e^{tΔ}` multipliers, only the projected
//! nonlinearity is treated explicitly.

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::TorusGrid;
use crate::gspec::GSpec;
use crate::leray::nonlinear_term_opts;
use crate::spectral::{dealias_vector, dj_sup_norms, divergence};
use crate::transform::{inverse_transform, sup_norm};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Solver parameters; `dt = None` resolves to the default step rule
/// `0.25 / (max|k|² + kmax · |f|_∞)` over the active (dealiased) band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    #[serde(default)]
    pub dt: Option<f64>,
    pub end_time: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Blow-up threshold `B`; `None` resolves to `10⁴ · |f|_∞`.
    #[serde(default)]
    pub blowup_threshold: Option<f64>,
    /// Diagnostics (and optional snapshots) every this many steps.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// Retain spectral fields at sample times.
    #[serde(default)]
    pub store_fields: bool,
    /// Record `|𝒟^j u|_∞` for `j <= jmax_diagnostics`.
    #[serde(default = "default_jmax")]
    pub jmax_diagnostics: u32,
}

fn default_true() -> bool {
    true
}

fn default_sample_every() -> usize {
    1
}

fn default_jmax() -> u32 {
    1
}

impl SolverConfig {
    pub fn new(grid: TorusGrid, end_time: f64) -> Self {
        Self {
            grid,
            dt: None,
            end_time,
            dealias: true,
            blowup_threshold: None,
            sample_every: 1,
            store_fields: false,
            jmax_diagnostics: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.end_time > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "end_time must be positive, got {}",
                self.end_time
            )));
        }
        if let Some(b) = self.blowup_threshold {
            if !(b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "blowup_threshold must be positive, got {b}"
                )));
            }
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Default explicit-stability step for initial sup-norm `sup_f`.
    pub fn resolve_dt(&self, sup_f: f64) -> f64 {
        match self.dt {
            Some(dt) => dt,
            None => {
                let m = self.grid.modes();
                let kmax_axis = if self.dealias { (m / 3) as f64 } else { (m / 2) as f64 };
                let n = self.grid.dim() as f64;
                let k2max = n * kmax_axis * kmax_axis;
                let kmax = k2max.sqrt();
                0.25 / (k2max + kmax * sup_f)
            }
        }
    }
}

/// Right-hand side beyond the exactly-integrated heat part.
#[derive(Debug, Clone)]
pub enum RhsKind {
    /// Pure heat flow (the nonlinear term forced to zero).
    None,
    /// `-ℙ(u·∇u)` in the advective form.
    NavierStokes,
    /// `Σ D_i ℙ g(u)` summed over the given terms.
    GSystem(Vec<GSpec>),
}

impl RhsKind {
    /// Evaluate the term on a state (zero for pure heat flow).
    pub fn eval(&self, u: &VectorField, dealias: bool) -> VectorField {
        match self {
            RhsKind::None => VectorField::zeros(u.grid()),
            RhsKind::NavierStokes => nonlinear_term_opts(u, dealias),
            RhsKind::GSystem(terms) => {
                let mut acc = VectorField::zeros(u.grid());
                for term in terms {
                    acc.add_assign(&term.forcing_term_opts(u, dealias));
                }
                acc
            }
        }
    }
}

/// Per-sample measurements along a trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub t: f64,
    /// `|𝒟^j u|_∞` for `j = 0..=jmax`; index 0 is `|u|_∞`.
    pub dj_sup: Vec<f64>,
    /// Sup-norm of `∇·u` on the collocation points.
    pub divergence_residual: f64,
    /// Spectral energy `½ Σ_k |û(k)|²`.
    pub energy: f64,
}

impl SampleDiagnostics {
    pub fn sup(&self) -> f64 {
        self.dj_sup[0]
    }
}

/// Early-termination record (the blow-up proxy for the maximal existence
/// time: the first step at which `|u|_∞` exceeded the threshold).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Termination {
    pub t: f64,
    pub sup: f64,
    pub threshold: f64,
}

/// Time-stamped trajectory with per-sample diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub diagnostics: Vec<SampleDiagnostics>,
    /// Spectral snapshots at the sample times (empty unless requested).
    pub fields: Vec<VectorField>,
    pub final_field: VectorField,
    pub terminated_early: Option<Termination>,
    pub dt: f64,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial sample")
    }

    pub fn sup_trace(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.diagnostics)
            .map(|(&t, d)| (t, d.sup()))
    }

    /// Diagnostics columns as CSV:
    /// `t, sup_u, d1_sup, ..., dJ_sup, divergence_residual, energy`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let jmax = self.diagnostics.first().map_or(0, |d| d.dj_sup.len() - 1);
        write!(out, "t,sup_u")?;
        for j in 1..=jmax {
            write!(out, ",d{j}_sup")?;
        }
        writeln!(out, ",divergence_residual,energy")?;
        for (t, d) in self.times.iter().zip(&self.diagnostics) {
            write!(out, "{t:.12e},{:.12e}", d.sup())?;
            for v in &d.dj_sup[1..] {
                write!(out, ",{v:.12e}")?;
            }
            writeln!(out, ",{:.12e},{:.12e}", d.divergence_residual, d.energy)?;
        }
        Ok(())
    }
}

/// Single integrating-factor RK4 stepper with precomputed heat multipliers.
pub struct Integrator {
    grid: TorusGrid,
    rhs: RhsKind,
    dealias: bool,
    dt: f64,
    e_half: Vec<f64>,
    e_full: Vec<f64>,
}

fn heat_table(grid: TorusGrid, t: f64) -> Vec<f64> {
    let mut table = vec![0.0; grid.len()];
    grid.for_each_mode(|flat, k| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        table[flat] = (-k2 * t).exp();
    });
    table
}

fn apply_table(u: &VectorField, table: &[f64]) -> VectorField {
    u.map(|c| {
        let mut out = c.clone();
        for (v, &e) in out.coeffs_mut().iter_mut().zip(table) {
            *v *= e;
        }
        out
    })
}

impl Integrator {
    pub fn new(grid: TorusGrid, rhs: RhsKind, dealias: bool, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            grid,
            rhs,
            dealias,
            dt,
            e_half: heat_table(grid, dt / 2.0),
            e_full: heat_table(grid, dt),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance one step of size `dt`. With `N` the projected nonlinearity
    /// and `E = e^{Δ dt/2}`:
    ///
    /// ```text
    /// N1 = N(u)                 N2 = N(E(u + dt/2 N1))
    /// N3 = N(E u + dt/2 N2)     N4 = N(E² u + dt E N3)
    /// u' = E² u + dt/6 (E² N1 + 2 E (N2 + N3) + N4)
    /// ```
    ///
    /// The linear flow is exact, so a zero `N` reproduces `e^{Δ dt} u`.
    pub fn step(&self, u: &VectorField) -> VectorField {
        let dt = self.dt;
        let n1 = self.rhs.eval(u, self.dealias);

        let mut stage = u.clone();
        stage.axpy(dt / 2.0, &n1);
        let a = apply_table(&stage, &self.e_half);
        let n2 = self.rhs.eval(&a, self.dealias);

        let mut b = apply_table(u, &self.e_half);
        b.axpy(dt / 2.0, &n2);
        let n3 = self.rhs.eval(&b, self.dealias);

        let mut c = apply_table(u, &self.e_full);
        c.axpy(dt, &apply_table(&n3, &self.e_half));
        let n4 = self.rhs.eval(&c, self.dealias);

        let mut out = apply_table(u, &self.e_full);
        out.axpy(dt / 6.0, &apply_table(&n1, &self.e_full));
        let mut n23 = n2;
        n23.add_assign(&n3);
        out.axpy(dt / 3.0, &apply_table(&n23, &self.e_half));
        out.axpy(dt / 6.0, &n4);
        out
    }
}

fn diagnostics_at(u: &VectorField, t: f64, jmax: u32) -> SampleDiagnostics {
    SampleDiagnostics {
        t,
        dj_sup: dj_sup_norms(u, jmax),
        divergence_residual: inverse_transform(&divergence(u)).sup(),
        energy: u.spectral_energy(),
    }
}

fn evolve(f: &VectorField, rhs: RhsKind, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if f.grid() != cfg.grid {
        return Err(Error::GridMismatch(
            "initial field is not on the configured grid".into(),
        ));
    }
    let sup_f = sup_norm(f);
    let dt = cfg.resolve_dt(sup_f);
    let threshold = cfg.blowup_threshold.unwrap_or(1e4 * sup_f.max(f64::MIN_POSITIVE));

    let mut u = if cfg.dealias { dealias_vector(f) } else { f.clone() };
    let steps = (cfg.end_time / dt).ceil() as usize;
    let steps = steps.max(1);

    let integrator = Integrator::new(cfg.grid, rhs.clone(), cfg.dealias, dt)?;

    let mut times = vec![0.0];
    let mut diagnostics = vec![diagnostics_at(&u, 0.0, cfg.jmax_diagnostics)];
    let mut fields = Vec::new();
    if cfg.store_fields {
        fields.push(u.clone());
    }
    let mut terminated = None;

    let mut t = 0.0;
    for step_index in 1..=steps {
        let target = if step_index == steps {
            cfg.end_time
        } else {
            step_index as f64 * dt
        };
        let h = target - t;
        u = if (h - dt).abs() < 1e-15 * dt.max(1.0) {
            integrator.step(&u)
        } else {
            // Short closing step to land exactly on end_time.
            Integrator::new(cfg.grid, rhs.clone(), cfg.dealias, h)?.step(&u)
        };
        t = target;

        let sup = sup_norm(&u);
        if sup > threshold {
            terminated = Some(Termination { t, sup, threshold });
            times.push(t);
            diagnostics.push(diagnostics_at(&u, t, cfg.jmax_diagnostics));
            if cfg.store_fields {
                fields.push(u.clone());
            }
            break;
        }

        if step_index % cfg.sample_every == 0 || step_index == steps {
            times.push(t);
            diagnostics.push(diagnostics_at(&u, t, cfg.jmax_diagnostics));
            if cfg.store_fields {
                fields.push(u.clone());
            }
        }
    }

    Ok(Trajectory {
        times,
        diagnostics,
        fields,
        final_field: u,
        terminated_early: terminated,
        dt,
    })
}

/// Evolve the Navier-Stokes system from a divergence-free initial field.
pub fn simulate(f: &VectorField, cfg: &SolverConfig) -> Result<Trajectory> {
    evolve(f, RhsKind::NavierStokes, cfg)
}

/// Evolve the abstract system `u_t = Δu + Σ_terms D_i ℙ g(u)`. The state is
/// not re-projected between steps: nothing in the abstract system keeps it
/// divergence-free unless the terms do.
pub fn simulate_g_system(f: &VectorField, terms: &[GSpec], cfg: &SolverConfig) -> Result<Trajectory> {
    for term in terms {
        if term.dim() != cfg.grid.dim() {
            return Err(Error::GridMismatch(
                "GSpec dimension differs from the grid".into(),
            ));
        }
    }
    evolve(f, RhsKind::GSystem(terms.to_vec()), cfg)
}

/// Pure heat flow control run (the nonlinear term forced to zero).
pub fn simulate_heat(f: &VectorField, cfg: &SolverConfig) -> Result<Trajectory> {
    evolve(f, RhsKind::None, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealField;
    use crate::grid::TorusGrid;
    use crate::heat::apply_heat_semigroup_vector;
    use crate::initial::{make_initial_field, taylor_green, InitialFieldSpec};
    use crate::transform::forward_transform;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_initial_field_stays_zero() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = VectorField::zeros(g);
        let mut cfg = SolverConfig::new(g, 0.1);
        cfg.dt = Some(0.01);
        let traj = simulate(&f, &cfg).unwrap();
        assert!(traj.terminated_early.is_none());
        assert!(traj.diagnostics.iter().all(|d| d.sup() == 0.0));
    }

    #[test]
    fn linear_part_is_exact() {
        // With the nonlinearity forced to zero the integrating factor
        // reproduces e^{tΔ} f to roundoff, independent of dt.
        let g = TorusGrid::new(2, 16).unwrap();
        let f = VectorField::new(vec![
            forward_transform(&RealField::from_fn(g, |x| (2.0 * x[0]).sin() * x[1].cos())),
            forward_transform(&RealField::from_fn(g, |x| (3.0 * x[1]).cos())),
        ])
        .unwrap();
        let mut cfg = SolverConfig::new(g, 0.37);
        cfg.dt = Some(0.037);
        let traj = simulate_heat(&f, &cfg).unwrap();
        let exact = apply_heat_semigroup_vector(&dealias_vector(&f), 0.37).unwrap();
        assert!(sup_norm(&traj.final_field.sub(&exact)) < 1e-13);
    }

    #[test]
    fn taylor_green_2d_decays_exactly() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = taylor_green(g);
        let mut cfg = SolverConfig::new(g, 1.0);
        cfg.dt = Some(0.005);
        cfg.sample_every = 50;
        let traj = simulate(&f, &cfg).unwrap();
        let mut expect = f.clone();
        expect.scale((-2.0f64).exp());
        let err = sup_norm(&traj.final_field.sub(&expect));
        assert!(err < 1e-10, "Taylor-Green error {err}");
        // The projected advection vanishes identically for this flow.
        let nl = crate::leray::nonlinear_term(&f);
        assert!(sup_norm(&nl) < 1e-12);
    }

    #[test]
    fn g_zero_reproduces_heat_flow() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = make_initial_field(
            g,
            &InitialFieldSpec::RandomBandlimited { seed: 3, max_wavenumber: 3, amplitude: 1.0 },
        )
        .unwrap();
        let mut cfg = SolverConfig::new(g, 0.2);
        cfg.dt = Some(0.01);
        let traj = simulate_g_system(&f, &[], &cfg).unwrap();
        let exact = apply_heat_semigroup_vector(&dealias_vector(&f), 0.2).unwrap();
        assert!(sup_norm(&traj.final_field.sub(&exact)) < 1e-13);
    }

    #[test]
    fn blow_up_threshold_terminates_early() {
        // Threshold below the initial amplitude: the first step's sup check
        // must trip and flag the trajectory with the hit time.
        let g = TorusGrid::new(2, 16).unwrap();
        let f = make_initial_field(
            g,
            &InitialFieldSpec::RandomBandlimited { seed: 9, max_wavenumber: 3, amplitude: 1.0 },
        )
        .unwrap();
        let mut cfg = SolverConfig::new(g, 5.0);
        cfg.dt = Some(0.01);
        cfg.blowup_threshold = Some(0.5);
        let traj = simulate(&f, &cfg).unwrap();
        let term = traj.terminated_early.clone().expect("expected early termination");
        assert!(term.sup > 0.5);
        assert!(term.t < 5.0);
        assert_abs_diff_eq!(traj.final_time(), term.t);
    }

    #[test]
    fn csv_header_and_rows() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = taylor_green(g);
        let mut cfg = SolverConfig::new(g, 0.02);
        cfg.dt = Some(0.01);
        cfg.jmax_diagnostics = 2;
        let traj = simulate(&f, &cfg).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,sup_u,d1_sup,d2_sup,divergence_residual,energy"
        );
        assert_eq!(lines.count(), traj.times.len());
    }
}
