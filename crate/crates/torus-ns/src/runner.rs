//! Experiment dispatch for the CLI: validates a config, runs the selected
//! experiment, writes artifacts (report JSON, trace/collapse CSV, PFLD
//! snapshots) under the output directory, and prints a one-screen summary.
//!
//! Exit codes: 0 all verdicts pass, 1 numerical failure or failed verdict,
//! 2 config error. Nothing is written unless validation succeeded.

use crate::config::{
    ExperimentConfig, ExperimentKind, GSystemParams, PicardCrosscheckParams, ScalingCheckParams,
    SimulateParams, VerifyEstimatesParams, VerifyKernelParams, VerifySemigroupParams,
};
use crate::error::{Error, Result};
use crate::estimates::{
    c0_for_g_system, c0_from_forced_constant, geometric_grid, measure_semigroup_constants,
    scaling_check, verify_corollary_22, verify_theorem_bounds, TheoremBoundsConfig,
};
use crate::heat::{heat_kernel_poisson, heat_kernel_spectral, KernelEvalConfig, KernelRepresentation};
use crate::initial::make_initial_field;
use crate::picard::{duhamel_residual, picard_solve};
use crate::report::{
    config_hash, log_log_slope, write_collapse_csv, EstimateReport, GSystemReport,
    KernelDualityReport, PicardCrosscheckReport, Provenance, Verdict,
};
use crate::snapshot::write_vector_field;
use crate::solver::{simulate, simulate_g_system, SolverConfig, Trajectory};
use crate::transform::sup_norm;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Everything `run` leaves behind.
pub struct RunArtifacts {
    pub report: EstimateReport,
    pub report_path: PathBuf,
    pub extra_paths: Vec<PathBuf>,
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Execute a validated config and write artifacts under its output dir.
pub fn run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(if cfg.deterministic {
            1
        } else {
            cfg.parallelism.unwrap_or(0)
        })
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut extra = Vec::new();
    let mut report = match &cfg.kind {
        ExperimentKind::Simulate(p) => run_simulate(p, &cfg.output_dir, &mut extra)?,
        ExperimentKind::GSystem(p) => run_g_system(p, &cfg.output_dir, &mut extra)?,
        ExperimentKind::VerifyKernel(p) => run_verify_kernel(p)?,
        ExperimentKind::VerifySemigroup(p) => run_verify_semigroup(p)?,
        ExperimentKind::VerifyEstimates(p) => run_verify_estimates(p, &cfg.output_dir, &mut extra)?,
        ExperimentKind::ScalingCheck(p) => run_scaling_check(p)?,
        ExperimentKind::PicardCrosscheck(p) => run_picard(p)?,
    };
    report.provenance = Some(Provenance {
        config_hash: config_hash(&cfg.document),
        seeds: cfg.seeds(),
        timestamp_unix: timestamp(),
    });
    let report_path = cfg.output_dir.join("report.json");
    report.write_json(&report_path)?;
    Ok(RunArtifacts {
        report,
        report_path,
        extra_paths: extra,
    })
}

fn write_trace(traj: &Trajectory, dir: &Path, extra: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join("trace.csv");
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    std::fs::write(&path, buf)?;
    extra.push(path);
    Ok(())
}

fn write_snapshots(traj: &Trajectory, dir: &Path, extra: &mut Vec<PathBuf>) -> Result<()> {
    for (i, field) in traj.fields.iter().enumerate() {
        let stem = format!("snap_{i:06}");
        extra.extend(write_vector_field(dir, &stem, field)?);
    }
    Ok(())
}

fn trajectory_verdicts(traj: &Trajectory, report: &mut EstimateReport, divergence_bound: Option<f64>) {
    report.verdicts.push(Verdict::boolean(
        "completed-without-blowup",
        traj.terminated_early.is_none(),
        match &traj.terminated_early {
            None => format!("ran to t = {:.6}", traj.final_time()),
            Some(term) => format!(
                "|u|_inf = {:.3e} crossed {:.3e} at t = {:.6}",
                term.sup, term.threshold, term.t
            ),
        },
    ));
    if let Some(bound) = divergence_bound {
        let worst = traj
            .diagnostics
            .iter()
            .map(|d| d.divergence_residual)
            .fold(0.0, f64::max);
        report
            .verdicts
            .push(Verdict::le("divergence-free", worst, bound, "max |div u|_inf over samples"));
    }
    let mut energy_increase = 0.0f64;
    for w in traj.diagnostics.windows(2) {
        energy_increase = energy_increase.max(w[1].energy - w[0].energy);
    }
    report.verdicts.push(Verdict::le(
        "energy-nonincreasing",
        energy_increase,
        1e-12 * traj.diagnostics[0].energy.max(1e-300),
        "max per-sample energy increase",
    ));
}

fn run_simulate(p: &SimulateParams, dir: &Path, extra: &mut Vec<PathBuf>) -> Result<EstimateReport> {
    let mut solver = p.solver.build(p.grid)?;
    if p.write_snapshots {
        solver.store_fields = true;
    }
    let f = make_initial_field(p.grid, &p.initial)?;
    let traj = simulate(&f, &solver)?;

    let mut report = EstimateReport::new("simulate");
    trajectory_verdicts(&traj, &mut report, Some(1e-11));
    write_trace(&traj, dir, extra)?;
    if p.write_snapshots {
        write_snapshots(&traj, dir, extra)?;
    }
    Ok(report)
}

fn run_g_system(p: &GSystemParams, dir: &Path, extra: &mut Vec<PathBuf>) -> Result<EstimateReport> {
    let mut solver = p.solver.build(p.grid)?;
    if p.write_snapshots {
        solver.store_fields = true;
    }
    let f = make_initial_field(p.grid, &p.initial)?;
    let terms = p.g_terms.build(p.grid.dim())?;
    let traj = simulate_g_system(&f, &terms, &solver)?;

    let mut report = EstimateReport::new("g-system");
    // The abstract system does not preserve divergence in general.
    trajectory_verdicts(&traj, &mut report, None);
    write_trace(&traj, dir, extra)?;
    if p.write_snapshots {
        write_snapshots(&traj, dir, extra)?;
    }
    Ok(report)
}

/// Evaluation points for the kernel duality scan: a fixed irrational-slope
/// line through `[0, 2π)^n`.
pub fn kernel_scan_point(dim: usize, index: usize, count: usize) -> Vec<f64> {
    let s = 2.0 * std::f64::consts::PI * (index as f64 + 0.5) / count as f64;
    let slopes = [1.0, 0.6180339887498949, 0.3819660112501051];
    (0..dim)
        .map(|a| (s * slopes[a]) % (2.0 * std::f64::consts::PI))
        .collect()
}

fn run_verify_kernel(p: &VerifyKernelParams) -> Result<EstimateReport> {
    let auto = KernelEvalConfig {
        representation: KernelRepresentation::Auto,
        ..p.kernel
    };
    let t_grid = geometric_grid(p.t_min, p.t_max, p.t_points);
    let mut per_dim = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_tail = 0.0f64;
    for &n in &p.dims {
        let mut dim_worst = 0.0f64;
        for ix in 0..p.x_points {
            let x = kernel_scan_point(n, ix, p.x_points);
            for &t in &t_grid {
                let a = heat_kernel_spectral(&x, t, &auto)?;
                let b = heat_kernel_poisson(&x, t, &auto)?;
                worst_tail = worst_tail.max(a.tail_bound).max(b.tail_bound);
                let rel = (a.value - b.value).abs() / a.value.abs().max(b.value.abs());
                dim_worst = dim_worst.max(rel);
            }
        }
        per_dim.push((n, dim_worst));
        worst = worst.max(dim_worst);
    }

    let mut report = EstimateReport::new("verify-kernel");
    report.kernel = Some(KernelDualityReport {
        points_per_dim: p.x_points * p.t_points,
        per_dim,
        max_rel_disagreement: worst,
        max_tail_bound: worst_tail,
    });
    report.verdicts.push(Verdict::le(
        "kernel-duality",
        worst,
        p.tolerance,
        "max relative disagreement of the two representations",
    ));
    report.verdicts.push(Verdict::le(
        "kernel-tails",
        worst_tail,
        1e-13,
        "max truncation tail bound",
    ));
    Ok(report)
}

fn run_verify_semigroup(p: &VerifySemigroupParams) -> Result<EstimateReport> {
    let t_grid = geometric_grid(p.t_min, p.t_max, p.t_points);
    let m = measure_semigroup_constants(p.grid, p.j_max, p.trials, &t_grid, p.seed0, p.kmax)?;

    let mut report = EstimateReport::new("verify-semigroup");
    report.verdicts.push(Verdict::le(
        "maximum-principle",
        m.max_principle_excess,
        1e-12,
        "max of |e^{tD}f|/|f| - 1 over trials and t",
    ));
    report.verdicts.push(Verdict::le(
        "constant-stability",
        m.stability(),
        p.stability_tolerance,
        "relative drift of C_j when the trial count doubles",
    ));
    let finite = m.c_plain.iter().chain(&m.c_projected).all(|c| c.is_finite());
    report
        .verdicts
        .push(Verdict::boolean("constants-finite", finite, format!(
            "C_j (plain) = {:?}, C_j (projected) = {:?}",
            m.c_plain, m.c_projected
        )));
    report.semigroup = Some(m);
    Ok(report)
}

fn run_verify_estimates(
    p: &VerifyEstimatesParams,
    dir: &Path,
    extra: &mut Vec<PathBuf>,
) -> Result<EstimateReport> {
    let forced_grid = geometric_grid(1e-3, 5.0, 16);
    let forced = verify_corollary_22(p.grid, p.forced_trials, &forced_grid, p.forced_seed0, p.forced_kmax)?;
    let c0 = c0_from_forced_constant(forced.c);

    let sweep = TheoremBoundsConfig {
        grid: p.grid,
        amplitudes: p.amplitudes.clone(),
        seeds: p.seeds.clone(),
        j_max: p.j_max,
        kmax_init: p.kmax_init,
        forced_constant: forced.c,
        dt: p.dt,
        samples_per_run: p.samples_per_run,
    };
    let theorem = verify_theorem_bounds(&sweep)?;

    let mut report = EstimateReport::new("verify-estimates");
    report.verdicts.push(Verdict::boolean(
        "existence-window",
        theorem.early_terminations == 0,
        format!(
            "{} of {} runs terminated before T = c0/A^2 (c0 = {:.6e})",
            theorem.early_terminations,
            theorem.runs.len(),
            c0
        ),
    ));
    report.verdicts.push(Verdict::le(
        "k0-bound",
        theorem.k0_max(),
        2.0,
        "max |u(t)|_inf / |f|_inf over all runs",
    ));
    for j in 0..=p.j_max as usize {
        let vals: Vec<f64> = theorem.k_by_amplitude.iter().map(|(_, k)| k[j]).collect();
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let spread = vals
            .iter()
            .map(|&v| (v / median).max(median / v))
            .fold(0.0, f64::max);
        report.verdicts.push(Verdict::le(
            &format!("k{j}-collapse"),
            spread,
            2.0,
            format!("per-amplitude K_{j} vs median {median:.4e}: {vals:?}"),
        ));
    }
    report.verdicts.push(Verdict::le(
        "heat-control-consistency",
        theorem.heat_control_max_rel_err,
        0.01,
        "trajectory path vs direct multiplier path on heat-only runs",
    ));

    let csv = dir.join("collapse.csv");
    write_collapse_csv(&theorem, &csv)?;
    extra.push(csv);

    report.c0 = Some(c0);
    report.forced = Some(forced);
    report.theorem = Some(theorem);
    Ok(report)
}

fn run_scaling_check(p: &ScalingCheckParams) -> Result<EstimateReport> {
    let f = make_initial_field(p.grid, &p.initial)?;
    let result = scaling_check(&f, p.lambda, p.j_max, p.dt, p.end_time, p.sample_every)?;

    let mut report = EstimateReport::new("scaling-check");
    for (j, &m) in result.derivative_mismatch.iter().enumerate() {
        report.verdicts.push(Verdict::le(
            &format!("scaling-d{j}"),
            m,
            p.tolerance,
            format!("relative mismatch of |D^{j} u_l| vs l^{}|D^{j} u|", j + 1),
        ));
    }
    report.verdicts.push(Verdict::le(
        "scaling-pressure",
        result.pressure_mismatch,
        p.tolerance,
        "relative mismatch of p_l(x,t) vs l^2 p(lx, l^2 t)",
    ));
    report.scaling = Some(result);
    Ok(report)
}

/// Restrict a stored trajectory to every `step`-th sample (for residual
/// refinement studies).
pub fn subsample_trajectory(traj: &Trajectory, step: usize) -> Trajectory {
    let pick = |i: usize| i % step == 0;
    Trajectory {
        times: traj
            .times
            .iter()
            .enumerate()
            .filter(|(i, _)| pick(*i))
            .map(|(_, &t)| t)
            .collect(),
        diagnostics: traj
            .diagnostics
            .iter()
            .enumerate()
            .filter(|(i, _)| pick(*i))
            .map(|(_, d)| d.clone())
            .collect(),
        fields: traj
            .fields
            .iter()
            .enumerate()
            .filter(|(i, _)| pick(*i))
            .map(|(_, f)| f.clone())
            .collect(),
        final_field: traj.final_field.clone(),
        terminated_early: traj.terminated_early.clone(),
        dt: traj.dt,
    }
}

fn run_picard(p: &PicardCrosscheckParams) -> Result<EstimateReport> {
    let f = make_initial_field(p.grid, &p.initial)?;

    // Integrator run to the Picard time.
    let mut cfg = SolverConfig::new(p.grid, p.t);
    cfg.dt = Some(p.dt.unwrap_or(p.t / 100.0));
    let traj = simulate(&f, &cfg)?;
    let picard = picard_solve(&f, p.t, p.iterations, p.quadrature_nodes)?;
    let diff = sup_norm(&picard.field.sub(&traj.final_field));

    // Residual refinement on a longer run; the base cadence must make every
    // requested spacing an even divisor of the step count.
    let mut cadences = p.residual_cadences.clone();
    cadences.sort_unstable_by(|a, b| b.cmp(a));
    let base = cadences[cadences.len() - 1];
    let lcm_all = cadences.iter().fold(1usize, |acc, &c| lcm(acc, c));
    // 16·lcm steps makes every cadence an even divisor (odd sample counts).
    let steps = 16 * lcm_all;
    let dt = p.residual_end_time / steps as f64;
    let mut res_cfg = SolverConfig::new(p.grid, p.residual_end_time);
    res_cfg.dt = Some(dt);
    res_cfg.sample_every = base;
    res_cfg.store_fields = true;
    let res_traj = simulate(&f, &res_cfg)?;

    let mut residuals = Vec::new();
    for &c in &cadences {
        let sub = subsample_trajectory(&res_traj, c / base);
        let r = duhamel_residual(&sub)?;
        residuals.push((c, r));
    }
    let points: Vec<(f64, f64)> = residuals
        .iter()
        .map(|&(c, r)| (c as f64 * dt, r))
        .collect();
    let slope = log_log_slope(&points);

    let mut report = EstimateReport::new("picard-crosscheck");
    report.verdicts.push(Verdict::le(
        "picard-vs-integrator",
        diff,
        p.tolerance,
        format!("sup difference at t = {}", p.t),
    ));
    report.verdicts.push(Verdict::boolean(
        "residual-order",
        (3.0..=5.0).contains(&slope),
        format!("Duhamel residual slope {slope:.3} over cadences {cadences:?}"),
    ));
    report.picard = Some(PicardCrosscheckReport {
        t: p.t,
        iterations: p.iterations,
        quadrature_nodes: p.quadrature_nodes,
        sup_difference: diff,
        iterate_diffs: picard.iterate_diffs,
        residuals,
        residual_order: slope,
    });
    Ok(report)
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(mut a: usize, mut b: usize) -> usize {
        while b != 0 {
            let t = b;
            b = a % b;
            a = t;
        }
        a
    }
    a / gcd(a, b) * b
}

/// Build the g-system consistency report used by the `g-system` example and
/// acceptance suite: the Navier-Stokes encoding against `simulate`, plus the
/// Lemma-3.1 window bound with `c0 = 1/(16 C^2 C_g^2)`.
pub fn g_system_consistency(
    grid: crate::grid::TorusGrid,
    seed: u64,
    kmax: u32,
    amplitude: f64,
    forced_constant: f64,
    dt: Option<f64>,
) -> Result<(EstimateReport, GSystemReport)> {
    use crate::gspec::GSpec;

    let f = make_initial_field(
        grid,
        &crate::initial::InitialFieldSpec::RandomBandlimited {
            seed,
            max_wavenumber: kmax,
            amplitude,
        },
    )?;
    let terms = GSpec::navier_stokes_encoding(grid.dim())?;
    let c_g = terms
        .iter()
        .map(|t| t.c_g())
        .fold(0.0f64, f64::max);
    let c0_g = c0_for_g_system(forced_constant, c_g);
    let window = c0_g / (amplitude * amplitude);

    let mut cfg = SolverConfig::new(grid, window);
    cfg.dt = dt;
    let ns = simulate(&f, &cfg)?;
    let gs = simulate_g_system(&f, &terms, &cfg)?;
    let encoding_diff = sup_norm(&ns.final_field.sub(&gs.final_field));

    let max_sup = gs
        .diagnostics
        .iter()
        .map(|d| d.sup())
        .fold(0.0, f64::max);

    let summary = GSystemReport {
        encoding_sup_difference: encoding_diff,
        c_g,
        c0_g,
        window_end: window,
        max_sup_over_window: max_sup,
        initial_sup: amplitude,
    };

    let mut report = EstimateReport::new("g-system");
    report.verdicts.push(Verdict::le(
        "encoding-matches-simulate",
        encoding_diff,
        1e-9,
        "sup difference of the two code paths at the window end",
    ));
    report.verdicts.push(Verdict::boolean(
        "lemma-window-bound",
        gs.terminated_early.is_none() && max_sup < 2.0 * amplitude,
        format!(
            "max |u| = {max_sup:.6e} vs 2|f| = {:.6e} on [0, {window:.6e}]",
            2.0 * amplitude
        ),
    ));
    report.g_system = Some(summary.clone());
    Ok((report, summary))
}

/// Human-readable execution plan without running anything.
pub fn describe(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("experiment: {}\n", cfg.kind.name()));
    out.push_str(&format!("output_dir: {}\n", cfg.output_dir.display()));
    out.push_str(&format!(
        "parallelism: {}\n",
        match (cfg.deterministic, cfg.parallelism) {
            (true, _) => "1 (deterministic)".to_string(),
            (false, Some(p)) => p.to_string(),
            (false, None) => "available cores".to_string(),
        }
    ));

    let mem = |grid: crate::grid::TorusGrid, fields: usize| -> String {
        let bytes = grid.len() * 16 * fields;
        format!(
            "~{:.1} MiB ({}^{} points x 16 bytes x {} field copies)",
            bytes as f64 / (1024.0 * 1024.0),
            grid.modes(),
            grid.dim(),
            fields
        )
    };

    match &cfg.kind {
        ExperimentKind::Simulate(p) => {
            let solver = p.solver.build(p.grid)?;
            let amplitude = p.initial.amplitude();
            let dt = solver.resolve_dt(amplitude);
            let steps = (solver.end_time / dt).ceil() as usize;
            out.push_str(&format!(
                "grid: n = {}, M = {}\nsteps: {} at dt = {dt:.3e} to T = {}\n",
                p.grid.dim(),
                p.grid.modes(),
                steps,
                solver.end_time
            ));
            out.push_str(&format!("memory: {}\n", mem(p.grid, 8 * p.grid.dim())));
            if let Some(path) = &p.constants_file {
                let prior = EstimateReport::read_json(path)?;
                if let Some(c0) = prior.c0 {
                    let window = c0 / (amplitude * amplitude);
                    if solver.end_time > window {
                        out.push_str(&format!(
                            "warning: end_time {} exceeds the measured existence window \
                             c0/|f|^2 = {window:.6e} (c0 = {c0:.6e} from {})\n",
                            solver.end_time,
                            path.display()
                        ));
                    } else {
                        out.push_str(&format!(
                            "within measured existence window c0/|f|^2 = {window:.6e}\n"
                        ));
                    }
                } else {
                    out.push_str("note: constants file has no c0 field\n");
                }
            }
        }
        ExperimentKind::GSystem(p) => {
            let solver = p.solver.build(p.grid)?;
            let dt = solver.resolve_dt(p.initial.amplitude());
            let steps = (solver.end_time / dt).ceil() as usize;
            let terms = p.g_terms.build(p.grid.dim())?;
            out.push_str(&format!(
                "grid: n = {}, M = {}\ng terms: {} (C_g bounds: {:?})\nsteps: {steps} at dt = {dt:.3e}\n",
                p.grid.dim(),
                p.grid.modes(),
                terms.len(),
                terms.iter().map(|t| t.c_g()).collect::<Vec<_>>()
            ));
            out.push_str(&format!("memory: {}\n", mem(p.grid, 8 * p.grid.dim())));
        }
        ExperimentKind::VerifyKernel(p) => {
            out.push_str(&format!(
                "dims: {:?}\nevaluations: {} points x {} times per dim, t in [{}, {}]\n",
                p.dims, p.x_points, p.t_points, p.t_min, p.t_max
            ));
        }
        ExperimentKind::VerifySemigroup(p) => {
            out.push_str(&format!(
                "grid: n = {}, M = {}\ntrials: {} (stability compares first {})\n\
                 j up to {}, t grid: {} points in [{:.1e}, {:.1e}]\n",
                p.grid.dim(),
                p.grid.modes(),
                p.trials,
                p.trials / 2,
                p.j_max,
                p.t_points,
                p.t_min,
                p.t_max
            ));
            out.push_str(&format!("memory: {}\n", mem(p.grid, 4 * p.grid.dim())));
        }
        ExperimentKind::VerifyEstimates(p) => {
            out.push_str(&format!(
                "grid: n = {}, M = {}\nforced trials: {}\nsimulations: {} amplitudes x {} seeds = {}\n\
                 each run to T = c0/A^2 with c0 = 1/(16 C^4) from the forced measurement\n",
                p.grid.dim(),
                p.grid.modes(),
                p.forced_trials,
                p.amplitudes.len(),
                p.seeds.len(),
                p.amplitudes.len() * p.seeds.len()
            ));
            out.push_str(&format!("memory: {}\n", mem(p.grid, 8 * p.grid.dim())));
        }
        ExperimentKind::ScalingCheck(p) => {
            let fine = p.grid.modes() * p.lambda as usize;
            out.push_str(&format!(
                "base grid M = {}, refined grid M = {fine}, lambda = {}\n\
                 base run: {} steps at dt = {:.3e}; refined run: {} steps at dt = {:.3e}\n",
                p.grid.modes(),
                p.lambda,
                (p.end_time / p.dt).ceil() as usize,
                p.dt,
                (p.end_time / p.dt).ceil() as usize,
                p.dt / (p.lambda * p.lambda) as f64
            ));
        }
        ExperimentKind::PicardCrosscheck(p) => {
            out.push_str(&format!(
                "grid: n = {}, M = {}\npicard: t = {}, {} iterations, {} nodes\n\
                 residual cadences: {:?} on T = {}\n",
                p.grid.dim(),
                p.grid.modes(),
                p.t,
                p.iterations,
                p.quadrature_nodes,
                p.residual_cadences,
                p.residual_end_time
            ));
        }
    }
    Ok(out)
}
