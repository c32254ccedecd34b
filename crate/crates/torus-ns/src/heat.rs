//! The periodic heat semigroup `e^{tΔ}` and point evaluation of the periodic
//! heat kernel `θ(x,t)` in its two representations:
//!
//! * spectral: `θ(x,t) = Σ_{k ∈ Z^n} e^{-|k|² t} e^{i k·x}`, fast for large t;
//! * Poisson-summed image sum: `θ(x,t) = Σ_{k ∈ Z^n} (π/t)^{n/2}
//!   exp(-|x + 2πk|² / (4t))`, fast for small t.
//!
//! Both sums are truncated to the box `|k|_∞ ≤ R` and evaluated through the
//! per-axis product factorization (the box sum of a separable summand is the
//! product of 1-D sums). A rigorous bound on the discarded tail is returned
//! with every value.

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Apply `e^{tΔ}`: every coefficient is multiplied by `e^{-|k|² t}`.
///
/// `t = 0` is the identity; negative `t` (backward heat flow) is rejected.
pub fn apply_heat_semigroup(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "heat semigroup needs t >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let grid = f.grid();
    let mut out = f.clone();
    let coeffs = out.coeffs_mut();
    grid.for_each_mode(|flat, k| {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        coeffs[flat] *= (-k2 * t).exp();
    });
    Ok(out)
}

pub fn apply_heat_semigroup_vector(u: &VectorField, t: f64) -> Result<VectorField> {
    let components = u
        .components()
        .iter()
        .map(|c| apply_heat_semigroup(c, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField::new(components).expect("components share grid"))
}

/// Which kernel representation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelRepresentation {
    Spectral,
    Poisson,
    /// Poisson form below `crossover_time`, spectral form above, with the
    /// truncation radius grown until the tail bound drops below 1e-14.
    Auto,
}

/// Truncation and representation choices for kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelEvalConfig {
    pub truncation_radius: u32,
    pub representation: KernelRepresentation,
    pub crossover_time: f64,
}

impl Default for KernelEvalConfig {
    fn default() -> Self {
        Self {
            truncation_radius: 20,
            representation: KernelRepresentation::Auto,
            crossover_time: 0.5,
        }
    }
}

impl KernelEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation_radius < 1 {
            return Err(Error::InvalidParameter(
                "truncation_radius must be >= 1".into(),
            ));
        }
        if !(self.crossover_time > 0.0) {
            return Err(Error::InvalidParameter(
                "crossover_time must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A kernel value together with a rigorous upper bound on the truncation
/// tail that was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
}

const AUTO_TAIL_TARGET: f64 = 1e-14;
const MAX_AUTO_RADIUS: u32 = 4096;

fn check_kernel_args(x: &[f64], t: f64) -> Result<usize> {
    let n = x.len();
    if !(1..=3).contains(&n) {
        return Err(Error::BadDimension(n));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "heat kernel needs t > 0, got {t}"
        )));
    }
    Ok(n)
}

/// Lattice shell size `#{k : |k|_∞ = r}` in dimension `n`.
fn shell_count(n: usize, r: u32) -> f64 {
    let big = (2 * r + 1) as f64;
    let small = (2 * r - 1) as f64;
    big.powi(n as i32) - small.powi(n as i32)
}

/// Tail of the spectral sum beyond radius `R`:
/// every shell-`r` term is at most `e^{-r² t}` since `|k| ≥ |k|_∞`.
fn spectral_tail_bound(n: usize, big_r: u32, t: f64) -> f64 {
    let mut tail = 0.0;
    let mut r = big_r + 1;
    loop {
        let term = shell_count(n, r) * (-(r as f64) * (r as f64) * t).exp();
        tail += term;
        if term < 1e-300 || r > big_r + 100_000 {
            return tail;
        }
        r += 1;
    }
}

/// Tail of the image sum beyond radius `R` for `x` reduced to `[-π, π]^n`:
/// an image at shell `r` has `|x + 2πk| ≥ π(2r - 1)`.
fn poisson_tail_bound(n: usize, big_r: u32, t: f64) -> f64 {
    let prefactor = (PI / t).powf(n as f64 / 2.0);
    let mut tail = 0.0;
    let mut r = big_r + 1;
    loop {
        let d = PI * (2.0 * r as f64 - 1.0);
        let term = shell_count(n, r) * (-d * d / (4.0 * t)).exp();
        tail += term;
        if prefactor * term < 1e-300 || r > big_r + 100_000 {
            return prefactor * tail;
        }
        r += 1;
    }
}

fn smallest_radius(target: f64, tail: impl Fn(u32) -> f64) -> u32 {
    let mut r = 1;
    while r < MAX_AUTO_RADIUS {
        if tail(r) < target {
            return r;
        }
        r += 1;
    }
    MAX_AUTO_RADIUS
}

/// Spectral (Fourier-series) evaluation of `θ(x,t)`, truncated to
/// `|k|_∞ ≤ radius`; evaluated as the product of 1-D sums.
fn spectral_value(x: &[f64], t: f64, radius: u32) -> f64 {
    let mut product = 1.0;
    for &xi in x {
        let mut axis = 1.0;
        for k in 1..=radius {
            let kf = k as f64;
            axis += 2.0 * (-kf * kf * t).exp() * (kf * xi).cos();
        }
        product *= axis;
    }
    product
}

/// Image-sum (Poisson summation) evaluation with the corrected prefactor
/// `(π/t)^{n/2}`, truncated to images `|k|_∞ ≤ radius`.
fn poisson_value(x: &[f64], t: f64, radius: u32) -> f64 {
    let mut product = 1.0;
    for &xi in x {
        // Reduce to [-π, π]; the image sum is 2π-periodic.
        let xr = xi - 2.0 * PI * (xi / (2.0 * PI)).round();
        let mut axis = 0.0;
        for k in -(radius as i64)..=(radius as i64) {
            let d = xr + 2.0 * PI * k as f64;
            axis += (PI / t).sqrt() * (-d * d / (4.0 * t)).exp();
        }
        product *= axis;
    }
    product
}

/// `θ(x,t)` by the spectral representation of the configured radius.
pub fn heat_kernel_spectral(x: &[f64], t: f64, cfg: &KernelEvalConfig) -> Result<KernelValue> {
    let n = check_kernel_args(x, t)?;
    cfg.validate()?;
    let radius = match cfg.representation {
        KernelRepresentation::Auto => {
            smallest_radius(AUTO_TAIL_TARGET, |r| spectral_tail_bound(n, r, t))
        }
        _ => cfg.truncation_radius,
    };
    Ok(KernelValue {
        value: spectral_value(x, t, radius),
        tail_bound: spectral_tail_bound(n, radius, t),
    })
}

/// `θ(x,t)` by the Gaussian image sum of the configured radius.
pub fn heat_kernel_poisson(x: &[f64], t: f64, cfg: &KernelEvalConfig) -> Result<KernelValue> {
    let n = check_kernel_args(x, t)?;
    cfg.validate()?;
    let radius = match cfg.representation {
        KernelRepresentation::Auto => {
            smallest_radius(AUTO_TAIL_TARGET, |r| poisson_tail_bound(n, r, t))
        }
        _ => cfg.truncation_radius,
    };
    Ok(KernelValue {
        value: poisson_value(x, t, radius),
        tail_bound: poisson_tail_bound(n, radius, t),
    })
}

/// Evaluate `θ(x,t)` with the representation picked by the config: in `Auto`
/// mode the Poisson form is used below the crossover time and the spectral
/// form above it, each with an automatically grown radius.
pub fn heat_kernel(x: &[f64], t: f64, cfg: &KernelEvalConfig) -> Result<KernelValue> {
    match cfg.representation {
        KernelRepresentation::Spectral => heat_kernel_spectral(x, t, cfg),
        KernelRepresentation::Poisson => heat_kernel_poisson(x, t, cfg),
        KernelRepresentation::Auto => {
            if t < cfg.crossover_time {
                heat_kernel_poisson(x, t, cfg)
            } else {
                heat_kernel_spectral(x, t, cfg)
            }
        }
    }
}
