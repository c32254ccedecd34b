//! Gauss-Legendre and Gauss-Jacobi rules (Golub-Welsch on the symmetric
//! Jacobi matrix), composite Simpson weights, and the singular product
//! integral `∫_0^t (t-s)^{-1/2} s^{-1/2} g(s) ds` handled at the endpoints
//! by Jacobi weights.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use statrs::function::gamma::gamma;

/// Nodes and weights of a quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Integrate a smooth integrand over `[a, b]` (weight already absorbed
    /// for the Jacobi rules; see [`gauss_jacobi`]).
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Gauss-Jacobi rule for `∫_{-1}^{1} (1-x)^α (1+x)^β f(x) dx`.
///
/// Nodes are the eigenvalues of the symmetric Jacobi matrix of the
/// three-term recurrence; weights come from the first eigenvector
/// components scaled by `μ₀ = 2^{α+β+1} Γ(α+1)Γ(β+1)/Γ(α+β+2)`.
pub fn gauss_jacobi(degree: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    if degree < 2 {
        return Err(Error::InvalidParameter(
            "quadrature degree must be >= 2".into(),
        ));
    }
    if alpha <= -1.0 || beta <= -1.0 {
        return Err(Error::InvalidParameter(
            "Jacobi exponents must exceed -1".into(),
        ));
    }

    let s = alpha + beta;
    let diag = |i: usize| -> f64 {
        if i == 0 {
            if s + 2.0 == 0.0 {
                0.0
            } else {
                (beta - alpha) / (s + 2.0)
            }
        } else {
            let d = 2.0 * i as f64 + s;
            (beta * beta - alpha * alpha) / (d * (d + 2.0))
        }
    };
    let offdiag_sq = |i: usize| -> f64 {
        let fi = i as f64;
        if i == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + s) * (2.0 + s) * (3.0 + s))
        } else {
            let d = 2.0 * fi + s;
            4.0 * fi * (fi + alpha) * (fi + beta) * (fi + s) / (d * d * (d + 1.0) * (d - 1.0))
        }
    };

    let mut m = DMatrix::<f64>::zeros(degree, degree);
    for i in 0..degree {
        m[(i, i)] = diag(i);
        if i + 1 < degree {
            let b = offdiag_sq(i + 1).sqrt();
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
    }

    let eig = m.symmetric_eigen();
    let mu0 = 2f64.powf(s + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(s + 2.0);

    let mut pairs: Vec<(f64, f64)> = (0..degree)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Gauss-Legendre rule (`α = β = 0`).
pub fn gauss_legendre(degree: usize) -> Result<QuadratureRule> {
    gauss_jacobi(degree, 0.0, 0.0)
}

/// `∫_0^t (t-s)^{-1/2} s^{-1/2} g(s) ds` with both endpoint singularities
/// absorbed into Gauss-Jacobi(-1/2, -1/2) weights; substituting
/// `s = t(1+x)/2` makes the weight factors cancel the `t`-dependence
/// entirely, so `g ≡ 1` integrates to exactly `μ₀ = π`.
pub fn singular_product_integral(
    t: f64,
    degree: usize,
    mut g: impl FnMut(f64) -> f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let rule = gauss_jacobi(degree, -0.5, -0.5)?;
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * g(t * 0.5 * (1.0 + x)))
        .sum())
}

/// Composite Simpson weights for `count` equispaced samples spanning
/// `count - 1` intervals of width `h`; `count` must be odd and >= 3.
pub fn simpson_weights(count: usize, h: f64) -> Result<Vec<f64>> {
    if count < 3 || count % 2 == 0 {
        return Err(Error::InsufficientSamples(format!(
            "composite Simpson needs an odd sample count >= 3, got {count}"
        )));
    }
    let mut w = vec![0.0; count];
    w[0] = 1.0;
    w[count - 1] = 1.0;
    for (i, wi) in w.iter_mut().enumerate().take(count - 1).skip(1) {
        *wi = if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    for wi in &mut w {
        *wi *= h / 3.0;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(6).unwrap();
        // Degree-11 polynomial is exact for a 6-point rule.
        let got = rule.integrate(0.0, 2.0, |x| x.powi(11) - 3.0 * x.powi(4) + 1.0);
        let want = 2f64.powi(12) / 12.0 - 3.0 * 2f64.powi(5) / 5.0 + 2.0;
        assert_relative_eq!(got, want, max_relative = 1e-13);
        let sum: f64 = rule.weights.iter().sum();
        assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn chebyshev_case_matches_closed_form() {
        // Jacobi(-1/2,-1/2) is Gauss-Chebyshev: x_i = cos((2i-1)π/2Q),
        // w_i = π/Q.
        let q = 9;
        let rule = gauss_jacobi(q, -0.5, -0.5).unwrap();
        let mut expect: Vec<f64> = (1..=q)
            .map(|i| ((2 * i - 1) as f64 * PI / (2.0 * q as f64)).cos())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in rule.nodes.iter().zip(&expect) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        for w in &rule.weights {
            assert_abs_diff_eq!(*w, PI / q as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_identity_integrates_to_pi() {
        for t in [0.1, 1.0, 7.5] {
            let v = singular_product_integral(t, 8, |_| 1.0).unwrap();
            assert_abs_diff_eq!(v, PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_integral_with_smooth_factor() {
        // ∫_0^1 (1-s)^{-1/2} s^{-1/2} s ds = π/2 by symmetry.
        let v = singular_product_integral(1.0, 12, |s| s).unwrap();
        assert_abs_diff_eq!(v, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn simpson_weights_integrate_cubics_exactly() {
        let h = 0.25;
        let w = simpson_weights(9, h).unwrap();
        let got: f64 = (0..9)
            .map(|i| {
                let x = i as f64 * h;
                w[i] * (x.powi(3) - x + 2.0)
            })
            .sum();
        let b = 2.0f64;
        let want = b.powi(4) / 4.0 - b * b / 2.0 + 2.0 * b;
        assert_relative_eq!(got, want, max_relative = 1e-14);
        assert!(simpson_weights(4, h).is_err());
        assert!(simpson_weights(1, h).is_err());
    }
}
