//! Closed-form test fields with known curl, divergence and decay, plus
//! numerical evaluation of the decay integrals that control truncation of
//! the potential formulas.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{norm3, DecayClass, Grid3, ScalarField, VectorField};
use crate::quad::{self, Tolerance};

type VecFn = fn([f64; 3]) -> [f64; 3];
type ScalarFn = fn([f64; 3]) -> f64;

/// A vector field together with its exact curl, divergence and decay bounds.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticField {
    pub name: &'static str,
    pub field: VecFn,
    pub curl: VecFn,
    pub div: ScalarFn,
    pub decay: DecayClass,
    pub curl_decay: DecayClass,
    pub div_decay: DecayClass,
    /// Exact Helmholtz-Hodge parts `(u, B)` with `A = grad u + B`, when known.
    pub potential: Option<ScalarFn>,
    pub solenoidal: Option<VecFn>,
}

impl AnalyticField {
    pub fn sample_field(&self, grid: Grid3) -> Result<VectorField> {
        Ok(VectorField::sample(grid, self.field)?.with_decay(Some(self.decay)))
    }

    pub fn sample_curl(&self, grid: Grid3) -> Result<VectorField> {
        Ok(VectorField::sample(grid, self.curl)?.with_decay(Some(self.curl_decay)))
    }

    pub fn sample_div(&self, grid: Grid3) -> Result<ScalarField> {
        Ok(ScalarField::sample(grid, self.div)?.with_decay(Some(self.div_decay)))
    }
}

#[inline]
fn gauss(x: [f64; 3]) -> f64 {
    (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()
}

// grad e^{-|x|^2}
fn gradient_field(x: [f64; 3]) -> [f64; 3] {
    let e = gauss(x);
    [-2.0 * x[0] * e, -2.0 * x[1] * e, -2.0 * x[2] * e]
}

fn zero_vector(_: [f64; 3]) -> [f64; 3] {
    [0.0; 3]
}

fn zero_scalar(_: [f64; 3]) -> f64 {
    0.0
}

fn gradient_div(x: [f64; 3]) -> f64 {
    (4.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) - 6.0) * gauss(x)
}

// curl(e^{-|x|^2} e_3)
fn solenoidal_field(x: [f64; 3]) -> [f64; 3] {
    let e = gauss(x);
    [-2.0 * x[1] * e, 2.0 * x[0] * e, 0.0]
}

fn solenoidal_curl(x: [f64; 3]) -> [f64; 3] {
    let e = gauss(x);
    [4.0 * x[0] * x[2] * e, 4.0 * x[1] * x[2] * e, (4.0 - 4.0 * x[0] * x[0] - 4.0 * x[1] * x[1]) * e]
}

fn mixed_field(x: [f64; 3]) -> [f64; 3] {
    let (g, s) = (gradient_field(x), solenoidal_field(x));
    [g[0] + s[0], g[1] + s[1], g[2] + s[2]]
}

// (1 + |x|^2)^{-1} e_1: only (1+|x|)^{-2} decay.
fn slow_field(x: [f64; 3]) -> [f64; 3] {
    [1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), 0.0, 0.0]
}

fn slow_curl(x: [f64; 3]) -> [f64; 3] {
    let q = 1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let q2 = q * q;
    [0.0, -2.0 * x[2] / q2, 2.0 * x[1] / q2]
}

fn slow_div(x: [f64; 3]) -> f64 {
    let q = 1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    -2.0 * x[0] / (q * q)
}

fn decay(gamma: f64, c: f64) -> DecayClass {
    DecayClass { gamma, c }
}

/// The test corpus, in order: gradient, solenoidal, mixed, slow-decay.
///
/// Decay constants for gamma = 4 come from maximizing `|v|(1+|x|)^4`:
/// about 13.44 for the first two fields, 19.01 for their sum, 23.54 for the
/// solenoidal curl and 20.95 for the gradient divergence, each rounded up.
pub fn corpus() -> Vec<AnalyticField> {
    vec![
        AnalyticField {
            name: "gradient",
            field: gradient_field,
            curl: zero_vector,
            div: gradient_div,
            decay: decay(4.0, 16.0),
            curl_decay: decay(4.0, 1.0),
            div_decay: decay(4.0, 24.0),
            potential: Some(gauss),
            solenoidal: Some(zero_vector),
        },
        AnalyticField {
            name: "solenoidal",
            field: solenoidal_field,
            curl: solenoidal_curl,
            div: zero_scalar,
            decay: decay(4.0, 16.0),
            curl_decay: decay(4.0, 28.0),
            div_decay: decay(4.0, 1.0),
            potential: Some(zero_scalar),
            solenoidal: Some(solenoidal_field),
        },
        AnalyticField {
            name: "mixed",
            field: mixed_field,
            curl: solenoidal_curl,
            div: gradient_div,
            decay: decay(4.0, 20.0),
            curl_decay: decay(4.0, 28.0),
            div_decay: decay(4.0, 24.0),
            potential: Some(gauss),
            solenoidal: Some(solenoidal_field),
        },
        AnalyticField {
            name: "slow-decay",
            field: slow_field,
            curl: slow_curl,
            div: slow_div,
            decay: decay(2.0, 2.0),
            curl_decay: decay(3.0, 5.0),
            div_decay: decay(3.0, 5.0),
            potential: None,
            solenoidal: None,
        },
    ]
}

/// Looks up a corpus field by name.
pub fn corpus_field(name: &str) -> Option<AnalyticField> {
    corpus().into_iter().find(|f| f.name == name)
}

const RADIAL_TOL: Tolerance = Tolerance { abs_tol: 1e-9, rel_tol: 1e-12, max_intervals: 5000 };

fn require_gamma_above(gamma: f64, threshold: f64, what: &str) -> Result<()> {
    if gamma.is_finite() && gamma > threshold {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} diverges unless gamma > {threshold}, got gamma = {gamma}")))
    }
}

fn require_positive(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {value}")))
    }
}

/// `integral over R^3 of dy / (|x - y| (1 + |y|)^gamma)` with `|x| = rho`.
///
/// Averaging `1/|x - y|` over the sphere `|y| = r` gives `1 / max(r, rho)`,
/// so the integral reduces to
/// `(4 pi / rho) integral_0^rho r^2 (1+r)^-gamma dr + 4 pi integral_rho^inf r (1+r)^-gamma dr`.
pub fn i1_integral(gamma: f64, rho: f64) -> Result<f64> {
    require_gamma_above(gamma, 3.0, "I1")?;
    require_positive(rho, "rho")?;
    let inner = quad::integrate(|r| r * r * (1.0 + r).powf(-gamma), 0.0, rho, RADIAL_TOL)?;
    let outer = quad::integrate_to_infinity(|r| r * (1.0 + r).powf(-gamma), rho, RADIAL_TOL)?;
    Ok(4.0 * PI * (inner.value / rho + outer.value))
}

/// Closed-form upper bound `2 pi / (rho (gamma - 3)) + 2 pi / (gamma - 2) rho^-(gamma - 2)`.
pub fn i1_bound(gamma: f64, rho: f64) -> Result<f64> {
    require_gamma_above(gamma, 3.0, "I1")?;
    require_positive(rho, "rho")?;
    Ok(2.0 * PI / (rho * (gamma - 3.0)) + 2.0 * PI / (gamma - 2.0) * rho.powf(-(gamma - 2.0)))
}

/// `integral_L^inf r (1+r)^-gamma dr`: the radial part of the truncation tail.
pub fn tail_integral(gamma: f64, half_width: f64) -> Result<f64> {
    require_gamma_above(gamma, 3.0, "truncation tail")?;
    require_positive(half_width, "L")?;
    Ok(quad::integrate_to_infinity(|r| r * (1.0 + r).powf(-gamma), half_width, RADIAL_TOL)?.value)
}

/// Upper bound on `|integral_{|y| > L} g(x, y) s(y) dy|` for any source with
/// `|s(y)| <= c (1+|y|)^-gamma`, valid for `|x| < L`.
///
/// The grid cube `[-L, L]^3` contains the ball of radius `L`, so this also
/// bounds the error of truncating the potential to the cube.
pub fn truncation_tail_estimate(decay: DecayClass, half_width: f64, x: [f64; 3]) -> Result<f64> {
    let r = norm3(x);
    if half_width <= r {
        return Err(Error::Domain(format!(
            "evaluation point |x| = {r} must lie inside the truncation radius {half_width}"
        )));
    }
    // For |y| = r > |x| the spherical mean of 1/(4 pi |x - y|) is 1/(4 pi r).
    Ok(decay.c * tail_integral(decay.gamma, half_width)?)
}

/// `integral over R^3 of dy / (|x - y|^2 (1 + |y|)^gamma)` with `|x| = rho`.
///
/// Only finiteness is asserted for gamma > 2. The spherical mean of
/// `|x - y|^-2` is `ln((r + rho)/|r - rho|) / (2 r rho)`, integrable at `r = rho`.
pub fn i2_integral(gamma: f64, rho: f64) -> Result<f64> {
    require_gamma_above(gamma, 2.0, "I2")?;
    require_positive(rho, "rho")?;
    let integrand = |r: f64| 2.0 * PI * r / rho * ((r + rho) / (r - rho).abs()).ln() * (1.0 + r).powf(-gamma);
    let inner = quad::integrate(integrand, 0.0, rho, RADIAL_TOL)?;
    let outer = quad::integrate_to_infinity(integrand, rho, RADIAL_TOL)?;
    Ok(inner.value + outer.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let c = corpus();
        assert_eq!(c.len(), 4);
        let names: Vec<_> = c.iter().map(|f| f.name).collect();
        assert_eq!(names, ["gradient", "solenoidal", "mixed", "slow-decay"]);
        assert!(c[..3].iter().all(|f| f.decay.gamma > 3.0));
        assert!(c[3].decay.gamma <= 3.0);
        assert!(corpus_field("mixed").is_some());
        assert!(corpus_field("nope").is_none());
    }

    #[test]
    fn gradient_field_is_curl_free_and_solenoidal_is_div_free() {
        let c = corpus();
        let pts = [[0.3, -0.2, 1.1], [-1.0, 0.5, 0.25], [2.0, 2.0, -1.0]];
        for x in pts {
            assert_eq!((c[0].curl)(x), [0.0; 3]);
            assert_eq!((c[1].div)(x), 0.0);
            assert_eq!((c[2].div)(x), (c[0].div)(x));
            assert_eq!((c[2].curl)(x), (c[1].curl)(x));
        }
    }

    #[test]
    fn bound_substitutions() {
        assert!((i1_bound(4.0, 2.0).unwrap() - (PI + PI / 4.0)).abs() < 1e-12);
        assert!((i1_bound(4.0, 2.0).unwrap() - 3.9270).abs() < 1e-4);
        assert!((i1_bound(4.0, 1.0).unwrap() - 3.0 * PI).abs() < 1e-12);
        assert!((i1_bound(5.0, 2.0).unwrap() - (PI / 2.0 + PI / 12.0)).abs() < 1e-12);
    }

    #[test]
    fn gamma_three_is_rejected() {
        assert!(i1_integral(3.0, 1.0).is_err());
        assert!(i1_bound(3.0, 1.0).is_err());
        assert!(i1_integral(4.0, 0.0).is_err());
        assert!(tail_integral(2.5, 4.0).is_err());
        assert!(i2_integral(2.0, 1.0).is_err());
    }

    #[test]
    fn i1_closed_form_at_gamma_four() {
        // For gamma = 4, rho = 2 both radial integrals are elementary:
        // int_0^2 r^2/(1+r)^4 = 8/81 and int_2^inf r/(1+r)^4 = 7/162.
        let exact = 4.0 * PI * (8.0 / 81.0 / 2.0 + 7.0 / 162.0);
        assert!((i1_integral(4.0, 2.0).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn tail_needs_point_inside() {
        let d = DecayClass::new(4.0, 1.0).unwrap();
        assert!(truncation_tail_estimate(d, 2.0, [3.0, 0.0, 0.0]).is_err());
        assert!(truncation_tail_estimate(d, 2.0, [1.0, 0.0, 0.0]).unwrap() > 0.0);
    }
}
