//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite and
//! semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances for [`integrate`]; converged when `error <= max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Piece> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fl, fr) = if x == 0.0 {
            let v = f(center);
            (v, 0.0)
        } else {
            (f(center - half * x), f(center + half * x))
        };
        if !(fl.is_finite() && fr.is_finite()) {
            return Err(Error::Domain(format!("integrand is not finite on [{a}, {b}]")));
        }
        kronrod += w * (fl + fr);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (fl + fr);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Piece { a, b, value, error })
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    while error > tol.abs_tol.max(tol.rel_tol * value.abs()) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::Domain(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {value}, error {error:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error })
}

/// Integrates `f` over `[a, inf)` through the map `r = a + t / (1 - t)`.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, tol: Tolerance) -> Result<Estimate> {
    integrate(
        |t| {
            let s = 1.0 - t;
            f(a + t / s) / (s * s)
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x.powi(5) - 2.0 * x * x, -1.0, 2.0, Tolerance::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - 2.0 * (8.0 + 1.0) / 3.0;
        assert!((est.value - exact).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let est = integrate(|x| x.sin(), 0.0, 10.0 * PI, Tolerance::default()).unwrap();
        assert!(est.value.abs() < 1e-10);
        let est = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::default()).unwrap();
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((est.value - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn semi_infinite() {
        let est = integrate_to_infinity(|x| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-10);
        let est = integrate_to_infinity(|x| 1.0 / (1.0 + x).powi(4), 1.0, Tolerance::default()).unwrap();
        assert!((est.value - 1.0 / 24.0).abs() < 1e-11);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, Tolerance::default()).is_err());
    }
}
