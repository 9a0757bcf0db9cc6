//! Second-order finite-difference vector calculus on collocated grids.
//!
//! Interior nodes use centered differences; nodes on a face use the
//! second-order one-sided formula. With centered stencils the discrete
//! identities `curl grad = 0` and `div curl = 0` hold at interior nodes up to
//! rounding, because the mixed differences commute on the lattice.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid3, ScalarField, VectorField};

/// Totally antisymmetric symbol `e_{jmq}` with 1-based indices.
pub fn levi_civita(j: usize, m: usize, q: usize) -> Result<i8> {
    for idx in [j, m, q] {
        if !(1..=3).contains(&idx) {
            return Err(Error::IndexOutOfRange(idx));
        }
    }
    Ok(epsilon(j - 1, m - 1, q - 1))
}

/// 0-based variant of [`levi_civita`] for internal loops.
#[inline]
pub(crate) fn epsilon(j: usize, m: usize, q: usize) -> i8 {
    if j == m || m == q || j == q {
        return 0;
    }
    // (0,1,2), (1,2,0), (2,0,1) are the cyclic (even) orderings.
    if (m + 3 - j) % 3 == 1 {
        1
    } else {
        -1
    }
}

/// Cross product written through the Levi-Civita symbol.
#[allow(clippy::needless_range_loop)]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        for m in 0..3 {
            for q in 0..3 {
                let e = epsilon(j, m, q);
                if e != 0 {
                    *o += f64::from(e) * a[m] * b[q];
                }
            }
        }
    }
    out
}

#[inline]
fn stride(n: usize, axis: usize) -> usize {
    match axis {
        0 => 1,
        1 => n,
        _ => n * n,
    }
}

/// First derivative of node values along `axis`.
pub(crate) fn partial(values: &[f64], grid: &Grid3, axis: usize) -> Vec<f64> {
    let n = grid.n();
    let s = stride(n, axis);
    let inv2h = 0.5 / grid.spacing();
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(n * n).enumerate().for_each(|(k, plane)| {
        for (local, o) in plane.iter_mut().enumerate() {
            let idx = local + k * n * n;
            let c = [local % n, local / n, k][axis];
            *o = if c == 0 {
                (-3.0 * values[idx] + 4.0 * values[idx + s] - values[idx + 2 * s]) * inv2h
            } else if c == n - 1 {
                (3.0 * values[idx] - 4.0 * values[idx - s] + values[idx - 2 * s]) * inv2h
            } else {
                (values[idx + s] - values[idx - s]) * inv2h
            };
        }
    });
    out
}

/// Second derivative along `axis`; centered 3-point inside, one-sided at faces.
fn second_partial(values: &[f64], grid: &Grid3, axis: usize) -> Vec<f64> {
    let n = grid.n();
    let s = stride(n, axis);
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(n * n).enumerate().for_each(|(k, plane)| {
        for (local, o) in plane.iter_mut().enumerate() {
            let idx = local + k * n * n;
            let c = [local % n, local / n, k][axis];
            let v = |off: isize| values[(idx as isize + off * s as isize) as usize];
            *o = if c == 0 {
                if n >= 4 {
                    (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) * inv_h2
                } else {
                    (v(0) - 2.0 * v(1) + v(2)) * inv_h2
                }
            } else if c == n - 1 {
                if n >= 4 {
                    (2.0 * v(0) - 5.0 * v(-1) + 4.0 * v(-2) - v(-3)) * inv_h2
                } else {
                    (v(0) - 2.0 * v(-1) + v(-2)) * inv_h2
                }
            } else {
                (v(1) - 2.0 * v(0) + v(-1)) * inv_h2
            };
        }
    });
    out
}

fn components(a: &VectorField) -> [Vec<f64>; 3] {
    [0, 1, 2].map(|c| a.values().iter().map(|v| v[c]).collect())
}

fn interleave(grid: Grid3, comps: [Vec<f64>; 3]) -> VectorField {
    let values = (0..grid.len()).map(|i| [comps[0][i], comps[1][i], comps[2][i]]).collect();
    VectorField::from_raw(grid, values)
}

pub fn grad(u: &ScalarField) -> Result<VectorField> {
    let grid = *u.grid();
    grid.ensure_min_n(3)?;
    let comps = [0, 1, 2].map(|axis| partial(u.values(), &grid, axis));
    Ok(interleave(grid, comps))
}

pub fn div(a: &VectorField) -> Result<ScalarField> {
    let grid = *a.grid();
    grid.ensure_min_n(3)?;
    let comps = components(a);
    let mut out = vec![0.0; grid.len()];
    for (axis, comp) in comps.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(partial(comp, &grid, axis)) {
            *o += d;
        }
    }
    Ok(ScalarField::from_raw(grid, out))
}

/// `(curl A)_j = e_{jmq} d_m A_q`.
#[allow(clippy::needless_range_loop)]
pub fn curl(a: &VectorField) -> Result<VectorField> {
    let grid = *a.grid();
    grid.ensure_min_n(3)?;
    let comps = components(a);
    let mut out: [Vec<f64>; 3] = [0, 1, 2].map(|_| vec![0.0; grid.len()]);
    for m in 0..3 {
        for q in 0..3 {
            if m == q {
                continue;
            }
            let d = partial(&comps[q], &grid, m);
            for (j, o) in out.iter_mut().enumerate() {
                let e = epsilon(j, m, q);
                if e != 0 {
                    let e = f64::from(e);
                    o.iter_mut().zip(&d).for_each(|(o, d)| *o += e * d);
                }
            }
        }
    }
    Ok(interleave(grid, out))
}

/// 7-point Laplacian of a scalar field.
pub fn laplacian(u: &ScalarField) -> Result<ScalarField> {
    let grid = *u.grid();
    grid.ensure_min_n(3)?;
    let mut out = vec![0.0; grid.len()];
    for axis in 0..3 {
        for (o, d) in out.iter_mut().zip(second_partial(u.values(), &grid, axis)) {
            *o += d;
        }
    }
    Ok(ScalarField::from_raw(grid, out))
}

/// Componentwise 7-point Laplacian.
pub fn vector_laplacian(a: &VectorField) -> Result<VectorField> {
    let grid = *a.grid();
    grid.ensure_min_n(3)?;
    let comps = [0, 1, 2].map(|c| laplacian(&a.component(c)).map(ScalarField::into_values));
    let [x, y, z] = comps;
    Ok(interleave(grid, [x?, y?, z?]))
}

/// Trapezoidal approximation of `integral F . G dx` over the grid cube.
pub fn dot_integral(f: &VectorField, g: &VectorField) -> Result<f64> {
    let grid = *f.grid();
    grid.ensure_same(g.grid())?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .enumerate()
        .map(|(idx, (a, b))| grid.trapezoid_weight(idx) * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]))
        .sum())
}
