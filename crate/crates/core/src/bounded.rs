//! Recovery of `A` inside the grid box from `a = curl A`, `f = div A` and the
//! boundary trace of `A`, by solving `-lap A = curl a - grad f` componentwise
//! with Dirichlet data.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid3, ScalarField, VectorField};
use crate::ops::{curl, grad};

/// Values of a vector field on the outermost node shell, one entry per
/// boundary node in x-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    grid: Grid3,
    values: Vec<[f64; 3]>,
}

/// Flat indices of the boundary nodes of `grid`, in x-fastest order.
pub fn boundary_indices(grid: &Grid3) -> Vec<usize> {
    (0..grid.len()).filter(|&idx| grid.is_boundary(grid.node_of(idx))).collect()
}

impl BoundaryTrace {
    pub fn new(grid: Grid3, values: Vec<[f64; 3]>) -> Result<Self> {
        let expected = boundary_indices(&grid).len();
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, found: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            let idx = boundary_indices(&grid)[pos];
            return Err(Error::NonFinite { node: grid.node_of(idx), position: grid.position(idx) });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }
}

/// Restriction of `a` to the boundary shell.
pub fn boundary_trace(a: &VectorField) -> BoundaryTrace {
    let grid = *a.grid();
    let values = boundary_indices(&grid).into_iter().map(|idx| a.values()[idx]).collect();
    BoundaryTrace { grid, values }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - A x||_2 / ||b||_2` of the final iterate.
    pub relative_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub field: VectorField,
    pub stats: [SolveStats; 3],
}

/// Solves the vector Dirichlet problem and returns the field, with boundary
/// nodes set exactly to `phi`.
pub fn dirichlet_reconstruct(a: &VectorField, f: &ScalarField, phi: &BoundaryTrace, tol: f64) -> Result<VectorField> {
    Ok(dirichlet_reconstruct_with_stats(a, f, phi, tol)?.field)
}

pub fn dirichlet_reconstruct_with_stats(
    a: &VectorField,
    f: &ScalarField,
    phi: &BoundaryTrace,
    tol: f64,
) -> Result<DirichletSolution> {
    let grid = *a.grid();
    grid.ensure_same(f.grid())?;
    grid.ensure_same(phi.grid())?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let rhs = curl(a)?.sub(&grad(f)?)?;
    let boundary = boundary_indices(&grid);
    let mut comps = Vec::with_capacity(3);
    let mut stats = [SolveStats { iterations: 0, relative_residual: 0.0 }; 3];
    for c in 0..3 {
        let mut full = vec![0.0; grid.len()];
        for (pos, &idx) in boundary.iter().enumerate() {
            full[idx] = phi.values[pos][c];
        }
        let source: Vec<f64> = rhs.values().iter().map(|v| v[c]).collect();
        let (solution, s) = solve_dirichlet_poisson(&grid, &source, &full, tol)?;
        stats[c] = s;
        comps.push(solution);
    }
    let values = (0..grid.len()).map(|i| [comps[0][i], comps[1][i], comps[2][i]]).collect();
    Ok(DirichletSolution { field: VectorField::new(grid, values)?, stats })
}

/// Interior unknowns of the 7-point problem `-lap_h u = source` with `u` fixed
/// to `dirichlet` on the boundary shell.
struct InteriorSystem {
    m: usize,
    inv_h2: f64,
}

impl InteriorSystem {
    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.m * (j + self.m * k)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        out.par_chunks_mut(m * m).enumerate().for_each(|(k, plane)| {
            for j in 0..m {
                for i in 0..m {
                    let p = self.idx(i, j, k);
                    let mut acc = 6.0 * x[p];
                    if i > 0 {
                        acc -= x[p - 1];
                    }
                    if i + 1 < m {
                        acc -= x[p + 1];
                    }
                    if j > 0 {
                        acc -= x[p - m];
                    }
                    if j + 1 < m {
                        acc -= x[p + m];
                    }
                    if k > 0 {
                        acc -= x[p - m * m];
                    }
                    if k + 1 < m {
                        acc -= x[p + m * m];
                    }
                    plane[i + m * j] = acc * self.inv_h2;
                }
            }
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves one scalar Dirichlet problem by Jacobi-preconditioned conjugate
/// gradients. `dirichlet` is a full node array of which only boundary entries
/// are read; the returned array carries them unchanged.
pub fn solve_dirichlet_poisson(
    grid: &Grid3,
    source: &[f64],
    dirichlet: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, SolveStats)> {
    grid.ensure_min_n(3)?;
    for arr in [source, dirichlet] {
        if arr.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: arr.len() });
        }
    }
    let n = grid.n();
    let m = n - 2;
    let h = grid.spacing();
    let sys = InteriorSystem { m, inv_h2: 1.0 / (h * h) };

    // Right-hand side: source plus the boundary couplings moved across.
    let mut b = vec![0.0; m * m * m];
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let (gi, gj, gk) = (i + 1, j + 1, k + 1);
                let mut v = source[grid.index(gi, gj, gk)];
                let neighbors = [
                    (gi - 1, gj, gk),
                    (gi + 1, gj, gk),
                    (gi, gj - 1, gk),
                    (gi, gj + 1, gk),
                    (gi, gj, gk - 1),
                    (gi, gj, gk + 1),
                ];
                for (a, bb, c) in neighbors {
                    if grid.is_boundary([a, bb, c]) {
                        v += dirichlet[grid.index(a, bb, c)] * sys.inv_h2;
                    }
                }
                b[sys.idx(i, j, k)] = v;
            }
        }
    }

    let b_norm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; b.len()];
    let mut stats = SolveStats { iterations: 0, relative_residual: 0.0 };
    if b_norm > 0.0 {
        let precond = 1.0 / (6.0 * sys.inv_h2);
        let mut r = b.clone();
        let mut z: Vec<f64> = r.iter().map(|v| v * precond).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; b.len()];
        let mut rz = dot(&r, &z);
        let max_iter = 10 * n * n * n;
        let mut converged = false;
        while stats.iterations < max_iter {
            sys.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
                *xi += alpha * pi;
                *ri -= alpha * api;
            }
            stats.iterations += 1;
            if dot(&r, &r).sqrt() <= tol * b_norm {
                converged = true;
                break;
            }
            for (zi, ri) in z.iter_mut().zip(&r) {
                *zi = ri * precond;
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        sys.apply(&x, &mut ap);
        let true_residual = b.iter().zip(&ap).map(|(bi, ai)| (bi - ai).powi(2)).sum::<f64>().sqrt();
        stats.relative_residual = true_residual / b_norm;
        if !converged {
            return Err(Error::NotConverged { iterations: stats.iterations, residual: stats.relative_residual });
        }
    }

    let mut out = dirichlet.to_vec();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                out[grid.index(i + 1, j + 1, k + 1)] = x[sys.idx(i, j, k)];
            }
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_node_count() {
        let g = Grid3::centered(5, 1.0).unwrap();
        assert_eq!(boundary_indices(&g).len(), 125 - 27);
    }

    #[test]
    fn trace_examples() {
        let g = Grid3::centered(5, 1.0).unwrap();
        assert!(boundary_trace(&VectorField::zeros(g)).values().iter().all(|v| *v == [0.0; 3]));
        let c = VectorField::sample(g, |_| [1.0, 2.0, 3.0]).unwrap();
        assert!(boundary_trace(&c).values().iter().all(|v| *v == [1.0, 2.0, 3.0]));
        let a = VectorField::sample(g, |x| [x[0], x[1] * x[2], 1.0]).unwrap();
        let t = boundary_trace(&a);
        for (pos, idx) in boundary_indices(&g).into_iter().enumerate() {
            let x = g.position(idx);
            assert_eq!(t.values()[pos], [x[0], x[1] * x[2], 1.0]);
        }
    }

    #[test]
    fn trace_length_is_checked() {
        let g = Grid3::centered(4, 1.0).unwrap();
        assert!(matches!(BoundaryTrace::new(g, vec![[0.0; 3]; 3]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn homogeneous_problem_gives_zero() {
        let g = Grid3::centered(9, 1.0).unwrap();
        let a = VectorField::zeros(g);
        let f = ScalarField::zeros(g);
        let phi = boundary_trace(&a);
        let sol = dirichlet_reconstruct(&a, &f, &phi, 1e-10).unwrap();
        assert_eq!(sol.max_norm(), 0.0);
    }

    #[test]
    fn quadratic_manufactured_solution() {
        // A* = (x1, x2^2, 0): curl A* = 0, div A* = 1 + 2 x2, -lap A* = (0, -2, 0).
        let g = Grid3::centered(9, 1.0).unwrap();
        let exact = VectorField::sample(g, |x| [x[0], x[1] * x[1], 0.0]).unwrap();
        let a = VectorField::zeros(g);
        let f = ScalarField::sample(g, |x| 1.0 + 2.0 * x[1]).unwrap();
        let rhs = curl(&a).unwrap().sub(&grad(&f).unwrap()).unwrap();
        assert!(rhs.values().iter().all(|v| v[0] == 0.0 && (v[1] + 2.0).abs() < 1e-12 && v[2] == 0.0));
        let sol = dirichlet_reconstruct(&a, &f, &boundary_trace(&exact), 1e-12).unwrap();
        assert!(sol.sub(&exact).unwrap().max_norm() < 1e-9);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let g = Grid3::centered(5, 1.0).unwrap();
        let a = VectorField::zeros(g);
        let r = dirichlet_reconstruct(&a, &ScalarField::zeros(g), &boundary_trace(&a), 0.0);
        assert!(r.is_err());
    }
}
