//! Newtonian potential `N[s](x) = integral s(y) / (4 pi |x - y|) dy`, the free-space
//! inverse of `-Laplacian`, truncated to the grid cube.
//!
//! Both backends evaluate the same discrete sum `sum_y w(x - y) s(y) h^3`, where
//! `w` is the Green's function except on the singular cell, where it is replaced
//! by its exact average over the cube of side `h` around the singularity.
//! [`Backend::Direct`] sums node by node in O(N^2); [`Backend::FftConv`] does the
//! same sum as a zero-padded (aperiodic) convolution.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{DecayRequirement, Grid3, ScalarField, VectorField};
use crate::ops;
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Node-by-node singular quadrature; the reference for small grids.
    Direct,
    /// Zero-padded FFT convolution with the tabulated kernel.
    #[default]
    FftConv,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Backend::Direct),
            "fft-conv" => Ok(Backend::FftConv),
            other => Err(Error::Domain(format!("unknown backend '{other}' (expected 'direct' or 'fft-conv')"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Direct => "direct",
            Backend::FftConv => "fft-conv",
        })
    }
}

/// `integral over [-1/2, 1/2]^3 of 1/|x| dx`.
///
/// Splitting the cube into six pyramids with apex at the origin and doing the
/// radial and one transverse integral in closed form leaves
/// `3 * integral_{-1/2}^{1/2} asinh(1 / (2 sqrt(1/4 + y^2))) dy`.
pub fn unit_cube_inverse_distance() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let tol = Tolerance { abs_tol: 1e-15, rel_tol: 1e-15, max_intervals: 4000 };
        let inner = |y: f64| (1.0 / (2.0 * (0.25 + y * y).sqrt())).asinh();
        3.0 * quad::integrate(inner, -0.5, 0.5, tol).expect("smooth integrand on a finite interval").value
    })
}

/// Quadrature weight (including `h^3`) for a source at lattice offset `d` (in nodes).
#[inline]
fn kernel_weight(d: [usize; 3], h: f64) -> f64 {
    let r2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64;
    if r2 == 0.0 {
        h * h * unit_cube_inverse_distance() / (4.0 * PI)
    } else {
        h * h / (4.0 * PI * r2.sqrt())
    }
}

/// Newtonian potential of `s`, enforcing the pointwise (gamma > 3) decay hypothesis on a tagged source.
pub fn newtonian_potential(s: &ScalarField, backend: Backend) -> Result<ScalarField> {
    newtonian_potential_with(s, backend, DecayRequirement::Pointwise)
}

pub fn newtonian_potential_with(
    s: &ScalarField,
    backend: Backend,
    requirement: DecayRequirement,
) -> Result<ScalarField> {
    requirement.validate_scalar(s)?;
    Ok(ScalarField::from_raw(*s.grid(), potential(s.values(), s.grid(), backend)))
}

/// Componentwise Newtonian potential.
pub fn newtonian_potential_vec(s: &VectorField, backend: Backend) -> Result<VectorField> {
    newtonian_potential_vec_with(s, backend, DecayRequirement::Pointwise)
}

pub fn newtonian_potential_vec_with(
    s: &VectorField,
    backend: Backend,
    requirement: DecayRequirement,
) -> Result<VectorField> {
    requirement.validate_vector(s)?;
    let grid = *s.grid();
    let comps = [0, 1, 2].map(|c| {
        let values: Vec<f64> = s.values().iter().map(|v| v[c]).collect();
        potential(&values, &grid, backend)
    });
    let values = (0..grid.len()).map(|i| [comps[0][i], comps[1][i], comps[2][i]]).collect();
    Ok(VectorField::from_raw(grid, values))
}

pub(crate) fn potential(values: &[f64], grid: &Grid3, backend: Backend) -> Vec<f64> {
    if values.iter().all(|&v| v == 0.0) {
        return vec![0.0; values.len()];
    }
    match backend {
        Backend::Direct => direct_potential(values, grid),
        Backend::FftConv => ConvolutionPlan::cached(grid).convolve(values),
    }
}

fn direct_potential(values: &[f64], grid: &Grid3) -> Vec<f64> {
    let n = grid.n();
    let h = grid.spacing();
    let mut table = vec![0.0; n * n * n];
    for (idx, w) in table.iter_mut().enumerate() {
        *w = kernel_weight(grid.node_of(idx), h);
    }
    let sources: Vec<([usize; 3], f64)> =
        values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(idx, &v)| (grid.node_of(idx), v)).collect();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = grid.node_of(idx);
            sources
                .iter()
                .map(|&(y, v)| {
                    let d = [x[0].abs_diff(y[0]), x[1].abs_diff(y[1]), x[2].abs_diff(y[2])];
                    table[d[0] + n * (d[1] + n * d[2])] * v
                })
                .sum()
        })
        .collect()
}

/// Precomputed spectrum of the lattice kernel on the `2n`-periodic padded grid.
struct ConvolutionPlan {
    n: usize,
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Kernel spectrum in the layout produced by [`ConvolutionPlan::forward`].
    spectrum: Vec<Complex64>,
}

impl ConvolutionPlan {
    fn cached(grid: &Grid3) -> Arc<ConvolutionPlan> {
        type Cache = Mutex<HashMap<(usize, u64), Arc<ConvolutionPlan>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (grid.n(), grid.spacing().to_bits());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(plan) = cache.lock().unwrap().get(&key) {
            return Arc::clone(plan);
        }
        let plan = Arc::new(ConvolutionPlan::new(grid.n(), grid.spacing()));
        cache.lock().unwrap().entry(key).or_insert(plan).clone()
    }

    fn new(n: usize, h: f64) -> Self {
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let ifft = planner.plan_fft_inverse(m);
        // Offsets 0..n-1 sit at the front of each axis, -(n-1)..-1 wrap to the back;
        // the slot at offset +-n is never reached by a cropped output and stays empty.
        let wrap = |c: usize| -> Option<usize> {
            match c.cmp(&n) {
                std::cmp::Ordering::Less => Some(c),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(m - c),
            }
        };
        let mut kernel = vec![Complex64::new(0.0, 0.0); m * m * m];
        for (idx, w) in kernel.iter_mut().enumerate() {
            let (i, j, k) = (idx % m, (idx / m) % m, idx / (m * m));
            if let (Some(a), Some(b), Some(c)) = (wrap(i), wrap(j), wrap(k)) {
                *w = Complex64::new(kernel_weight([a, b, c], h), 0.0);
            }
        }
        let mut plan = Self { n, m, fft, ifft, spectrum: Vec::new() };
        plan.spectrum = plan.forward(kernel);
        plan
    }

    fn convolve(&self, values: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut padded = vec![Complex64::new(0.0, 0.0); m * m * m];
        for (idx, &v) in values.iter().enumerate() {
            let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
            padded[i + m * (j + m * k)] = Complex64::new(v, 0.0);
        }
        let mut freq = self.forward(padded);
        freq.par_iter_mut().zip(self.spectrum.par_iter()).for_each(|(a, b)| *a *= b);
        let full = self.inverse(freq);
        let scale = 1.0 / (m * m * m) as f64;
        (0..n * n * n)
            .map(|idx| {
                let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
                full[i + m * (j + m * k)].re * scale
            })
            .collect()
    }

    fn transform_plane(&self, plane: &mut [Complex64], fft: &dyn Fft<f64>) {
        let m = self.m;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for line in plane.chunks_mut(m) {
            fft.process_with_scratch(line, &mut scratch);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = plane[i + m * j];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (j, b) in buf.iter().enumerate() {
                plane[i + m * j] = *b;
            }
        }
    }

    /// 3-D forward transform of x-fastest data; the result is z-fastest,
    /// indexed `k + m * (i + m * j)`.
    fn forward(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        let m = self.m;
        data.par_chunks_mut(m * m).for_each(|plane| self.transform_plane(plane, self.fft.as_ref()));
        let mut out = vec![Complex64::new(0.0, 0.0); m * m * m];
        out.par_chunks_mut(m).enumerate().for_each(|(line_idx, line)| {
            let (i, j) = (line_idx % m, line_idx / m);
            for (k, o) in line.iter_mut().enumerate() {
                *o = data[i + m * (j + m * k)];
            }
            self.fft.process(line);
        });
        out
    }

    /// Unnormalized inverse of [`ConvolutionPlan::forward`], back to x-fastest order.
    fn inverse(&self, mut freq: Vec<Complex64>) -> Vec<Complex64> {
        let m = self.m;
        freq.par_chunks_mut(m).for_each(|line| self.ifft.process(line));
        let mut out = vec![Complex64::new(0.0, 0.0); m * m * m];
        out.par_chunks_mut(m * m).enumerate().for_each(|(k, plane)| {
            for (local, o) in plane.iter_mut().enumerate() {
                let (i, j) = (local % m, local / m);
                *o = freq[k + m * (i + m * j)];
            }
            self.transform_plane(plane, self.ifft.as_ref());
        });
        out
    }
}

/// `max |-lap_h u - s|` over nodes at least two nodes from every face, divided
/// by `max |s|` (left unnormalized when `s` vanishes).
pub fn residual_laplacian(u: &ScalarField, s: &ScalarField) -> Result<f64> {
    u.grid().ensure_same(s.grid())?;
    let grid = *u.grid();
    let lap = ops::laplacian(u)?;
    let mut worst: f64 = 0.0;
    for idx in 0..grid.len() {
        if grid.is_interior(grid.node_of(idx), 2) {
            worst = worst.max((-lap.values()[idx] - s.values()[idx]).abs());
        }
    }
    let scale = s.max_abs();
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Richardson estimate of the direct backend's discretization error.
///
/// Recomputes the potential on the grid of every other node (spacing `2h`)
/// and returns `max |N_h - N_2h| / 3` over the shared nodes, the leading-order
/// error of an O(h^2) method at spacing `h`. Needs odd `n >= 5`.
pub fn direct_error_estimate(s: &ScalarField) -> Result<f64> {
    let grid = *s.grid();
    let n = grid.n();
    if n < 5 || n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("error estimate needs an odd node count >= 5, got {n}")));
    }
    let nc = n.div_ceil(2);
    let coarse = Grid3::new(grid.origin(), 2.0 * grid.spacing(), nc)?;
    let coarse_values: Vec<f64> = (0..coarse.len())
        .map(|idx| {
            let [i, j, k] = coarse.node_of(idx);
            s.values()[grid.index(2 * i, 2 * j, 2 * k)]
        })
        .collect();
    let fine = direct_potential(s.values(), &grid);
    let rough = direct_potential(&coarse_values, &coarse);
    let worst = (0..coarse.len())
        .map(|idx| {
            let [i, j, k] = coarse.node_of(idx);
            (fine[grid.index(2 * i, 2 * j, 2 * k)] - rough[idx]).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst / 3.0)
}
