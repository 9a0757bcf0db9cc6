//! Helmholtz-Hodge split `A = grad u + B` with `u = -N[div A]` and
//! `B = curl N[curl A]`, plus runtime diagnostics for the identities the
//! split is supposed to satisfy.

use serde::Serialize;

use crate::error::Result;
use crate::grid::{DecayRequirement, ScalarField, VectorField};
use crate::ops::{curl, div, dot_integral, grad};
use crate::poisson::{newtonian_potential_vec_with, newtonian_potential_with, Backend};

/// Keeps the normalized orthogonality finite when either part vanishes.
const NORM_GUARD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `|integral grad u . B| / (||grad u|| ||B|| + guard)`.
    pub orthogonality: f64,
    /// Interior sup-norm of `div B`.
    #[serde(rename = "div_B_inf")]
    pub div_b_inf: f64,
    /// Interior sup-norm of `curl grad u`.
    pub curl_gradu_inf: f64,
    /// `||grad u + B - A|| / ||A||`.
    pub recomposition_rel_l2: f64,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub u: ScalarField,
    pub b: VectorField,
    pub grad_u: VectorField,
    pub diagnostics: Diagnostics,
}

fn interior_max_abs(field: &ScalarField, margin: usize) -> f64 {
    let grid = field.grid();
    field
        .values()
        .iter()
        .enumerate()
        .filter(|(idx, _)| grid.is_interior(grid.node_of(*idx), margin))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// Splits `a` into gradient and solenoidal parts.
///
/// A tagged input is validated against `requirement`; use
/// [`DecayRequirement::Weighted`] for the gamma > 2 hypothesis and
/// [`DecayRequirement::Pointwise`] for strict mode.
pub fn decompose(a: &VectorField, backend: Backend, requirement: DecayRequirement) -> Result<DecompositionResult> {
    requirement.validate_vector(a)?;
    let divergence = div(a)?;
    let vorticity = curl(a)?;
    let u = newtonian_potential_with(&divergence, backend, DecayRequirement::Waived)?.scale(-1.0);
    let vector_potential = newtonian_potential_vec_with(&vorticity, backend, DecayRequirement::Waived)?;
    let b = curl(&vector_potential)?;
    let grad_u = grad(&u)?;

    let a_norm = a.l2_norm();
    let recomposition_rel_l2 =
        if a_norm > 0.0 { grad_u.add(&b)?.sub(a)?.l2_norm() / a_norm } else { grad_u.add(&b)?.l2_norm() };
    let diagnostics = Diagnostics {
        orthogonality: dot_integral(&grad_u, &b)?.abs() / (grad_u.l2_norm() * b.l2_norm() + NORM_GUARD),
        div_b_inf: interior_max_abs(&div(&b)?, 1),
        curl_gradu_inf: curl(&grad_u)?.max_norm_interior(1),
        recomposition_rel_l2,
    };
    Ok(DecompositionResult { u, b, grad_u, diagnostics })
}

/// `integral grad u . curl p dx` over the grid cube; zero in the continuum
/// whenever `u` and `p` decay, because `e_jmq p_{q,mj} = 0`.
pub fn orthogonality_integral(u: &ScalarField, p: &VectorField) -> Result<f64> {
    u.grid().ensure_same(p.grid())?;
    dot_integral(&grad(u)?, &curl(p)?)
}
