//! Recovery of a decaying field `A` from `a = curl A` and `f = div A`.
//!
//! Since `-lap A = curl curl A - grad div A`, the field is the Newtonian
//! potential of `curl a - grad f`. The alternative form moves the derivatives
//! outside the potential: `A = curl N[a] - grad N[f]`.

use crate::error::Result;
use crate::grid::{DecayRequirement, ScalarField, VectorField};
use crate::ops::{curl, div, grad, vector_laplacian};
use crate::poisson::{newtonian_potential_vec_with, potential, Backend};

/// `N[curl a - grad f]`, derivatives inside the integral.
///
/// Tagged inputs are validated against `requirement` first.
pub fn reconstruct_from_curl_div(
    a: &VectorField,
    f: &ScalarField,
    backend: Backend,
    requirement: DecayRequirement,
) -> Result<VectorField> {
    a.grid().ensure_same(f.grid())?;
    requirement.validate_vector(a)?;
    requirement.validate_scalar(f)?;
    let source = curl(a)?.sub(&grad(f)?)?;
    newtonian_potential_vec_with(&source, backend, DecayRequirement::Waived)
}

/// `curl N[a] - grad N[f]`, derivatives applied to the potentials.
pub fn reconstruct_alternative(
    a: &VectorField,
    f: &ScalarField,
    backend: Backend,
    requirement: DecayRequirement,
) -> Result<VectorField> {
    a.grid().ensure_same(f.grid())?;
    requirement.validate_vector(a)?;
    requirement.validate_scalar(f)?;
    let vector_potential = newtonian_potential_vec_with(a, backend, DecayRequirement::Waived)?;
    let grid = *f.grid();
    let scalar_potential = ScalarField::from_raw(grid, potential(f.values(), &grid, backend));
    curl(&vector_potential)?.sub(&grad(&scalar_potential)?)
}

/// Diagnostics for the difference `d = A1 - A2` of two candidate fields.
///
/// Two fields with equal curl and divergence differ by a harmonic field; if
/// that difference also vanishes on the outer shell it must vanish inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessReport {
    /// `max |curl d|` over interior nodes.
    pub curl_inf: f64,
    /// `max |div d|` over interior nodes.
    pub div_inf: f64,
    /// `max |lap d|` over interior nodes.
    pub laplacian_inf: f64,
    /// `max |d|` on the outermost node shell.
    pub boundary_inf: f64,
    /// `max |d|` over all nodes.
    pub difference_inf: f64,
}

impl UniquenessReport {
    /// Curl and divergence agree within `tol` but the fields still differ on
    /// the boundary shell: a harmonic difference that does not decay.
    pub fn flags_nondecaying_difference(&self, tol: f64) -> bool {
        self.curl_inf <= tol && self.div_inf <= tol && self.boundary_inf > tol
    }

    /// The maximum principle conclusion: equal data and a small boundary
    /// difference give a small difference everywhere.
    pub fn consistent_within(&self, tol: f64) -> bool {
        self.difference_inf <= tol
    }
}

pub fn uniqueness_residual(a1: &VectorField, a2: &VectorField) -> Result<UniquenessReport> {
    let d = a1.sub(a2)?;
    let divergence = div(&d)?;
    let grid = *d.grid();
    let div_inf = divergence
        .values()
        .iter()
        .enumerate()
        .filter(|(idx, _)| grid.is_interior(grid.node_of(*idx), 1))
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    Ok(UniquenessReport {
        curl_inf: curl(&d)?.max_norm_interior(1),
        div_inf,
        laplacian_inf: vector_laplacian(&d)?.max_norm_interior(1),
        boundary_inf: d.max_norm_boundary(),
        difference_inf: d.max_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DecayClass, Grid3};

    #[test]
    fn zero_data_reconstructs_zero() {
        let g = Grid3::centered(9, 2.0).unwrap();
        let a = VectorField::zeros(g);
        let f = ScalarField::zeros(g);
        for backend in [Backend::Direct, Backend::FftConv] {
            let r = reconstruct_from_curl_div(&a, &f, backend, DecayRequirement::Pointwise).unwrap();
            assert_eq!(r.max_norm(), 0.0);
            let r = reconstruct_alternative(&a, &f, backend, DecayRequirement::Pointwise).unwrap();
            assert_eq!(r.max_norm(), 0.0);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = VectorField::zeros(Grid3::centered(9, 2.0).unwrap());
        let f = ScalarField::zeros(Grid3::centered(9, 3.0).unwrap());
        assert!(reconstruct_from_curl_div(&a, &f, Backend::FftConv, DecayRequirement::Pointwise).is_err());
    }

    #[test]
    fn slow_decay_needs_waiver() {
        let g = Grid3::centered(9, 2.0).unwrap();
        let a = VectorField::zeros(g).with_decay(Some(DecayClass::new(2.5, 1.0).unwrap()));
        let f = ScalarField::zeros(g);
        let err = reconstruct_from_curl_div(&a, &f, Backend::FftConv, DecayRequirement::Pointwise).unwrap_err();
        assert!(err.is_decay_violation());
        assert!(reconstruct_from_curl_div(&a, &f, Backend::FftConv, DecayRequirement::Waived).is_ok());
    }

    #[test]
    fn identical_fields_have_zero_residual() {
        let g = Grid3::centered(7, 1.0).unwrap();
        let a = VectorField::sample(g, |x| [x[1] * x[2], x[0].sin(), 1.0]).unwrap();
        let r = uniqueness_residual(&a, &a).unwrap();
        assert_eq!(
            r,
            UniquenessReport {
                curl_inf: 0.0,
                div_inf: 0.0,
                laplacian_inf: 0.0,
                boundary_inf: 0.0,
                difference_inf: 0.0
            }
        );
    }

    #[test]
    fn constant_offset_is_flagged() {
        let g = Grid3::centered(9, 2.0).unwrap();
        let a = VectorField::sample(g, |x| [(-x[0] * x[0]).exp(), x[2], 0.0]).unwrap();
        let c = [0.3, -0.4, 1.2];
        let b = VectorField::sample(g, |x| {
            let v = [(-x[0] * x[0]).exp(), x[2], 0.0];
            [v[0] + c[0], v[1] + c[1], v[2] + c[2]]
        })
        .unwrap();
        let r = uniqueness_residual(&a, &b).unwrap();
        assert!(r.curl_inf < 1e-12 && r.div_inf < 1e-12);
        assert!((r.boundary_inf - 1.3).abs() < 1e-12);
        assert!(r.flags_nondecaying_difference(1e-9));
    }
}
