use std::f64::consts::PI;

use hhk_core::poisson::{direct_error_estimate, newtonian_potential, residual_laplacian};
use hhk_core::{Backend, Grid3, ScalarField};

fn gauss(x: [f64; 3]) -> f64 {
    (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()
}

fn radius(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Radial solution of `-(r^2 u')' / r^2 = exp(-r^2)` that decays at infinity:
/// `u(r) = (1/r) int_0^r t^2 e^{-t^2} dt + int_r^inf t e^{-t^2} dt`.
fn gaussian_potential_oracle(r: f64) -> f64 {
    let outer = 0.5 * (-r * r).exp();
    if r < 1e-12 {
        return outer;
    }
    outer + simpson(|t| t * t * (-t * t).exp(), 0.0, r, 2000) / r
}

#[test]
fn oracle_matches_erf_closed_form_at_one() {
    // (sqrt(pi)/4) erf(1)
    assert!((gaussian_potential_oracle(1.0) - 0.373_412_066_406_213_44).abs() < 1e-12);
}

fn gaussian_error(n: usize, half_width: f64, backend: Backend) -> f64 {
    let g = Grid3::centered(n, half_width).unwrap();
    let u = newtonian_potential(&ScalarField::sample(g, gauss).unwrap(), backend).unwrap();
    (0..g.len())
        .map(|idx| (u.values()[idx] - gaussian_potential_oracle(radius(g.position(idx)))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn gaussian_potential_matches_radial_oracle() {
    let coarse = gaussian_error(33, 4.0, Backend::FftConv);
    let fine = gaussian_error(65, 4.0, Backend::FftConv);
    assert!(fine < 1e-3, "sup error {fine}");
    let ratio = coarse / fine;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn direct_backend_matches_radial_oracle() {
    assert!(gaussian_error(17, 4.0, Backend::Direct) < 1e-2);
}

#[test]
fn residual_of_exact_and_computed_potentials() {
    let g = Grid3::centered(65, 8.0).unwrap();
    let h = g.spacing();
    let s = ScalarField::sample(g, gauss).unwrap();
    // Near the origin u = (1 - r^2/3 + r^4/10)/2 + ..., so the 7-point truncation
    // error (h^2/12) sum_i d_i^4 u peaks at 0.3 h^2.
    let predicted = 0.3 * h * h;
    let exact = ScalarField::sample(g, |x| gaussian_potential_oracle(radius(x))).unwrap();
    let r_exact = residual_laplacian(&exact, &s).unwrap();
    assert!((r_exact - predicted).abs() <= 0.05 * predicted, "{r_exact} vs {predicted}");
    let computed = newtonian_potential(&s, Backend::FftConv).unwrap();
    let r_computed = residual_laplacian(&computed, &s).unwrap();
    assert!(r_computed <= 2.0 * predicted, "{r_computed}");
    assert_eq!(residual_laplacian(&ScalarField::zeros(g), &ScalarField::zeros(g)).unwrap(), 0.0);
}

#[test]
fn residual_converges_at_second_order() {
    let residual = |n| {
        let g = Grid3::centered(n, 4.0).unwrap();
        let s = ScalarField::sample(g, gauss).unwrap();
        residual_laplacian(&newtonian_potential(&s, Backend::FftConv).unwrap(), &s).unwrap()
    };
    let ratio = residual(33) / residual(65);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn far_field_tracks_monopole() {
    let g = Grid3::centered(65, 8.0).unwrap();
    let s = ScalarField::sample(g, gauss).unwrap();
    let u = newtonian_potential(&s, Backend::FftConv).unwrap();
    let mass = PI.powf(1.5);
    let mut checked = 0;
    for idx in 0..g.len() {
        let r = radius(g.position(idx));
        // Gaussian mass is effectively inside radius 3.
        if r >= 6.0 {
            let monopole = mass / (4.0 * PI * r);
            assert!((u.values()[idx] - monopole).abs() <= 0.05 * monopole, "r = {r}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

fn bump(x: [f64; 3], center: [f64; 3]) -> f64 {
    let d2: f64 = (0..3).map(|i| (x[i] - center[i]).powi(2)).sum();
    if d2 < 1.0 {
        (1.0 - d2).powi(3)
    } else {
        0.0
    }
}

#[test]
fn translation_by_one_node_shifts_the_potential() {
    let g = Grid3::centered(33, 4.0).unwrap();
    let h = g.spacing();
    for backend in [Backend::FftConv, Backend::Direct] {
        let s = ScalarField::sample(g, |x| bump(x, [0.0; 3])).unwrap();
        let shifted = ScalarField::sample(g, |x| bump(x, [h, 0.0, 0.0])).unwrap();
        let u = newtonian_potential(&s, backend).unwrap();
        let v = newtonian_potential(&shifted, backend).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..33 {
            for j in 0..33 {
                for i in 1..33 {
                    worst = worst.max((v.at(i, j, k) - u.at(i - 1, j, k)).abs());
                }
            }
        }
        assert!(worst <= 1e-13 * u.max_abs(), "{backend}: {worst}");
    }
}

#[test]
fn backends_agree_within_error_estimate() {
    let g = Grid3::centered(17, 4.0).unwrap();
    let s = ScalarField::sample(g, |x| bump([x[0] / 2.0, x[1] / 2.0, x[2] / 2.0], [0.0; 3])).unwrap();
    let direct = newtonian_potential(&s, Backend::Direct).unwrap();
    let fft = newtonian_potential(&s, Backend::FftConv).unwrap();
    let estimate = direct_error_estimate(&s).unwrap();
    let gap = direct.sub(&fft).unwrap().max_abs();
    assert!(estimate > 0.0);
    assert!(gap <= 10.0 * estimate, "gap {gap} estimate {estimate}");
}
