use hhk_core::bounded::{
    boundary_indices, boundary_trace, dirichlet_reconstruct, dirichlet_reconstruct_with_stats, BoundaryTrace,
};
use hhk_core::ops::{curl, div};
use hhk_core::{reconstruct_from_curl_div, Backend, DecayRequirement, Grid3, ScalarField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solve_manufactured(exact: &VectorField, tol: f64) -> VectorField {
    dirichlet_reconstruct(&curl(exact).unwrap(), &div(exact).unwrap(), &boundary_trace(exact), tol).unwrap()
}

#[test]
fn random_quadratics_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let g = Grid3::centered(17, 1.5).unwrap();
    for _ in 0..5 {
        // Ten monomials of degree <= 2 per component.
        let coef: Vec<[f64; 10]> = (0..3).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let exact = VectorField::sample(g, |x| {
            let m =
                [1.0, x[0], x[1], x[2], x[0] * x[0], x[1] * x[1], x[2] * x[2], x[0] * x[1], x[1] * x[2], x[0] * x[2]];
            std::array::from_fn(|c| coef[c].iter().zip(m).map(|(a, b)| a * b).sum())
        })
        .unwrap();
        let err = solve_manufactured(&exact, 1e-10).sub(&exact).unwrap().max_norm();
        assert!(err <= 1e-8, "{err}");
    }
}

#[test]
fn gaussian_solution_converges_at_second_order() {
    let error = |n| {
        let g = Grid3::centered(n, 2.0).unwrap();
        let exact = VectorField::sample(g, |x| {
            let e = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
            [e, x[0] * e, 0.5 * x[2] * e]
        })
        .unwrap();
        solve_manufactured(&exact, 1e-12).sub(&exact).unwrap().max_norm()
    };
    let ratio = error(17) / error(33);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn maximum_principle_on_random_boundary_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = Grid3::centered(13, 1.0).unwrap();
    let count = boundary_indices(&g).len();
    for _ in 0..10 {
        let values = (0..count).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let phi = BoundaryTrace::new(g, values).unwrap();
        let sol = dirichlet_reconstruct(&VectorField::zeros(g), &ScalarField::zeros(g), &phi, 1e-12).unwrap();
        for c in 0..3 {
            let bmax = phi.values().iter().fold(0.0f64, |m, v| m.max(v[c].abs()));
            let imax = (0..g.len())
                .filter(|&idx| !g.is_boundary(g.node_of(idx)))
                .fold(0.0f64, |m, idx| m.max(sol.values()[idx][c].abs()));
            assert!(imax <= bmax, "component {c}: {imax} > {bmax}");
        }
    }
}

#[test]
fn agrees_with_free_space_reconstruction() {
    let field = hhk_core::analytic::corpus_field("mixed").unwrap();
    let g = Grid3::centered(33, 6.0).unwrap();
    let exact = field.sample_field(g).unwrap();
    let (a, f) = (field.sample_curl(g).unwrap(), field.sample_div(g).unwrap());
    let bounded = dirichlet_reconstruct(&a, &f, &boundary_trace(&exact), 1e-10).unwrap();
    let free = reconstruct_from_curl_div(&a, &f, Backend::FftConv, DecayRequirement::Pointwise).unwrap();
    let budget = bounded.sub(&exact).unwrap().max_norm().max(free.sub(&exact).unwrap().max_norm());
    let gap = bounded.sub(&free).unwrap().max_norm_interior(1);
    assert!(gap <= budget, "gap {gap} budget {budget}");
}

#[test]
fn solves_are_deterministic() {
    let g = Grid3::centered(17, 2.0).unwrap();
    let exact = VectorField::sample(g, |x| [x[0].sin(), x[1] * x[2], (-x[0] * x[0]).exp()]).unwrap();
    let run = || {
        dirichlet_reconstruct_with_stats(&curl(&exact).unwrap(), &div(&exact).unwrap(), &boundary_trace(&exact), 1e-10)
            .unwrap()
    };
    let (first, second) = (run(), run());
    assert_eq!(first.field, second.field);
    assert!(first.stats.iter().all(|s| s.relative_residual <= 1e-10 && s.iterations > 0));
}
