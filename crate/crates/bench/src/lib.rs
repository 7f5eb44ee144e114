//! Shared fixtures for the criterion benches.

use langevin_core::PotentialSpec;

/// Benchmark dimensions.
pub const DIMS: &[usize] = &[2, 100];

/// One Lipschitz and one polynomial-growth potential of dimension `dim`.
pub fn potentials(dim: usize) -> Vec<(&'static str, PotentialSpec)> {
    vec![
        (
            "gaussian",
            PotentialSpec::gaussian(dim).expect("valid dimension"),
        ),
        (
            "mixture",
            PotentialSpec::gaussian_mixture(dim, 2.0).expect("valid dimension"),
        ),
        (
            "double_well",
            PotentialSpec::double_well(dim, 1.0, 1.0).expect("valid dimension"),
        ),
    ]
}

/// A point away from the origin, so projections and gradients are not trivial.
pub fn start(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| 1.0 + 0.01 * i as f64).collect()
}
