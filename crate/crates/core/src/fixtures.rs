//! Reference distributions with known answers.

use crate::dist::{DistBuilder, PiecewiseDistribution};

/// Irregular signal distribution on `[1, 2]`: `G(x) = 2x - 2` below `4/3`
/// and `x / 2` above.
pub fn irregular() -> PiecewiseDistribution {
    DistBuilder::new(1.0, 2.0)
        .linear_to(4.0 / 3.0, 2.0 / 3.0)
        .linear_to(2.0, 1.0)
        .finish()
        .expect("valid by construction")
}

/// Ironed virtual value of [`irregular`] at quantile `t`.
pub fn irregular_ironed_value(t: f64) -> f64 {
    if t < 0.5 {
        t + 0.5
    } else if t < 0.75 {
        1.0
    } else {
        4.0 * t - 2.0
    }
}

/// Discrete priors on `[0, 1]` whose ironed virtual values are nonnegative.
pub fn regular_discrete_priors() -> Vec<PiecewiseDistribution> {
    let atoms: [&[(f64, f64)]; 3] = [
        &[(0.5, 1.0 / 3.0), (0.75, 1.0 / 3.0), (1.0, 1.0 / 3.0)],
        &[(0.6, 0.5), (0.8, 0.3), (1.0, 0.2)],
        &[(0.5, 0.4), (0.7, 0.3), (0.85, 0.2), (1.0, 0.1)],
    ];
    atoms.iter().map(|a| PiecewiseDistribution::discrete([0.0, 1.0], a).expect("valid by construction")).collect()
}
