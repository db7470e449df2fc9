//! Seeded random-instance generators shared by the unit tests.

use crate::exact::{PriorityVector, SystemParams};
use rand::Rng;

/// Random stable instance with `K` uniform in `[k_min, k_max]`, distinct costs,
/// load in `[0.3, 0.95]`, and payment exponent in `[1, 4]`.
pub fn random_params<R: Rng>(rng: &mut R, k_min: usize, k_max: usize) -> SystemParams {
    let k = rng.gen_range(k_min..=k_max);
    let mut costs: Vec<f64> = (0..k).map(|_| 0.5 + 10.0 * rng.gen::<f64>()).collect();
    costs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Nudge any exact ties apart so K survives canonical merging.
    for i in 1..k {
        if costs[i] >= costs[i - 1] {
            costs[i] = costs[i - 1] * (1.0 - 1e-9);
        }
    }
    let arrivals: Vec<f64> = (0..k).map(|_| 0.1 + rng.gen::<f64>()).collect();
    let rho = 0.3 + 0.65 * rng.gen::<f64>();
    let mu = arrivals.iter().sum::<f64>() / rho;
    let alpha = 1.0 + 3.0 * rng.gen::<f64>();
    SystemParams::new(arrivals, costs, mu, alpha).unwrap()
}

/// Log-uniform priority weights in `[0.1, 10]`.
pub fn random_priorities<R: Rng>(rng: &mut R, k: usize) -> PriorityVector {
    let lo: f64 = 0.1;
    let hi: f64 = 10.0;
    let weights = (0..k)
        .map(|_| (lo.ln() + (hi / lo).ln() * rng.gen::<f64>()).exp())
        .collect();
    PriorityVector::new(weights).unwrap()
}
