//! Exact steady-state analysis of a multi-class shared-capacity queue.
//!
//! Model: `K` job classes arrive as independent Poisson streams with rates `lambda_i`,
//! all carrying exponential service requirements with mean `1/mu` on a single server of
//! unit capacity. Each class holds a positive priority weight `beta_i`, and at every
//! instant each job in the system is served at rate proportional to its weight
//! (capacity share `beta_i / sum of weights present`). Classes also carry waiting cost
//! rates `c_i` and a payment exponent `alpha`, which the game-theoretic layers consume.
//!
//! The per-class mean sojourn times `W_k` solve the linear balance system
//!
//! ```text
//! mu * W_k - sum_i lambda_i * beta_i / (beta_i + beta_k) * (W_k + W_i) = 1,   k = 1..K
//! ```
//!
//! which has a unique positive solution whenever the load `rho = sum_i lambda_i / mu`
//! is below one. A *tagged* job with an arbitrary weight `beta` (not necessarily one of
//! the class weights) has mean sojourn
//!
//! ```text
//! V(beta; betas) = U_0 + sum_i U_i * E[N_i],
//! U_0 = 1 / (mu - sum_i lambda_i beta_i / (beta_i + beta)),
//! U_i = beta_i / (beta_i + beta) * U_0,
//! ```
//!
//! where `E[N_i] = lambda_i W_i` is the stationary class-`i` population. Only weight
//! *ratios* matter: scaling every weight by a common factor changes nothing.
//!
//! Everything downstream (equilibrium solvers, economic metrics, the simulation
//! oracle's analytic targets) funnels through the two solvers in this module.

use crate::error::{Error, Result};
use crate::numeric::solve_dense;

/// Validated description of one queueing-game instance.
///
/// Construction canonicalizes the classes: sorted by strictly decreasing cost rate,
/// with exact cost ties merged into a single class by summing their arrival rates
/// (tied classes are interchangeable in every formula). The original-index to
/// canonical-index mapping is kept so callers can translate back.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    arrival_rates: Vec<f64>,
    cost_rates: Vec<f64>,
    service_rate: f64,
    alpha: f64,
    class_map: Vec<usize>,
}

impl SystemParams {
    /// Validate and canonicalize an instance.
    ///
    /// Requirements: equal-length nonempty rate/cost vectors, all entries positive and
    /// finite, positive finite `service_rate` and `alpha`, and total load strictly
    /// below one.
    pub fn new(
        arrival_rates: Vec<f64>,
        cost_rates: Vec<f64>,
        service_rate: f64,
        alpha: f64,
    ) -> Result<Self> {
        if arrival_rates.is_empty() || arrival_rates.len() != cost_rates.len() {
            return Err(Error::InvalidParameter(format!(
                "need equal-length nonempty rate vectors, got {} arrival rates and {} costs",
                arrival_rates.len(),
                cost_rates.len()
            )));
        }
        for (name, xs) in [("arrival rate", &arrival_rates), ("cost rate", &cost_rates)] {
            if let Some(bad) = xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::InvalidParameter(format!("{name} {bad} must be positive and finite")));
            }
        }
        if !(service_rate.is_finite() && service_rate > 0.0) {
            return Err(Error::InvalidParameter(format!("service rate {service_rate} must be positive and finite")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("payment exponent {alpha} must be positive and finite")));
        }
        let rho: f64 = arrival_rates.iter().sum::<f64>() / service_rate;
        if rho >= 1.0 {
            return Err(Error::UnstableSystem { rho });
        }

        // Canonical order: strictly decreasing cost, exact ties merged.
        let mut order: Vec<usize> = (0..cost_rates.len()).collect();
        order.sort_by(|&a, &b| cost_rates[b].partial_cmp(&cost_rates[a]).unwrap().then(a.cmp(&b)));
        let mut merged_costs: Vec<f64> = Vec::new();
        let mut merged_rates: Vec<f64> = Vec::new();
        let mut class_map = vec![0usize; cost_rates.len()];
        for &orig in &order {
            if merged_costs.last() == Some(&cost_rates[orig]) {
                *merged_rates.last_mut().unwrap() += arrival_rates[orig];
            } else {
                merged_costs.push(cost_rates[orig]);
                merged_rates.push(arrival_rates[orig]);
            }
            class_map[orig] = merged_costs.len() - 1;
        }

        Ok(SystemParams {
            arrival_rates: merged_rates,
            cost_rates: merged_costs,
            service_rate,
            alpha,
            class_map,
        })
    }

    /// Number of classes after canonical merging.
    pub fn num_classes(&self) -> usize {
        self.cost_rates.len()
    }

    /// Per-class Poisson arrival rates, canonical order.
    pub fn arrival_rates(&self) -> &[f64] {
        &self.arrival_rates
    }

    /// Per-class waiting cost rates, strictly decreasing.
    pub fn cost_rates(&self) -> &[f64] {
        &self.cost_rates
    }

    /// Common service rate `mu` (mean job size is `1/mu`).
    pub fn service_rate(&self) -> f64 {
        self.service_rate
    }

    /// Payment exponent `alpha`: a job bidding weight `beta` pays `beta^alpha`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Total arrival rate `sum_i lambda_i`.
    pub fn total_arrival_rate(&self) -> f64 {
        self.arrival_rates.iter().sum()
    }

    /// Offered load `rho = sum_i lambda_i / mu`, strictly below one by construction.
    pub fn load(&self) -> f64 {
        self.total_arrival_rate() / self.service_rate
    }

    /// Class share of the load, `rho_i = lambda_i / mu`.
    pub fn class_load(&self, i: usize) -> f64 {
        self.arrival_rates[i] / self.service_rate
    }

    /// Mapping from pre-canonicalization indices to canonical class indices.
    pub fn class_map(&self) -> &[usize] {
        &self.class_map
    }

    /// Same classes, with the service rate rescaled so the load equals `rho`.
    ///
    /// This is how load sweeps are generated: arrival rates stay fixed and `mu`
    /// shrinks toward the total arrival rate as `rho` approaches one.
    pub fn with_load(&self, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("target load {rho} must lie in (0, 1)")));
        }
        let mut out = self.clone();
        out.service_rate = self.total_arrival_rate() / rho;
        Ok(out)
    }

    /// Same classes and rates with a different payment exponent.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("payment exponent {alpha} must be positive and finite")));
        }
        let mut out = self.clone();
        out.alpha = alpha;
        Ok(out)
    }
}

/// Positive, finite per-class priority weights, index-aligned with canonical classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityVector(Vec<f64>);

impl PriorityVector {
    /// Validate a weight vector: every entry positive and finite.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("priority vector is empty".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("priority weight {bad} must be positive and finite")));
        }
        Ok(PriorityVector(weights))
    }

    /// `k` classes all holding the same weight.
    pub fn uniform(k: usize, weight: f64) -> Result<Self> {
        PriorityVector::new(vec![weight; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Every weight multiplied by `factor` (queue behavior is invariant to this).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        PriorityVector::new(self.0.iter().map(|w| w * factor).collect())
    }

    /// Copy with coordinate `i` replaced by `weight`.
    pub fn with_weight(&self, i: usize, weight: f64) -> Result<Self> {
        if i >= self.0.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.0.len() });
        }
        let mut v = self.0.clone();
        v[i] = weight;
        PriorityVector::new(v)
    }
}

fn check_arity(params: &SystemParams, priorities: &PriorityVector) -> Result<()> {
    if priorities.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
    }
    Ok(())
}

/// Stationary per-class mean sojourn times and populations for one weight profile.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingProfile {
    waits: Vec<f64>,
    counts: Vec<f64>,
}

impl WaitingProfile {
    /// Mean sojourn time `W_i` per class (time in system, service included).
    pub fn waits(&self) -> &[f64] {
        &self.waits
    }

    /// Stationary mean class populations `E[N_i] = lambda_i * W_i`.
    pub fn expected_counts(&self) -> &[f64] {
        &self.counts
    }

    /// Total mean population; equals `rho / (1 - rho)` by work conservation.
    pub fn total_expected_count(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Mean sojourn of a tagged job holding weight `beta` against a fixed population
/// profile, with the decomposition weights that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedJobTime {
    value: f64,
    idle_weight: f64,
    class_weights: Vec<f64>,
}

impl TaggedJobTime {
    /// The mean sojourn `V(beta; betas)`.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Empty-system term `U_0`: mean sojourn if the tagged job found no one.
    pub fn idle_weight(&self) -> f64 {
        self.idle_weight
    }

    /// Per-class increments `U_i`: marginal sojourn per class-`i` job found on arrival.
    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }
}

/// Solve the balance system for the per-class mean sojourn times `W`.
///
/// Dense Gaussian elimination with partial pivoting; `K` stays small in practice.
/// The solution satisfies work conservation: `sum_i lambda_i W_i = rho / (1 - rho)`.
pub fn solve_waiting_times(params: &SystemParams, priorities: &PriorityVector) -> Result<WaitingProfile> {
    check_arity(params, priorities)?;
    let lambda = params.arrival_rates();
    let a = balance_matrix(params, priorities);
    let waits = solve_dense(a, vec![1.0; params.num_classes()])?;
    let counts: Vec<f64> = waits.iter().zip(lambda).map(|(w, l)| w * l).collect();
    Ok(WaitingProfile { waits, counts })
}

/// Coefficient matrix of the balance system (assumes arity already checked).
pub(crate) fn balance_matrix(params: &SystemParams, priorities: &PriorityVector) -> Vec<Vec<f64>> {
    let k = params.num_classes();
    let lambda = params.arrival_rates();
    let beta = priorities.as_slice();
    let mu = params.service_rate();

    let mut a = vec![vec![0.0; k]; k];
    for row in 0..k {
        let mut diag = mu - lambda[row];
        for i in 0..k {
            if i == row {
                continue;
            }
            let coupling = lambda[i] * beta[i] / (beta[i] + beta[row]);
            a[row][i] = -coupling;
            diag -= coupling;
        }
        a[row][row] = diag;
    }
    a
}

/// Tagged-job mean sojourn `V(beta; betas)`, solving the balance system internally.
pub fn tagged_job_time(params: &SystemParams, priorities: &PriorityVector, beta: f64) -> Result<TaggedJobTime> {
    let profile = solve_waiting_times(params, priorities)?;
    tagged_job_time_with_profile(params, priorities, &profile, beta)
}

/// Tagged-job mean sojourn against a precomputed waiting profile.
///
/// This is the solve-once / evaluate-many form used by best-response loops: the
/// population profile depends only on the class weights, so one linear solve serves
/// every candidate `beta`.
pub fn tagged_job_time_with_profile(
    params: &SystemParams,
    priorities: &PriorityVector,
    profile: &WaitingProfile,
    beta: f64,
) -> Result<TaggedJobTime> {
    check_arity(params, priorities)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("tagged weight {beta} must be positive and finite")));
    }
    let lambda = params.arrival_rates();
    let betas = priorities.as_slice();
    let mu = params.service_rate();

    let mut drain = mu;
    for i in 0..lambda.len() {
        drain -= lambda[i] * betas[i] / (betas[i] + beta);
    }
    // drain > mu - sum lambda_i > 0 under stability, so U_0 is always finite.
    let idle_weight = 1.0 / drain;
    let class_weights: Vec<f64> = betas.iter().map(|b| b / (b + beta) * idle_weight).collect();
    let value = idle_weight
        + class_weights
            .iter()
            .zip(profile.expected_counts())
            .map(|(u, n)| u * n)
            .sum::<f64>();
    Ok(TaggedJobTime { value, idle_weight, class_weights })
}

/// Single-class closed form for the tagged sojourn.
///
/// With one class at weight `population_beta` and a tagged job at weight `beta`:
///
/// ```text
/// V(beta; b) = 1 / (mu (1 - rho)) * (beta (1 - rho) + b) / (b (1 - rho) + beta)
/// ```
///
/// Errors with `WrongArity` unless the instance has exactly one class.
pub fn closed_form_k1(params: &SystemParams, beta: f64, population_beta: f64) -> Result<f64> {
    if params.num_classes() != 1 {
        return Err(Error::WrongArity { expected: 1, got: params.num_classes() });
    }
    for (name, x) in [("tagged weight", beta), ("population weight", population_beta)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} {x} must be positive and finite")));
        }
    }
    let rho = params.load();
    let slack = 1.0 - rho;
    Ok((beta * slack + population_beta) / (population_beta * slack + beta) / (params.service_rate() * slack))
}
