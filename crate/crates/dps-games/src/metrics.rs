//! Economic evaluation at the heavy-traffic equilibrium: system processing cost,
//! operator revenue, the optimal cost under the cost-weighted priority rule, and the
//! price of anarchy with its closed-form upper bounds.
//!
//! All quantities here are closed forms in the primitives. With exponent `alpha` on
//! payments, the equilibrium cost and revenue rates are
//!
//! ```text
//! C = [rho/(1-rho)] * [sum_i lambda_i c_i^(alpha/(alpha+1))] / [sum_i lambda_i c_i^(-1/(alpha+1))]
//! R = C / alpha
//! ```
//!
//! and the benchmark is the preemptive static priority rule that serves classes in
//! descending cost order (optimal for linear waiting costs with a common service
//! rate), whose cost telescopes over cumulative loads. The price of anarchy `C/C_opt`
//! admits a tight bound built from cost and arrival-rate ratios against the cheapest
//! class, and a weaker single-ratio bound.

use crate::exact::SystemParams;

/// Exponent grid used by [`monotonicity_suite`].
pub const ALPHA_GRID: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Cost/revenue/optimality summary of one instance at its heavy-traffic equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomicReport {
    /// Equilibrium system processing cost rate `C`.
    pub system_cost: f64,
    /// Operator revenue rate `R = C / alpha`.
    pub revenue: f64,
    /// Cost rate of the descending-cost preemptive priority benchmark.
    pub optimal_cost: f64,
    /// `C / C_opt`. At least 1 in the heavy-traffic regime the numerator describes;
    /// at light load the limit formula can undershoot the exact benchmark, so the
    /// ratio is informative only when the load is close to 1. It converges to the
    /// tight bound (from below) as the load approaches 1.
    pub poa: f64,
    /// Ratio-form upper bound on the price of anarchy (the sharper of the two).
    pub poa_bound_tight: f64,
    /// Single-ratio upper bound implied by the tight one.
    pub poa_bound_loose: f64,
}

/// Equilibrium system cost rate `C`.
pub fn system_cost_hte(params: &SystemParams) -> f64 {
    let alpha = params.alpha();
    let rho = params.load();
    let lambda = params.arrival_rates();
    let costs = params.cost_rates();
    let heavy: f64 = lambda
        .iter()
        .zip(costs)
        .map(|(l, c)| l * c.powf(alpha / (alpha + 1.0)))
        .sum();
    let light: f64 = lambda
        .iter()
        .zip(costs)
        .map(|(l, c)| l * c.powf(-1.0 / (alpha + 1.0)))
        .sum();
    rho / (1.0 - rho) * heavy / light
}

/// Equilibrium revenue rate `R = C / alpha`: each class's payment rate is a `1/alpha`
/// fraction of its waiting-cost rate at the equilibrium.
pub fn revenue_hte(params: &SystemParams) -> f64 {
    system_cost_hte(params) / params.alpha()
}

/// Cost rate of the optimal benchmark: preemptive static priority in descending cost
/// order. With a common service rate the mean backlog of the top `i` classes depends
/// only on their cumulative load `sigma_i`, so the per-class counts telescope:
///
/// ```text
/// C_opt = sum_i c_i [ sigma_i/(1-sigma_i) - sigma_{i-1}/(1-sigma_{i-1}) ]
/// ```
///
/// Stability (`sigma_K < 1`) is guaranteed by construction of [`SystemParams`].
pub fn optimal_cost_cmu(params: &SystemParams) -> f64 {
    let mut cumulative_load = 0.0;
    let mut prev_backlog = 0.0;
    let mut total = 0.0;
    for i in 0..params.num_classes() {
        cumulative_load += params.class_load(i);
        let backlog = cumulative_load / (1.0 - cumulative_load);
        total += params.cost_rates()[i] * (backlog - prev_backlog);
        prev_backlog = backlog;
    }
    total
}

/// Assemble the full economic report for one instance.
pub fn poa_report(params: &SystemParams) -> EconomicReport {
    let system_cost = system_cost_hte(params);
    let revenue = system_cost / params.alpha();
    let optimal_cost = optimal_cost_cmu(params);

    let alpha = params.alpha();
    let k = params.num_classes();
    let lambda = params.arrival_rates();
    let costs = params.cost_rates();
    let cheap_rate = lambda[k - 1];
    let cheap_cost = costs[k - 1];
    let mut bound_heavy = 1.0;
    let mut bound_light = 1.0;
    for i in 0..k - 1 {
        let rate_ratio = lambda[i] / cheap_rate;
        let cost_ratio = costs[i] / cheap_cost;
        bound_heavy += rate_ratio * cost_ratio.powf(alpha / (alpha + 1.0));
        bound_light += rate_ratio * cost_ratio.powf(-1.0 / (alpha + 1.0));
    }
    let poa_bound_tight = bound_heavy / bound_light;
    let poa_bound_loose = (params.total_arrival_rate() - cheap_rate) / cheap_rate
        * (costs[0] / cheap_cost).powf(alpha / (alpha + 1.0))
        + 1.0;

    EconomicReport {
        system_cost,
        revenue,
        optimal_cost,
        poa: system_cost / optimal_cost,
        poa_bound_tight,
        poa_bound_loose,
    }
}

/// Exponent-sensitivity record for one instance across [`ALPHA_GRID`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMonotonicity {
    /// Ratio of the most to the least expensive class.
    pub cost_ratio: f64,
    /// System cost at each grid exponent.
    pub system_costs: Vec<f64>,
    /// Revenue at each grid exponent.
    pub revenues: Vec<f64>,
    /// Cost strictly increases along the grid (beyond rounding).
    pub cost_strictly_increasing: bool,
    /// Cost is exponent-independent (single effective class), up to rounding.
    pub cost_constant: bool,
    /// Revenue strictly decreases along the grid.
    pub revenue_strictly_decreasing: bool,
    /// Whether decreasing revenue is guaranteed for this instance (`cost_ratio < e^4`).
    pub revenue_decrease_expected: bool,
    /// Centered discrete derivative of revenue at exponent 1 (half-step 0.05). For
    /// large cost ratios this comes out positive: revenue is not globally decreasing.
    pub revenue_slope_near_unit_exponent: f64,
}

/// Exponent-sensitivity report over a set of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub alpha_grid: Vec<f64>,
    pub instances: Vec<InstanceMonotonicity>,
}

/// Evaluate cost/revenue monotonicity in the payment exponent on [`ALPHA_GRID`] for
/// every instance (each instance's own exponent is ignored; the grid replaces it).
///
/// The report records facts; it never panics. Expected behavior: cost increases in
/// the exponent whenever at least two cost levels are present (and is constant for a
/// single effective class); revenue decreases whenever the extreme cost ratio is
/// below `e^4`, while above that threshold the slope near exponent 1 can flip sign.
pub fn monotonicity_suite(instances: &[SystemParams]) -> MonotonicityReport {
    const REL_TOL: f64 = 1e-12;
    let report_instances = instances
        .iter()
        .map(|base| {
            let system_costs: Vec<f64> = ALPHA_GRID
                .iter()
                .map(|&a| system_cost_hte(&base.with_alpha(a).expect("valid exponent")))
                .collect();
            let revenues: Vec<f64> = system_costs
                .iter()
                .zip(ALPHA_GRID)
                .map(|(c, a)| c / a)
                .collect();
            let scale = system_costs[0].abs();
            let cost_strictly_increasing =
                system_costs.windows(2).all(|w| w[1] - w[0] > REL_TOL * scale);
            let cost_constant =
                system_costs.windows(2).all(|w| (w[1] - w[0]).abs() <= REL_TOL * scale);
            let revenue_strictly_decreasing =
                revenues.windows(2).all(|w| w[0] - w[1] > REL_TOL * revenues[0].abs());
            let costs = base.cost_rates();
            let cost_ratio = costs[0] / costs[costs.len() - 1];

            let h = 0.05;
            let hi = revenue_hte(&base.with_alpha(1.0 + h).expect("valid exponent"));
            let lo = revenue_hte(&base.with_alpha(1.0 - h).expect("valid exponent"));
            InstanceMonotonicity {
                cost_ratio,
                system_costs,
                revenues,
                cost_strictly_increasing,
                cost_constant,
                revenue_strictly_decreasing,
                revenue_decrease_expected: cost_ratio < (4.0f64).exp(),
                revenue_slope_near_unit_exponent: (hi - lo) / (2.0 * h),
            }
        })
        .collect();
    MonotonicityReport { alpha_grid: ALPHA_GRID.to_vec(), instances: report_instances }
}

/// Search upward by decades from `start_ratio` for the first two-class cost ratio at
/// which the revenue slope near exponent 1 turns positive; the threshold is known
/// only qualitatively ("large enough"), so it is located empirically.
pub fn first_ratio_with_positive_revenue_slope(start_ratio: f64, max_decades: u32) -> Option<f64> {
    let mut ratio = start_ratio;
    for _ in 0..=max_decades {
        let params = SystemParams::new(vec![1.0, 1.0], vec![ratio, 1.0], 4.0, 1.0)
            .expect("fixed two-class instance");
        let report = monotonicity_suite(std::slice::from_ref(&params));
        if report.instances[0].revenue_slope_near_unit_exponent > 0.0 {
            return Some(ratio);
        }
        ratio *= 10.0;
    }
    None
}
