//! Network of independent resource markets: each of `J` resources runs its own
//! discriminatory processor-sharing market, every class holds one bid per resource it
//! uses, and a job's delay cost is charged on the *maximum* completion time across
//! its resources. Payments are linear in the bid (exponent fixed at 1 for this model).
//!
//! The per-resource heavy-traffic time has the same shape as the single-resource one,
//! aggregating only the classes present at that resource. Writing
//! `A_j = 1 / ((1-rho_j) mu_j gamma_j)`, a bid `beta` at resource `j` buys time
//! `A_j / beta`, so the bid that attains a target time `V` is `b_j(V) = A_j / V` —
//! convex, decreasing, differentiable, with `b_j'(V) = -b_j(V)/V`.
//!
//! A best response equalizes completion times across the class's resources (lowering
//! the slack bids strictly improves the objective otherwise), which collapses the
//! multi-bid problem to a scalar search over the common time `V`: minimize
//! `c_i V + sum_j b_j(V)`. At a fixed point the envelope identity
//! `sum_j (-b_j'(V_i)) = c_i` holds exactly; it is the convergence certificate.

use crate::equilibrium::SolverConfig;
use crate::error::{Error, Result};
use crate::numeric::{bisect_root, golden_section_min, max_rel_diff};

/// Topology and primitives of a multi-resource market.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    arrival_rates: Vec<f64>,
    cost_rates: Vec<f64>,
    resource_sets: Vec<Vec<usize>>,
    service_rates: Vec<f64>,
    classes_at: Vec<Vec<usize>>,
}

impl NetworkSpec {
    /// Validate and build a network: positive finite rates and costs, nonempty
    /// resource sets with in-range indices, and every resource stable under the
    /// total load of the classes that use it.
    pub fn new(
        arrival_rates: Vec<f64>,
        cost_rates: Vec<f64>,
        resource_sets: Vec<Vec<usize>>,
        service_rates: Vec<f64>,
    ) -> Result<Self> {
        let k = arrival_rates.len();
        let j_count = service_rates.len();
        if k == 0 || j_count == 0 {
            return Err(Error::InvalidParameter("need at least one class and one resource".into()));
        }
        if cost_rates.len() != k || resource_sets.len() != k {
            return Err(Error::WrongArity { expected: k, got: cost_rates.len().max(resource_sets.len()) });
        }
        for (label, values) in [("arrival rate", &arrival_rates), ("cost rate", &cost_rates), ("service rate", &service_rates)] {
            if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(Error::InvalidParameter(format!("every {label} must be positive and finite")));
            }
        }
        let mut sorted_sets = Vec::with_capacity(k);
        for set in &resource_sets {
            if set.is_empty() {
                return Err(Error::InvalidParameter("every class must use at least one resource".into()));
            }
            let mut s = set.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != set.len() {
                return Err(Error::InvalidParameter("resource sets must not repeat a resource".into()));
            }
            if *s.last().unwrap() >= j_count {
                return Err(Error::IndexOutOfRange { index: *s.last().unwrap(), len: j_count });
            }
            sorted_sets.push(s);
        }
        let mut classes_at = vec![Vec::new(); j_count];
        for (i, set) in sorted_sets.iter().enumerate() {
            for &j in set {
                classes_at[j].push(i);
            }
        }
        for (j, users) in classes_at.iter().enumerate() {
            let rho: f64 = users.iter().map(|&i| arrival_rates[i] / service_rates[j]).sum();
            if rho >= 1.0 {
                return Err(Error::UnstableSystem { rho });
            }
        }
        Ok(NetworkSpec { arrival_rates, cost_rates, resource_sets: sorted_sets, service_rates, classes_at })
    }

    pub fn num_classes(&self) -> usize {
        self.arrival_rates.len()
    }

    pub fn num_resources(&self) -> usize {
        self.service_rates.len()
    }

    pub fn arrival_rates(&self) -> &[f64] {
        &self.arrival_rates
    }

    pub fn cost_rates(&self) -> &[f64] {
        &self.cost_rates
    }

    pub fn service_rates(&self) -> &[f64] {
        &self.service_rates
    }

    /// Resources used by class `i`, sorted ascending.
    pub fn resource_set(&self, i: usize) -> &[usize] {
        &self.resource_sets[i]
    }

    /// Classes using resource `j`, sorted ascending.
    pub fn classes_at(&self, j: usize) -> &[usize] {
        &self.classes_at[j]
    }

    /// Total load at resource `j` (strictly below 1 by construction).
    pub fn resource_load(&self, j: usize) -> f64 {
        self.classes_at[j].iter().map(|&i| self.arrival_rates[i] / self.service_rates[j]).sum()
    }
}

/// One positive bid per (class, resource) pair with the resource in the class's set;
/// rows are aligned with [`NetworkSpec::resource_set`].
#[derive(Debug, Clone, PartialEq)]
pub struct BidMatrix {
    rows: Vec<Vec<f64>>,
}

impl BidMatrix {
    /// Build from per-class rows aligned with each class's resource set.
    pub fn from_rows(spec: &NetworkSpec, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != spec.num_classes() {
            return Err(Error::WrongArity { expected: spec.num_classes(), got: rows.len() });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != spec.resource_set(i).len() {
                return Err(Error::WrongArity { expected: spec.resource_set(i).len(), got: row.len() });
            }
            if row.iter().any(|b| !b.is_finite() || *b <= 0.0) {
                return Err(Error::InvalidParameter(format!("class {i} bids must be positive and finite")));
            }
        }
        Ok(BidMatrix { rows })
    }

    /// Uniform starting point: every defined bid set to `value`.
    pub fn uniform(spec: &NetworkSpec, value: f64) -> Result<Self> {
        Self::from_rows(spec, (0..spec.num_classes()).map(|i| vec![value; spec.resource_set(i).len()]).collect())
    }

    /// Bid of class `i` at resource `j`, if `j` is in the class's resource set.
    pub fn get(&self, spec: &NetworkSpec, i: usize, j: usize) -> Option<f64> {
        spec.resource_set(i).iter().position(|&r| r == j).map(|s| self.rows[i][s])
    }

    /// Row of bids for class `i`, aligned with its resource set.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }
}

/// `A_j` such that a bid `beta` at resource `j` buys time `A_j / beta`:
/// `A_j = 1 / ((1-rho_j) mu_j gamma_j)` with the weighted inverse-bid aggregate
/// `gamma_j = (1/rho_j) sum_{i at j} rho_ij / beta_ij` over every class at the
/// resource (a tagged job is infinitesimal, so its own class stays in).
fn resource_coefficient(spec: &NetworkSpec, bids: &BidMatrix, j: usize) -> f64 {
    let mu = spec.service_rates()[j];
    let weighted: f64 = spec
        .classes_at(j)
        .iter()
        .map(|&i| {
            let beta = bids.get(spec, i, j).expect("class listed at resource");
            spec.arrival_rates()[i] / mu / beta
        })
        .sum();
    let rho = spec.resource_load(j);
    1.0 / ((1.0 - rho) * mu * rho.recip() * weighted)
}

fn check_bids(spec: &NetworkSpec, bids: &BidMatrix) -> Result<()> {
    if bids.rows.len() != spec.num_classes() {
        return Err(Error::WrongArity { expected: spec.num_classes(), got: bids.rows.len() });
    }
    for (i, row) in bids.rows.iter().enumerate() {
        if row.len() != spec.resource_set(i).len() {
            return Err(Error::WrongArity { expected: spec.resource_set(i).len(), got: row.len() });
        }
    }
    Ok(())
}

/// Heavy-traffic time a tagged job with bid `beta` experiences at resource `j`,
/// against the bid population there.
pub fn v_ht_resource(spec: &NetworkSpec, bids: &BidMatrix, j: usize, beta: f64) -> Result<f64> {
    check_bids(spec, bids)?;
    if j >= spec.num_resources() {
        return Err(Error::IndexOutOfRange { index: j, len: spec.num_resources() });
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!("tagged bid {beta} must be positive")));
    }
    Ok(resource_coefficient(spec, bids, j) / beta)
}

/// Bid at resource `j` that attains the target time: `b_j(V) = A_j / V`.
pub fn inverse_bid(spec: &NetworkSpec, bids: &BidMatrix, j: usize, target_wait: f64) -> Result<f64> {
    check_bids(spec, bids)?;
    if j >= spec.num_resources() {
        return Err(Error::IndexOutOfRange { index: j, len: spec.num_resources() });
    }
    if !target_wait.is_finite() || target_wait <= 0.0 {
        return Err(Error::InvalidParameter(format!("target time {target_wait} must be positive")));
    }
    Ok(resource_coefficient(spec, bids, j) / target_wait)
}

/// Analytic slope of the bid curve: `b_j'(V) = -b_j(V) / V`.
pub fn inverse_bid_derivative(spec: &NetworkSpec, bids: &BidMatrix, j: usize, target_wait: f64) -> Result<f64> {
    let b = inverse_bid(spec, bids, j, target_wait)?;
    Ok(-b / target_wait)
}

/// Converged network equilibrium with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReport {
    /// Equilibrium bids.
    pub bids: BidMatrix,
    /// Per-class equalized time across the class's resources.
    pub equalized_waits: Vec<f64>,
    /// Bid-curve slopes `b'_ij` at the equalized time, aligned with resource sets.
    pub bid_derivatives: Vec<Vec<f64>>,
    /// Ratio bound on the price of anarchy; requires equal arrival rates, absent
    /// otherwise.
    pub poa_bound: Option<f64>,
    /// Best-response sweeps performed.
    pub iterations: usize,
    /// Sup-norm relative bid change at termination.
    pub residual: f64,
    /// Sweeps converged and both first-order certificates held within 1e-8.
    pub converged: bool,
}

/// Tolerance on the equalization and envelope certificates at a fixed point.
const NETWORK_VERIFY_TOL: f64 = 1e-8;

/// Best response of one class to the current bid population: search the common time
/// `V` minimizing `c_i V + sum_j A_ij / V`, then recover per-resource bids.
/// The coefficients `A_ij` are read off the current bids, so the search is a clean
/// 1-D convex problem (golden section plus a derivative-bisection polish).
fn class_best_response(
    spec: &NetworkSpec,
    bids: &BidMatrix,
    i: usize,
    config: &SolverConfig,
) -> (f64, Vec<f64>) {
    let coefficients: Vec<f64> =
        spec.resource_set(i).iter().map(|&j| resource_coefficient(spec, bids, j)).collect();
    let c = spec.cost_rates()[i];
    let total: f64 = coefficients.iter().sum();
    let objective = |v: f64| c * v + total / v;
    let slope = |v: f64| c - total / (v * v);

    let (t_lo, t_hi) = (config.bracket.0.ln(), config.bracket.1.ln());
    let (mut t, _) = golden_section_min(&|t: f64| objective(t.exp()), t_lo, t_hi, config.inner_tolerance, 400);
    let (a, b) = ((t - 1e-4).max(t_lo), (t + 1e-4).min(t_hi));
    if slope(a.exp()) < 0.0 && slope(b.exp()) > 0.0 {
        if let Ok(root) = bisect_root(|t: f64| slope(t.exp()), a, b, 1e-14) {
            t = root;
        }
    }
    let v = t.exp();
    (v, coefficients.iter().map(|a_j| a_j / v).collect())
}

/// Solve the network equilibrium by synchronous best-response sweeps over classes.
///
/// Uniqueness is not guaranteed; the first fixed point reached is reported, with the
/// two first-order certificates (time equalization across each class's resources and
/// the envelope identity `sum_j (-b'_ij) = c_i`) checked on the final bids and folded
/// into the `converged` flag. Non-convergence is reported, not raised.
pub fn solve_network_hte(spec: &NetworkSpec, config: &SolverConfig) -> Result<NetworkReport> {
    let mut bids = BidMatrix::uniform(spec, 1.0)?;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        let responses: Vec<(f64, Vec<f64>)> =
            (0..spec.num_classes()).map(|i| class_best_response(spec, &bids, i, config)).collect();
        iterations += 1;
        let flat_new: Vec<f64> = responses.iter().flat_map(|(_, row)| row.iter().copied()).collect();
        let flat_old: Vec<f64> = bids.rows.iter().flatten().copied().collect();
        residual = max_rel_diff(&flat_new, &flat_old);
        if residual < config.br_tolerance {
            break;
        }
        let mixed: Vec<Vec<f64>> = bids
            .rows
            .iter()
            .zip(&responses)
            .map(|(old_row, (_, new_row))| {
                old_row
                    .iter()
                    .zip(new_row)
                    .map(|(old, new)| old + config.damping * (new - old))
                    .collect()
            })
            .collect();
        bids = BidMatrix::from_rows(spec, mixed)?;
    }

    // Certificates on the final bids.
    let mut equalized_waits = Vec::with_capacity(spec.num_classes());
    let mut bid_derivatives = Vec::with_capacity(spec.num_classes());
    let mut certificate_defect = 0.0f64;
    for i in 0..spec.num_classes() {
        let times: Vec<f64> = spec
            .resource_set(i)
            .iter()
            .zip(bids.row(i))
            .map(|(&j, &beta)| v_ht_resource(spec, &bids, j, beta).expect("validated bids"))
            .collect();
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let spread = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
        certificate_defect = certificate_defect.max((spread.1 - spread.0) / mean);

        let slopes: Vec<f64> = bids.row(i).iter().map(|&beta| -beta / mean).collect();
        let recovered: f64 = slopes.iter().map(|s| -s).sum();
        let c = spec.cost_rates()[i];
        certificate_defect = certificate_defect.max((recovered - c).abs() / c);

        equalized_waits.push(mean);
        bid_derivatives.push(slopes);
    }
    let converged = residual < config.br_tolerance && certificate_defect < NETWORK_VERIFY_TOL;

    let mut report = NetworkReport {
        bids,
        equalized_waits,
        bid_derivatives,
        poa_bound: None,
        iterations,
        residual,
        converged,
    };
    report.poa_bound = network_poa_bound(&report, spec).ok();
    Ok(report)
}

/// Ratio bound on the network price of anarchy:
/// `(K-1) max_j sqrt(max_i(-b'_ij) / min_i(-b'_ij)) + 1`, slopes taken over the
/// classes present at each resource. Valid only under equal arrival rates.
pub fn network_poa_bound(report: &NetworkReport, spec: &NetworkSpec) -> Result<f64> {
    let rates = spec.arrival_rates();
    let spread = rates.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
        (lo.min(r), hi.max(r))
    });
    if (spread.1 - spread.0) / spread.1 > 1e-12 {
        return Err(Error::HypothesisViolation(
            "the price-of-anarchy bound requires equal arrival rates across classes".into(),
        ));
    }
    let k = spec.num_classes();
    let mut worst_ratio: f64 = 1.0;
    for j in 0..spec.num_resources() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in spec.classes_at(j) {
            let s = spec.resource_set(i).iter().position(|&r| r == j).expect("listed");
            let magnitude = -report.bid_derivatives[i][s];
            lo = lo.min(magnitude);
            hi = hi.max(magnitude);
        }
        if lo.is_finite() && hi.is_finite() {
            worst_ratio = worst_ratio.max(hi / lo);
        }
    }
    Ok((k as f64 - 1.0) * worst_ratio.sqrt() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::SystemParams;
    use crate::heavy_traffic::{hte_job_level, v_ht};
    use crate::metrics::poa_report;

    /// Three classes on two resources: classes 0 and 1 each use one resource,
    /// class 2 bridges both. Equal arrival rates keep the bound applicable.
    fn bridge_fixture() -> NetworkSpec {
        NetworkSpec::new(
            vec![1.0, 1.0, 1.0],
            vec![4.0, 2.0, 3.0],
            vec![vec![0], vec![1], vec![0, 1]],
            vec![4.0, 4.0],
        )
        .unwrap()
    }

    #[test]
    fn construction_rejects_bad_topologies() {
        // Overloaded resource: both classes (rate 3) on one unit-rate resource.
        assert!(matches!(
            NetworkSpec::new(vec![2.0, 1.0], vec![1.0, 1.0], vec![vec![0], vec![0]], vec![1.0]),
            Err(Error::UnstableSystem { .. })
        ));
        // Out-of-range resource index.
        assert!(NetworkSpec::new(vec![1.0], vec![1.0], vec![vec![1]], vec![4.0]).is_err());
        // Empty resource set.
        assert!(NetworkSpec::new(vec![1.0], vec![1.0], vec![vec![]], vec![4.0]).is_err());
        // Duplicated resource in a set.
        assert!(NetworkSpec::new(vec![1.0], vec![1.0], vec![vec![0, 0]], vec![4.0]).is_err());
    }

    #[test]
    fn symmetric_bids_cancel_to_the_bare_congestion_time() {
        let spec = NetworkSpec::new(
            vec![1.0, 2.0],
            vec![3.0, 1.0],
            vec![vec![0], vec![0]],
            vec![5.0],
        )
        .unwrap();
        let bids = BidMatrix::uniform(&spec, 2.5).unwrap();
        let rho = spec.resource_load(0);
        let expected = 1.0 / ((1.0 - rho) * 5.0);
        let got = v_ht_resource(&spec, &bids, 0, 2.5).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn per_resource_time_matches_the_single_market_form() {
        let spec = bridge_fixture();
        let bids = BidMatrix::from_rows(
            &spec,
            vec![vec![1.5], vec![0.7], vec![0.9, 1.8]],
        )
        .unwrap();
        // Resource 0 hosts classes 0 and 2; descending distinct costs keep the
        // single-market canonical order identical to the listing order.
        let single = SystemParams::new(vec![1.0, 1.0], vec![4.0, 3.0], 4.0, 1.0).unwrap();
        let prio = crate::exact::PriorityVector::new(vec![1.5, 0.9]).unwrap();
        for tagged in [0.4, 1.0, 2.3] {
            let network = v_ht_resource(&spec, &bids, 0, tagged).unwrap();
            let direct = v_ht(&single, &prio, tagged).unwrap();
            assert!((network - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn inverse_bid_round_trips_and_slopes_match_finite_differences() {
        let spec = bridge_fixture();
        let bids = BidMatrix::from_rows(&spec, vec![vec![1.0], vec![1.0], vec![1.0, 1.0]]).unwrap();
        for target in [0.5, 1.0, 2.0, 4.0] {
            let bid = inverse_bid(&spec, &bids, 0, target).unwrap();
            let round_trip = v_ht_resource(&spec, &bids, 0, bid).unwrap();
            assert!((round_trip - target).abs() < 1e-12 * target);

            let analytic = inverse_bid_derivative(&spec, &bids, 0, target).unwrap();
            let h = 1e-6 * target;
            let fd = (inverse_bid(&spec, &bids, 0, target + h).unwrap()
                - inverse_bid(&spec, &bids, 0, target - h).unwrap())
                / (2.0 * h);
            assert!(
                (analytic - fd).abs() < 1e-6 * analytic.abs(),
                "analytic {analytic} vs finite difference {fd}"
            );
        }
        // Convex + decreasing along a uniform grid: positive second differences.
        let grid: Vec<f64> = (1..=9).map(|s| 0.5 + 0.25 * s as f64).collect();
        let values: Vec<f64> =
            grid.iter().map(|&v| inverse_bid(&spec, &bids, 0, v).unwrap()).collect();
        for w in values.windows(2) {
            assert!(w[1] < w[0], "bid curve must decrease");
        }
        for w in values.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] > 0.0, "bid curve must be convex");
        }
        assert!(inverse_bid(&spec, &bids, 0, 0.0).is_err());
        assert!(inverse_bid(&spec, &bids, 0, -1.0).is_err());
    }

    #[test]
    fn single_resource_network_reduces_to_the_single_market_equilibrium() {
        let spec = NetworkSpec::new(
            vec![1.0, 1.0],
            vec![4.0, 1.0],
            vec![vec![0], vec![0]],
            vec![4.0],
        )
        .unwrap();
        let report = solve_network_hte(&spec, &SolverConfig::default()).unwrap();
        assert!(report.converged);

        let params = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0).unwrap();
        let single = hte_job_level(&params).unwrap();
        for (i, want) in single.priorities().as_slice().iter().enumerate() {
            let got = report.bids.row(i)[0];
            assert!(
                (got - want).abs() < 1e-8 * want,
                "class {i}: network bid {got} vs single-market weight {want}"
            );
        }
    }

    #[test]
    fn disjoint_classes_decouple_into_single_class_markets() {
        let spec = NetworkSpec::new(
            vec![1.0, 2.0],
            vec![3.0, 5.0],
            vec![vec![0], vec![1]],
            vec![4.0, 6.0],
        )
        .unwrap();
        let report = solve_network_hte(&spec, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        for (i, (lambda, (c, mu))) in [(1.0, (3.0, 4.0)), (2.0, (5.0, 6.0))].into_iter().enumerate() {
            let single = SystemParams::new(vec![lambda], vec![c], mu, 1.0).unwrap();
            let want = hte_job_level(&single).unwrap().priorities().as_slice()[0];
            let got = report.bids.row(i)[0];
            assert!(
                (got - want).abs() < 1e-8 * want,
                "class {i}: network bid {got} vs isolated weight {want}"
            );
        }
    }

    #[test]
    fn bridge_fixture_reaches_a_certified_equilibrium() {
        let spec = bridge_fixture();
        let report = solve_network_hte(&spec, &SolverConfig::default()).unwrap();
        assert!(report.converged);

        // Equalization: the bridging class sees the same time on both resources.
        let times: Vec<f64> = spec
            .resource_set(2)
            .iter()
            .zip(report.bids.row(2))
            .map(|(&j, &b)| v_ht_resource(&spec, &report.bids, j, b).unwrap())
            .collect();
        assert!((times[0] - times[1]).abs() < 1e-8 * report.equalized_waits[2]);

        // Envelope identity per class.
        for i in 0..spec.num_classes() {
            let total: f64 = report.bid_derivatives[i].iter().map(|s| -s).sum();
            let c = spec.cost_rates()[i];
            assert!((total - c).abs() < 1e-8 * c, "class {i}: slope sum {total} vs cost {c}");
        }

        // Scale sanity: every bid positive and finite.
        for i in 0..spec.num_classes() {
            assert!(report.bids.row(i).iter().all(|b| b.is_finite() && *b > 0.0));
        }
    }

    #[test]
    fn equalization_shortcut_agrees_with_direct_two_dimensional_minimization() {
        let spec = bridge_fixture();
        let report = solve_network_hte(&spec, &SolverConfig::default()).unwrap();
        let config = SolverConfig::default();

        // Direct oracle for the bridging class: nested golden section over its two
        // bids, objective c * max(time_0, time_1) + bid_0 + bid_1 against the
        // final population.
        let coefficient = |j: usize| resource_coefficient(&spec, &report.bids, j);
        let (a0, a1) = (coefficient(0), coefficient(1));
        let c = spec.cost_rates()[2];
        let objective = |b0: f64, b1: f64| c * (a0 / b0).max(a1 / b1) + b0 + b1;

        let inner = |b0: f64| {
            golden_section_min(
                &|t: f64| objective(b0, t.exp()),
                config.bracket.0.ln(),
                config.bracket.1.ln(),
                1e-13,
                400,
            )
        };
        let (t0, _) = golden_section_min(
            &|t: f64| inner(t.exp()).1,
            config.bracket.0.ln(),
            config.bracket.1.ln(),
            1e-13,
            400,
        );
        let b0 = t0.exp();
        let b1 = inner(b0).0.exp();
        assert!(
            (b0 - report.bids.row(2)[0]).abs() < 1e-5 * b0,
            "direct bid {} vs equalization bid {}",
            b0,
            report.bids.row(2)[0]
        );
        assert!(
            (b1 - report.bids.row(2)[1]).abs() < 1e-5 * b1,
            "direct bid {} vs equalization bid {}",
            b1,
            report.bids.row(2)[1]
        );
    }

    #[test]
    fn anarchy_bound_is_one_for_a_lone_class_and_class_count_for_symmetric_markets() {
        let lone = NetworkSpec::new(vec![1.0], vec![2.0], vec![vec![0]], vec![3.0]).unwrap();
        let report = solve_network_hte(&lone, &SolverConfig::default()).unwrap();
        assert!((report.poa_bound.unwrap() - 1.0).abs() < 1e-12);

        let symmetric = NetworkSpec::new(
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![vec![0, 1], vec![0, 1]],
            vec![4.0, 4.0],
        )
        .unwrap();
        let report = solve_network_hte(&symmetric, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        assert!((report.poa_bound.unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn anarchy_bound_requires_equal_arrival_rates() {
        let spec = NetworkSpec::new(
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![vec![0], vec![0]],
            vec![4.0],
        )
        .unwrap();
        let report = solve_network_hte(&spec, &SolverConfig::default()).unwrap();
        assert!(report.poa_bound.is_none());
        assert!(matches!(
            network_poa_bound(&report, &spec),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn anarchy_bound_dominates_the_single_market_ratio() {
        // Single-resource reduction at substantial load, where the measured
        // cost ratio against the priority benchmark is meaningful.
        let spec = NetworkSpec::new(
            vec![1.0, 1.0, 1.0],
            vec![5.0, 2.0, 1.0],
            vec![vec![0], vec![0], vec![0]],
            vec![10.0 / 3.0],
        )
        .unwrap();
        let report = solve_network_hte(&spec, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        let bound = report.poa_bound.unwrap();

        let params = SystemParams::new(vec![1.0, 1.0, 1.0], vec![5.0, 2.0, 1.0], 10.0 / 3.0, 1.0)
            .unwrap();
        let economics = poa_report(&params);
        assert!(
            bound >= economics.poa,
            "network bound {bound} under measured ratio {}",
            economics.poa
        );
        assert!(bound >= economics.poa_bound_tight);
    }
}
