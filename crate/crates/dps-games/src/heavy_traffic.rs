//! Heavy-traffic approximations: closed-form sojourn times and equilibria.
//!
//! As the load approaches one, the weighted-sharing queue collapses onto a single
//! dimension: per-class populations become proportional to `rho_i / beta_i`, and the
//! mean sojourn of a job holding weight `beta` against profile `betas` approaches
//!
//! ```text
//! V_ht(beta; betas) = 1 / ((1 - rho) * mu * beta * gamma(betas)),
//! gamma(betas) = (1/rho) * sum_i rho_i / beta_i,
//! ```
//!
//! so `(1 - rho) * |V_ht - V|` vanishes as `rho -> 1` at fixed weight ratios. Because
//! `V_ht` is separable in the job's own weight, the selfish bidding game under payment
//! `beta^alpha` has a closed-form equilibrium: with `S1 = sum_i lambda_i c_i^(-1/(alpha+1))`,
//!
//! ```text
//! beta_i = c_i^(1/(alpha+1)) * (alpha * (1 - rho) * S1 / rho)^(-1/alpha).
//! ```
//!
//! The same structure lifts to a continuum of infinitesimal classes with cost
//! distribution `F` and arrival-rate distribution `G`: the equilibrium strategy
//! function is `B(c) = c^(1/(alpha+1)) * (mu * alpha * (1 - rho) * S2)^(-1/alpha)` with
//! `S2 = E_F[c^(-1/(alpha+1))]`, and equilibria of sampled finite games converge to `B`
//! as the class count grows.
//!
//! This module provides those closed forms, the class-level heavy-traffic waiting time
//! (which keeps the deciding class's own mass inside the aggregate), and a deviation
//! probe that measures — with the *exact* solver, not the approximation — how much a
//! job can gain by scaling its equilibrium weight as the load climbs toward one.

use crate::distribution::Distribution;
use crate::equilibrium::{EquilibriumKind, EquilibriumResult};
use crate::error::{Error, Result};
use crate::exact::{
    solve_waiting_times, tagged_job_time_with_profile, PriorityVector, SystemParams,
};
use rand::Rng;

/// Precomputed aggregates for heavy-traffic formulas at one (params, profile) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyTrafficContext {
    gamma: f64,
    s1: f64,
}

impl HeavyTrafficContext {
    /// Compute `gamma(betas)` and `S1` for the given instance and weight profile.
    pub fn new(params: &SystemParams, priorities: &PriorityVector) -> Result<Self> {
        if priorities.len() != params.num_classes() {
            return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
        }
        let rho = params.load();
        let gamma = priorities
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, b)| params.class_load(i) / b)
            .sum::<f64>()
            / rho;
        let alpha = params.alpha();
        let s1 = params
            .arrival_rates()
            .iter()
            .zip(params.cost_rates())
            .map(|(l, c)| l * c.powf(-1.0 / (alpha + 1.0)))
            .sum();
        Ok(HeavyTrafficContext { gamma, s1 })
    }

    /// Aggregate inverse-weight load `gamma = (1/rho) sum_i rho_i / beta_i`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Equilibrium normalizer `S1 = sum_i lambda_i c_i^(-1/(alpha+1))`.
    pub fn s1(&self) -> f64 {
        self.s1
    }
}

/// Heavy-traffic mean sojourn of a tagged job holding weight `beta`.
pub fn v_ht(params: &SystemParams, priorities: &PriorityVector, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("tagged weight {beta} must be positive and finite")));
    }
    let ctx = HeavyTrafficContext::new(params, priorities)?;
    let slack = 1.0 - params.load();
    Ok(1.0 / (slack * params.service_rate() * beta * ctx.gamma()))
}

/// Closed-form job-level heavy-traffic equilibrium weights.
///
/// Returns an `EquilibriumResult` whose residual is the worst normalized
/// first-order-condition defect of the closed form (analytically zero; numerically
/// rounding-level).
pub fn hte_job_level(params: &SystemParams) -> Result<EquilibriumResult> {
    let alpha = params.alpha();
    let rho = params.load();
    let s1: f64 = params
        .arrival_rates()
        .iter()
        .zip(params.cost_rates())
        .map(|(l, c)| l * c.powf(-1.0 / (alpha + 1.0)))
        .sum();
    let scale = (alpha * (1.0 - rho) * s1 / rho).powf(-1.0 / alpha);
    let weights: Vec<f64> = params
        .cost_rates()
        .iter()
        .map(|c| c.powf(1.0 / (alpha + 1.0)) * scale)
        .collect();
    let priorities = PriorityVector::new(weights)?;
    let residual = hte_foc_residual(params, &priorities)?;
    Ok(EquilibriumResult::closed_form(priorities, EquilibriumKind::JobHte, residual))
}

/// Worst normalized first-order-condition defect of a profile for the job-level
/// heavy-traffic game: each class's weight should satisfy
/// `alpha * beta^(alpha-1) = c_i / ((1-rho) mu gamma beta^2)`.
pub fn hte_foc_residual(params: &SystemParams, priorities: &PriorityVector) -> Result<f64> {
    let ctx = HeavyTrafficContext::new(params, priorities)?;
    let slack = 1.0 - params.load();
    let mu = params.service_rate();
    let alpha = params.alpha();
    let mut worst = 0.0f64;
    for (i, &b) in priorities.as_slice().iter().enumerate() {
        let payment_term = alpha * b.powf(alpha - 1.0);
        let waiting_term = params.cost_rates()[i] / (slack * mu * ctx.gamma() * b * b);
        worst = worst.max((payment_term - waiting_term).abs() / payment_term.abs());
    }
    Ok(worst)
}

/// Class-level heavy-traffic waiting time of class `i` at the given profile.
///
/// Unlike the tagged-job form, the deciding class's own arrival mass stays inside the
/// aggregate: with `D_i = sum_{j != i} rho_j / beta_j`,
///
/// ```text
/// W_i = rho / ((1 - rho) * mu * (beta_i * D_i + rho_i)).
/// ```
///
/// For a single class this is constant in the weight — moving every job of the only
/// class together changes no ratios.
pub fn w_ht_class(params: &SystemParams, priorities: &PriorityVector, i: usize) -> Result<f64> {
    if priorities.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
    }
    if i >= params.num_classes() {
        return Err(Error::IndexOutOfRange { index: i, len: params.num_classes() });
    }
    let rho = params.load();
    let d_i: f64 = priorities
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, b)| params.class_load(j) / b)
        .sum();
    let beta = priorities.as_slice()[i];
    Ok(rho / ((1.0 - rho) * params.service_rate() * (beta * d_i + params.class_load(i))))
}

/// Parameters of the limiting game with a continuum of infinitesimal classes.
///
/// Costs are distributed as `F`, per-class arrival rates as `G`, and `service_rate`
/// is the limiting ratio of total capacity to class count, so the limiting load is
/// `rho = E_G[lambda] / service_rate`.
#[derive(Debug, Clone)]
pub struct LimitingGameSpec {
    cost_distribution: Distribution,
    arrival_distribution: Distribution,
    service_rate: f64,
    load: f64,
    priority_support: (f64, f64),
}

impl LimitingGameSpec {
    pub fn new(
        cost_distribution: Distribution,
        arrival_distribution: Distribution,
        service_rate: f64,
        priority_support: (f64, f64),
    ) -> Result<Self> {
        if !(service_rate.is_finite() && service_rate > 0.0) {
            return Err(Error::InvalidParameter(format!("service rate {service_rate} must be positive and finite")));
        }
        let (p_lo, p_hi) = priority_support;
        if !(p_lo.is_finite() && p_hi.is_finite() && 0.0 < p_lo && p_lo < p_hi) {
            return Err(Error::InvalidParameter(format!("priority support [{p_lo}, {p_hi}] must satisfy 0 < lo < hi")));
        }
        let mean_arrival = arrival_distribution.mean()?;
        let load = mean_arrival / service_rate;
        if load >= 1.0 {
            return Err(Error::UnstableSystem { rho: load });
        }
        Ok(LimitingGameSpec {
            cost_distribution,
            arrival_distribution,
            service_rate,
            load,
            priority_support,
        })
    }

    pub fn cost_distribution(&self) -> &Distribution {
        &self.cost_distribution
    }

    pub fn arrival_distribution(&self) -> &Distribution {
        &self.arrival_distribution
    }

    /// Limiting per-class service rate (total capacity over class count).
    pub fn service_rate(&self) -> f64 {
        self.service_rate
    }

    /// Limiting load `rho = E_G[lambda] / service_rate`, strictly below one.
    pub fn load(&self) -> f64 {
        self.load
    }

    pub fn priority_support(&self) -> (f64, f64) {
        self.priority_support
    }
}

/// Equilibrium strategy function of the limiting game: a closed-form map from a
/// class's cost rate to its priority weight.
#[derive(Debug, Clone)]
pub struct StrategyFunction {
    alpha: f64,
    scale: f64,
    s2: f64,
    gamma: f64,
    support: (f64, f64),
}

impl StrategyFunction {
    /// Equilibrium weight for cost `c`: `B(c) = scale * c^(1/(alpha+1))`, increasing in `c`.
    pub fn priority(&self, c: f64) -> f64 {
        self.scale * c.powf(1.0 / (self.alpha + 1.0))
    }

    /// Normalizing constant `S2 = E_F[c^(-1/(alpha+1))]`.
    pub fn normalizing_constant(&self) -> f64 {
        self.s2
    }

    /// Aggregate inverse weight at the equilibrium, `gamma(B) = E_F[1 / B(c)]`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Cost support the strategy was built for.
    pub fn cost_support(&self) -> (f64, f64) {
        self.support
    }
}

/// Closed-form equilibrium of the limiting game at payment exponent `alpha`.
///
/// `S2` and `gamma(B)` are computed by adaptive quadrature against the cost
/// distribution; the only failure mode is quadrature that cannot reach tolerance.
pub fn limiting_hte(spec: &LimitingGameSpec, alpha: f64) -> Result<StrategyFunction> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("payment exponent {alpha} must be positive and finite")));
    }
    let f = spec.cost_distribution();
    let s2 = f.expectation(|c| c.powf(-1.0 / (alpha + 1.0)))?;
    let scale = (spec.service_rate() * alpha * (1.0 - spec.load()) * s2).powf(-1.0 / alpha);
    let gamma = f.expectation(|c| 1.0 / (scale * c.powf(1.0 / (alpha + 1.0))))?;
    Ok(StrategyFunction { alpha, scale, s2, gamma, support: f.support() })
}

/// Scaled per-class gains from deviating off the heavy-traffic equilibrium in one
/// instance of a load sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationGain {
    /// Load of the instance the gains were evaluated at.
    pub rho: f64,
    /// `(1 - rho) * [cost at equilibrium - cost after scaling own weight by delta]`,
    /// per class, computed with the exact sojourn solver: the scaled amount the
    /// deviation saves. Positive values mean deviating beats the equilibrium
    /// weight by that margin; the limit theory drives the values nonpositive as
    /// the load approaches one.
    pub per_class: Vec<f64>,
}

/// Evaluate deviation gains along a load sequence.
///
/// Every instance must share arrival rates, cost rates, and payment exponent (only
/// the service rate may differ), so the sequence reads as one game pushed toward
/// saturation. For each instance the closed-form equilibrium is computed, and each
/// class's payoff there is compared — via the exact solver — with the payoff of
/// unilaterally scaling its own weight by `delta`. The theory says the scaled
/// advantage of deviating cannot stay positive as the load approaches one; callers
/// assert on the final element.
pub fn deviation_check(params_seq: &[SystemParams], delta: f64) -> Result<Vec<DeviationGain>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("deviation factor {delta} must be positive and finite")));
    }
    let Some(first) = params_seq.first() else {
        return Ok(Vec::new());
    };
    for p in params_seq {
        if p.cost_rates() != first.cost_rates()
            || p.arrival_rates() != first.arrival_rates()
            || p.alpha() != first.alpha()
        {
            return Err(Error::InvalidParameter(
                "deviation sequence must vary only the service rate".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(params_seq.len());
    for params in params_seq {
        let eq = hte_job_level(params)?;
        let betas = eq.priorities();
        let profile = solve_waiting_times(params, betas)?;
        let slack = 1.0 - params.load();
        let alpha = params.alpha();
        let mut per_class = Vec::with_capacity(params.num_classes());
        for (i, &b) in betas.as_slice().iter().enumerate() {
            let c = params.cost_rates()[i];
            let at_eq = c * tagged_job_time_with_profile(params, betas, &profile, b)?.value()
                + b.powf(alpha);
            let dev_beta = delta * b;
            let at_dev = c * tagged_job_time_with_profile(params, betas, &profile, dev_beta)?.value()
                + dev_beta.powf(alpha);
            per_class.push(slack * (at_eq - at_dev));
        }
        out.push(DeviationGain { rho: params.load(), per_class });
    }
    Ok(out)
}

/// Draw a finite `n`-class game whose equilibrium approximates the limiting strategy.
///
/// Classes get i.i.d. costs from `F` and raw arrival rates from `G`; each class
/// receives arrival rate `lambda_k / n` while `spec`'s service rate serves as the
/// *total* capacity, so the finite equilibrium normalizer concentrates at
/// `E_G[lambda] * S2` by the law of large numbers. The continuum game is defined at
/// a fixed aggregate load, so the raw draws are rescaled to hold the total arrival
/// rate at `E_G[lambda]` exactly (the per-class mix stays random); without that, a
/// small-`n` game can come out overloaded outright and no concentration statement
/// holds sample-by-sample. Costs are sorted descending; exact ties are split by
/// subtracting the next RNG draw times `1e-9` so class identities stay distinct.
pub fn sample_finite_game<R: Rng>(
    spec: &LimitingGameSpec,
    n: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<SystemParams> {
    if n == 0 {
        return Err(Error::InvalidParameter("finite game needs at least one class".into()));
    }
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let c = spec.cost_distribution().sample(rng);
            let l = spec.arrival_distribution().sample(rng) / n as f64;
            (c, l)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for i in 1..pairs.len() {
        if pairs[i].0 >= pairs[i - 1].0 {
            pairs[i].0 = pairs[i - 1].0 - rng.gen::<f64>() * 1e-9;
        }
    }
    let mean_arrival = spec.load() * spec.service_rate();
    let raw_total: f64 = pairs.iter().map(|(_, l)| l).sum();
    let rescale = mean_arrival / raw_total;
    let (costs, arrivals): (Vec<f64>, Vec<f64>) =
        pairs.into_iter().map(|(c, l)| (c, l * rescale)).unzip();
    SystemParams::new(arrivals, costs, spec.service_rate(), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::tagged_job_time;
    use crate::testutil::{random_params, random_priorities};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn v_ht_matches_hand_computed_example() {
        // lambda = (4.5, 4.5), mu = 10, beta = (1, 2), tagged 1:
        // gamma = (1/0.9)(0.45/1 + 0.45/2) = 0.75, V = 1/(0.1 * 10 * 1 * 0.75) = 4/3.
        let params = SystemParams::new(vec![4.5, 4.5], vec![2.0, 1.0], 10.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![1.0, 2.0]).unwrap();
        let v = v_ht(&params, &prio, 1.0).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn v_ht_with_equal_weights_collapses_to_single_class_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let params = random_params(&mut rng, 1, 6);
            let b = 0.3 + rand::Rng::gen::<f64>(&mut rng) * 5.0;
            let prio = PriorityVector::uniform(params.num_classes(), b).unwrap();
            let v = v_ht(&params, &prio, b).unwrap();
            let want = 1.0 / ((1.0 - params.load()) * params.service_rate());
            assert!((v - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn equilibrium_matches_worked_example_and_foc() {
        // c = (4, 1), lambda = (1, 1), mu = 4, alpha = 1: S1 = 1.5, beta = (4/3, 2/3).
        let params = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0).unwrap();
        let eq = hte_job_level(&params).unwrap();
        let b = eq.priorities().as_slice();
        assert!((b[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((b[1] - 2.0 / 3.0).abs() < 1e-14);
        assert!(eq.converged());
        assert!(eq.residual() < 1e-10);
    }

    #[test]
    fn equilibrium_foc_ratio_and_scaling_laws_hold_at_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let params = random_params(&mut rng, 1, 12);
            let eq = hte_job_level(&params).unwrap();
            assert!(hte_foc_residual(&params, eq.priorities()).unwrap() < 1e-10);

            // Ratio law: beta_i / beta_j = (c_i / c_j)^(1/(alpha+1)).
            let b = eq.priorities().as_slice();
            let c = params.cost_rates();
            let e = 1.0 / (params.alpha() + 1.0);
            for i in 1..b.len() {
                let got = b[i] / b[0];
                let want = (c[i] / c[0]).powf(e);
                assert!((got - want).abs() < 1e-12 * want.max(1.0));
            }

            // Cost scaling: multiplying every cost by zeta scales weights by zeta^(1/alpha).
            let zeta = 3.7;
            let scaled = SystemParams::new(
                params.arrival_rates().to_vec(),
                params.cost_rates().iter().map(|c| c * zeta).collect(),
                params.service_rate(),
                params.alpha(),
            )
            .unwrap();
            let eq2 = hte_job_level(&scaled).unwrap();
            let factor = zeta.powf(1.0 / params.alpha());
            for (bi, bi2) in b.iter().zip(eq2.priorities().as_slice()) {
                assert!((bi2 - bi * factor).abs() < 1e-12 * bi2.max(1.0));
            }
        }
    }

    #[test]
    fn equilibrium_ratios_do_not_depend_on_load() {
        let params = SystemParams::new(vec![1.0, 2.0, 0.5], vec![5.0, 2.0, 1.0], 10.0, 1.3).unwrap();
        let mut ratios = Vec::new();
        for rho in [0.5, 0.9, 0.99] {
            let eq = hte_job_level(&params.with_load(rho).unwrap()).unwrap();
            let b = eq.priorities().as_slice();
            ratios.push([b[0] / b[2], b[1] / b[2]]);
        }
        for r in &ratios[1..] {
            assert!((r[0] - ratios[0][0]).abs() < 1e-12 * ratios[0][0]);
            assert!((r[1] - ratios[0][1]).abs() < 1e-12 * ratios[0][1]);
        }
    }

    #[test]
    fn equilibrium_weights_approach_one_for_large_alpha_and_blow_up_for_small() {
        let base = SystemParams::new(vec![1.0, 1.0], vec![5.0, 1.0], 4.0, 1.0).unwrap();
        let mut gaps = Vec::new();
        for alpha in [1.0, 10.0, 100.0, 1000.0] {
            let eq = hte_job_level(&base.with_alpha(alpha).unwrap()).unwrap();
            let gap = eq
                .priorities()
                .as_slice()
                .iter()
                .map(|b| (b - 1.0).abs())
                .fold(0.0, f64::max);
            gaps.push(gap);
        }
        assert!(gaps[2] < gaps[1] && gaps[3] < gaps[2], "tail not monotone: {gaps:?}");
        assert!(gaps[3] < 0.05);

        let mut lows = Vec::new();
        for alpha in [1.0, 0.1, 0.01] {
            let eq = hte_job_level(&base.with_alpha(alpha).unwrap()).unwrap();
            lows.push(eq.priorities().as_slice()[1]);
        }
        assert!(lows[1] > lows[0] && lows[2] > lows[1]);
        assert!(lows[2] > 1e3);
    }

    #[test]
    fn class_level_time_consistency_checks() {
        // Equal weights: cancellation leaves 1/((1-rho) mu).
        let params = SystemParams::new(vec![1.0, 1.0, 1.0], vec![3.0, 2.0, 1.0], 6.0, 1.0).unwrap();
        let prio = PriorityVector::uniform(3, 2.5).unwrap();
        let w = w_ht_class(&params, &prio, 1).unwrap();
        let want = 1.0 / ((1.0 - params.load()) * params.service_rate());
        assert!((w - want).abs() < 1e-13);

        // K=1: constant in the weight.
        let single = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0).unwrap();
        let w1 = w_ht_class(&single, &PriorityVector::new(vec![0.2]).unwrap(), 0).unwrap();
        let w2 = w_ht_class(&single, &PriorityVector::new(vec![50.0]).unwrap(), 0).unwrap();
        assert!((w1 - w2).abs() < 1e-13);
        assert!((w1 - 1.0).abs() < 1e-13); // 1/((1-0.5) * 2)

        // Tagged weight equal to the class weight: matches the job-level form.
        let params = SystemParams::new(vec![4.5, 4.5], vec![2.0, 1.0], 10.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![1.0, 2.0]).unwrap();
        let class_form = w_ht_class(&params, &prio, 0).unwrap();
        let job_form = v_ht(&params, &prio, 1.0).unwrap();
        assert!((class_form - job_form).abs() < 1e-13);
    }

    #[test]
    fn approximation_error_scales_away_near_saturation() {
        // (1 - rho) |V_ht - V| must fall as rho climbs with fixed weight ratios.
        let base = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![2.0, 1.0]).unwrap();
        let mut errs = Vec::new();
        for rho in [0.9, 0.99, 0.999] {
            let p = base.with_load(rho).unwrap();
            let approx = v_ht(&p, &prio, 1.5).unwrap();
            let exact = tagged_job_time(&p, &prio, 1.5).unwrap().value();
            errs.push((1.0 - rho) * (approx - exact).abs());
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "not decreasing: {errs:?}");
        assert!(errs[2] < 0.01);
    }

    #[test]
    fn deviation_never_helps_near_saturation() {
        let base = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0).unwrap();
        let seq: Vec<SystemParams> =
            [0.9, 0.99, 0.999].iter().map(|r| base.with_load(*r).unwrap()).collect();

        // delta = 1 is the identity deviation: gains are exactly zero.
        for g in deviation_check(&seq, 1.0).unwrap() {
            assert!(g.per_class.iter().all(|x| *x == 0.0));
        }

        for delta in [0.5, 2.0] {
            let gains = deviation_check(&seq, delta).unwrap();
            let last = gains.last().unwrap();
            for g in &last.per_class {
                assert!(*g <= 1e-3, "delta {delta}: scaled deviation gain {g} > 1e-3");
            }
        }

        // Same acceptance shape on a two-class instance.
        let base2 = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0).unwrap();
        let seq2: Vec<SystemParams> =
            [0.9, 0.99, 0.999].iter().map(|r| base2.with_load(*r).unwrap()).collect();
        let gains = deviation_check(&seq2, 0.5).unwrap();
        for g in &gains.last().unwrap().per_class {
            assert!(*g <= 1e-3);
        }
    }

    #[test]
    fn deviation_sequence_rejects_mismatched_instances() {
        let a = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0).unwrap();
        let b = SystemParams::new(vec![1.0], vec![2.0], 4.0, 1.0).unwrap();
        assert!(deviation_check(&[a.clone(), b], 2.0).is_err());
        assert!(deviation_check(&[a], 0.0).is_err());
    }

    #[test]
    fn limiting_point_mass_reduces_to_single_class_closed_form() {
        // F concentrated at c=1, mu=1, rho=0.5, alpha=1: S2 = 1 and B(1) = 2.
        let spec = LimitingGameSpec::new(
            Distribution::point(1.0).unwrap(),
            Distribution::point(0.5).unwrap(),
            1.0,
            (1e-6, 1e6),
        )
        .unwrap();
        let strat = limiting_hte(&spec, 1.0).unwrap();
        assert!((strat.normalizing_constant() - 1.0).abs() < 1e-14);
        assert!((strat.priority(1.0) - 2.0).abs() < 1e-12);

        // Must coincide with the one-class finite closed form at the same load.
        let single = SystemParams::new(vec![0.5], vec![1.0], 1.0, 1.0).unwrap();
        let eq = hte_job_level(&single).unwrap();
        assert!((strat.priority(1.0) - eq.priorities().as_slice()[0]).abs() < 1e-10);

        // First-order condition of the limiting game at the strategy itself.
        let gamma = strat.gamma();
        let b = strat.priority(1.0);
        let foc = 1.0 / (0.5 * 1.0 * gamma * b * b) - 1.0;
        assert!(foc.abs() < 1e-10, "limiting FOC residual {foc}");
    }

    #[test]
    fn limiting_strategy_is_increasing_and_quadrature_matches_closed_form() {
        let spec = LimitingGameSpec::new(
            Distribution::uniform(1.0, 11.0).unwrap(),
            Distribution::uniform(0.5, 1.5).unwrap(),
            1.0 / 0.9,
            (1e-6, 1e6),
        )
        .unwrap();
        assert!((spec.load() - 0.9).abs() < 1e-12);
        for alpha in [0.5, 1.0, 2.0] {
            let strat = limiting_hte(&spec, alpha).unwrap();
            // S2 for U[1,11]: integral of c^(-1/(alpha+1)) / 10.
            let p = 1.0 - 1.0 / (alpha + 1.0);
            let want = (11f64.powf(p) - 1.0) / (10.0 * p);
            assert!((strat.normalizing_constant() - want).abs() < 1e-9);
            // gamma(B) should equal S2 / scale; cross-check through priority().
            let implied = strat.normalizing_constant() / strat.priority(1.0);
            assert!((strat.gamma() - implied).abs() < 1e-9 * implied);
            // Strictly increasing in cost.
            let mut last = 0.0;
            for c in [1.0, 2.0, 5.0, 11.0] {
                let b = strat.priority(c);
                assert!(b > last);
                last = b;
            }
        }
    }

    #[test]
    fn sampled_finite_games_approach_the_limiting_strategy() {
        let spec = LimitingGameSpec::new(
            Distribution::uniform(1.0, 11.0).unwrap(),
            Distribution::uniform(0.5, 1.5).unwrap(),
            1.0 / 0.9,
            (1e-6, 1e6),
        )
        .unwrap();
        let strat = limiting_hte(&spec, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut gaps = Vec::new();
        for n in [10usize, 1000] {
            let game = sample_finite_game(&spec, n, 1.0, &mut rng).unwrap();
            let eq = hte_job_level(&game).unwrap();
            let gap = eq
                .priorities()
                .as_slice()
                .iter()
                .zip(game.cost_rates())
                .map(|(b, c)| (b - strat.priority(*c)).abs())
                .fold(0.0, f64::max);
            gaps.push(gap);
        }
        assert!(gaps[1] < gaps[0], "no concentration: {gaps:?}");
    }

    #[test]
    fn random_tagged_weights_respect_heavy_traffic_monotonicity() {
        // V_ht is strictly decreasing in the tagged weight.
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let params = random_params(&mut rng, 2, 5);
        let prio = random_priorities(&mut rng, params.num_classes());
        let mut last = f64::INFINITY;
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let v = v_ht(&params, &prio, beta).unwrap();
            assert!(v < last);
            last = v;
        }
    }
}
