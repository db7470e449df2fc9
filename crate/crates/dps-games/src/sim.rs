//! Discrete-event simulation oracle, independent of every analytic formula in the
//! crate: discriminatory processor sharing (two implementations), preemptive strict
//! priority, and random-order-of-service, plus tagged-probe sojourn estimation.
//!
//! With exponential service at a common rate the in-system composition is a Markov
//! jump chain on the per-class counts: arrivals occur at the class rates, and when
//! the server is busy a completion occurs at the full service rate and hits class
//! `i` with probability `n_i beta_i / sum_m n_m beta_m`. Within a class every job is
//! exchangeable, so a uniformly chosen member departs. A second implementation
//! tracks per-job residual work explicitly (each job drains at its proportional
//! share of the server) and must be statistically indistinguishable — that
//! equivalence is itself one of the cross-checks.
//!
//! Replications run in parallel; replication `r` uses stream `r` of a counter-based
//! generator seeded with the configured 64-bit seed (ChaCha8: seed picks the key,
//! stream picks the nonce), so results are bit-identical for identical configs
//! regardless of thread scheduling. Standard errors come from across-replication
//! sample variance — no within-run batching, no autocorrelation handling.

use crate::error::{Error, Result};
use crate::exact::{PriorityVector, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Service discipline selector (used by config files; the library ops are
/// discipline-specific).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Dps,
    StrictPriority,
    Ros,
}

impl Policy {
    pub fn label(&self) -> &'static str {
        match self {
            Policy::Dps => "dps",
            Policy::StrictPriority => "strict-priority",
            Policy::Ros => "ros",
        }
    }
}

/// Simulation run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Initial stretch discarded from every estimate, in time units.
    pub warmup_time: f64,
    /// Measured stretch following warmup, in time units.
    pub measurement_time: f64,
    /// Independent replications (at least 2; standard errors need variance).
    pub replications: usize,
    /// Seed of the generator; replication `r` uses stream `r` under this seed.
    pub rng_seed: u64,
    /// Discipline selector for config-driven dispatch.
    pub policy: Policy,
}

/// Name of the generator algorithm, recorded in output metadata: reproducing a run
/// requires the algorithm, the seed, and the stream assignment.
pub const RNG_ALGORITHM: &str = "chacha8 (64-bit seed; stream = replication index)";

impl SimConfig {
    /// Defaults scaled to the instance: warmup of ten relaxation times
    /// `10/((1-rho) mu)`, measurement sized to roughly one million events (the
    /// long-run event rate is twice the arrival rate), four replications.
    pub fn defaults_for(params: &SystemParams, rng_seed: u64, policy: Policy) -> Self {
        SimConfig {
            warmup_time: 10.0 / ((1.0 - params.load()) * params.service_rate()),
            measurement_time: 1.0e6 / (2.0 * params.total_arrival_rate()),
            replications: 4,
            rng_seed,
            policy,
        }
    }

    /// Reject non-positive durations and replication counts too small for a
    /// standard error.
    pub fn validate(&self) -> Result<()> {
        if !(self.warmup_time > 0.0 && self.warmup_time.is_finite())
            || !(self.measurement_time > 0.0 && self.measurement_time.is_finite())
        {
            return Err(Error::InvalidParameter("simulation durations must be positive and finite".into()));
        }
        if self.replications < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 replications for a standard error, got {}",
                self.replications
            )));
        }
        Ok(())
    }
}

/// Point estimate with an across-replication standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
    pub label: String,
}

impl SimEstimate {
    fn aggregate(label: String, per_replication: &[f64]) -> SimEstimate {
        let n = per_replication.len();
        let mean = per_replication.iter().sum::<f64>() / n as f64;
        let variance =
            per_replication.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        SimEstimate { mean, std_error: (variance / n as f64).sqrt(), replications: n, label }
    }

    /// Absolute deviation from `reference` in units of this standard error.
    pub fn deviation_in_se(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.std_error
    }
}

/// Per-class sojourn and occupancy estimates from one discipline.
#[derive(Debug, Clone, PartialEq)]
pub struct DpsEstimates {
    /// Mean sojourn per class, labeled `W_i`.
    pub waits: Vec<SimEstimate>,
    /// Time-average in-system count per class, labeled `E[N_i]`.
    pub counts: Vec<SimEstimate>,
}

fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    // Inversion on 1-u keeps the argument of ln inside (0, 1].
    -(1.0 - rng.gen::<f64>()).ln() / rate
}

/// Categorical draw proportional to `weights` (caller supplies their sum).
fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64], total: f64) -> usize {
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        x -= w;
        if x <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Clip of `[from, to]` inside the measurement window, for time averages.
fn measured_overlap(from: f64, to: f64, warmup: f64, horizon: f64) -> f64 {
    (to.min(horizon) - from.max(warmup)).max(0.0)
}

struct ReplicationTotals {
    wait_sums: Vec<f64>,
    wait_counts: Vec<usize>,
    occupancy_areas: Vec<f64>,
}

impl ReplicationTotals {
    fn new(k: usize) -> Self {
        ReplicationTotals {
            wait_sums: vec![0.0; k],
            wait_counts: vec![0; k],
            occupancy_areas: vec![0.0; k],
        }
    }

    fn mean_wait(&self, i: usize) -> f64 {
        self.wait_sums[i] / self.wait_counts[i] as f64
    }
}

fn assemble_dps_estimates(config: &SimConfig, totals: Vec<ReplicationTotals>, k: usize) -> DpsEstimates {
    let waits = (0..k)
        .map(|i| {
            let per_rep: Vec<f64> = totals.iter().map(|t| t.mean_wait(i)).collect();
            SimEstimate::aggregate(format!("W_{i}"), &per_rep)
        })
        .collect();
    let counts = (0..k)
        .map(|i| {
            let per_rep: Vec<f64> =
                totals.iter().map(|t| t.occupancy_areas[i] / config.measurement_time).collect();
            SimEstimate::aggregate(format!("E[N_{i}]"), &per_rep)
        })
        .collect();
    DpsEstimates { waits, counts }
}

/// One replication of the rate-based jump chain.
fn dps_replication(
    params: &SystemParams,
    priorities: &PriorityVector,
    config: &SimConfig,
    replication: usize,
) -> ReplicationTotals {
    let k = params.num_classes();
    let lambda = params.arrival_rates();
    let total_arrival = params.total_arrival_rate();
    let beta = priorities.as_slice();
    let mu = params.service_rate();
    let horizon = config.warmup_time + config.measurement_time;

    let mut rng = replication_rng(config.rng_seed, replication);
    let mut in_system: Vec<Vec<f64>> = vec![Vec::new(); k]; // arrival stamps per class
    let mut totals = ReplicationTotals::new(k);
    let mut t = 0.0;

    while t < horizon {
        let busy = in_system.iter().any(|q| !q.is_empty());
        let total_rate = total_arrival + if busy { mu } else { 0.0 };
        let t_next = t + exponential(&mut rng, total_rate);
        for (i, q) in in_system.iter().enumerate() {
            totals.occupancy_areas[i] +=
                q.len() as f64 * measured_overlap(t, t_next, config.warmup_time, horizon);
        }
        if t_next >= horizon {
            break;
        }
        t = t_next;

        if rng.gen::<f64>() * total_rate < total_arrival {
            let class = pick_weighted(&mut rng, lambda, total_arrival);
            in_system[class].push(t);
        } else {
            // Completion: class proportional to n_i beta_i, member uniform
            // (same-class jobs are exchangeable).
            let weights: Vec<f64> =
                in_system.iter().zip(beta).map(|(q, b)| q.len() as f64 * b).collect();
            let total_weight: f64 = weights.iter().sum();
            let class = pick_weighted(&mut rng, &weights, total_weight);
            let member = rng.gen_range(0..in_system[class].len());
            let arrived = in_system[class].swap_remove(member);
            if arrived >= config.warmup_time {
                totals.wait_sums[class] += t - arrived;
                totals.wait_counts[class] += 1;
            }
        }
    }
    totals
}

/// Estimate per-class mean sojourns and occupancies under discriminatory processor
/// sharing via the rate-based jump chain.
pub fn simulate_dps(
    params: &SystemParams,
    priorities: &PriorityVector,
    config: &SimConfig,
) -> Result<DpsEstimates> {
    config.validate()?;
    if priorities.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
    }
    let totals: Vec<ReplicationTotals> = (0..config.replications)
        .into_par_iter()
        .map(|r| dps_replication(params, priorities, config, r))
        .collect();
    Ok(assemble_dps_estimates(config, totals, params.num_classes()))
}

/// One replication of the per-job residual-work dynamics: job `m` of class `i`
/// drains at rate `mu beta_i / sum_jobs beta`, completing when its exponential work
/// requirement is exhausted. No step exploits memorylessness of the service state.
fn dps_residual_replication(
    params: &SystemParams,
    priorities: &PriorityVector,
    config: &SimConfig,
    replication: usize,
) -> ReplicationTotals {
    struct Job {
        class: usize,
        arrived: f64,
        remaining_work: f64,
    }

    let k = params.num_classes();
    let lambda = params.arrival_rates();
    let total_arrival = params.total_arrival_rate();
    let beta = priorities.as_slice();
    let mu = params.service_rate();
    let horizon = config.warmup_time + config.measurement_time;

    let mut rng = replication_rng(config.rng_seed, replication);
    let mut jobs: Vec<Job> = Vec::new();
    let mut totals = ReplicationTotals::new(k);
    let mut t = 0.0;
    let mut next_arrival = exponential(&mut rng, total_arrival);

    while t < horizon {
        let weight_total: f64 = jobs.iter().map(|j| beta[j.class]).sum();
        // Earliest completion under the current shares, if anyone is in service.
        let completion = jobs
            .iter()
            .enumerate()
            .map(|(idx, j)| (idx, j.remaining_work * weight_total / (mu * beta[j.class])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let (event_dt, completing) = match completion {
            Some((idx, dt)) if dt < next_arrival - t => (dt, Some(idx)),
            _ => (next_arrival - t, None),
        };
        let t_next = t + event_dt;
        for j in &jobs {
            totals.occupancy_areas[j.class] +=
                measured_overlap(t, t_next, config.warmup_time, horizon);
        }
        if t_next >= horizon {
            break;
        }
        // Drain everyone's share over the elapsed stretch.
        for j in jobs.iter_mut() {
            j.remaining_work -= event_dt * mu * beta[j.class] / weight_total;
        }
        t = t_next;

        match completing {
            Some(idx) => {
                let done = jobs.swap_remove(idx);
                if done.arrived >= config.warmup_time {
                    totals.wait_sums[done.class] += t - done.arrived;
                    totals.wait_counts[done.class] += 1;
                }
            }
            None => {
                let class = pick_weighted(&mut rng, lambda, total_arrival);
                jobs.push(Job {
                    class,
                    arrived: t,
                    remaining_work: exponential(&mut rng, 1.0),
                });
                next_arrival = t + exponential(&mut rng, total_arrival);
            }
        }
    }
    totals
}

/// Same estimates as [`simulate_dps`], from the independent per-job residual-work
/// implementation. Kept public so the two dynamics can be cross-checked.
pub fn simulate_dps_residual(
    params: &SystemParams,
    priorities: &PriorityVector,
    config: &SimConfig,
) -> Result<DpsEstimates> {
    config.validate()?;
    if priorities.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
    }
    let totals: Vec<ReplicationTotals> = (0..config.replications)
        .into_par_iter()
        .map(|r| dps_residual_replication(params, priorities, config, r))
        .collect();
    Ok(assemble_dps_estimates(config, totals, params.num_classes()))
}

/// Probe arrivals use a rate this far below the system's natural drain rate
/// `(1-rho) mu`, so the perturbation a probe causes has long decayed before the
/// next probe lands. The tagged-job value is defined for a measure-zero probe;
/// at one tenth of the drain rate the probes' own traffic still inflated the
/// estimate by about a percent, visible once standard errors drop below that.
const PROBE_RATE_FRACTION: f64 = 0.01;

fn tagged_replication(
    params: &SystemParams,
    priorities: &PriorityVector,
    probe_weight: f64,
    config: &SimConfig,
    replication: usize,
) -> f64 {
    let k = params.num_classes();
    let lambda = params.arrival_rates();
    let total_arrival = params.total_arrival_rate();
    let beta = priorities.as_slice();
    let mu = params.service_rate();
    let probe_rate = PROBE_RATE_FRACTION * (1.0 - params.load()) * mu;
    let horizon = config.warmup_time + config.measurement_time;

    let mut rng = replication_rng(config.rng_seed, replication);
    let mut counts = vec![0usize; k];
    let mut probe: Option<f64> = None; // arrival stamp of the active probe
    let mut sojourn_sum = 0.0;
    let mut sojourn_count = 0usize;
    let mut t = 0.0;

    loop {
        let busy = counts.iter().any(|&n| n > 0) || probe.is_some();
        let total_rate = total_arrival + probe_rate + if busy { mu } else { 0.0 };
        t += exponential(&mut rng, total_rate);
        if t >= horizon {
            break;
        }
        let mut x = rng.gen::<f64>() * total_rate;
        if x < total_arrival {
            let class = pick_weighted(&mut rng, lambda, total_arrival);
            counts[class] += 1;
        } else if x < total_arrival + probe_rate {
            // One probe at a time: a probe landing while one is active is dropped.
            if probe.is_none() {
                probe = Some(t);
            }
        } else {
            // Completion. The probe competes with weight `probe_weight`.
            let mut weight_total: f64 =
                counts.iter().zip(beta).map(|(n, b)| *n as f64 * b).sum();
            if probe.is_some() {
                weight_total += probe_weight;
            }
            x = rng.gen::<f64>() * weight_total;
            let mut chosen: Option<usize> = None;
            for i in 0..k {
                x -= counts[i] as f64 * beta[i];
                if x <= 0.0 {
                    chosen = Some(i);
                    break;
                }
            }
            match chosen {
                Some(i) => counts[i] -= 1,
                None => {
                    let arrived = probe.take().expect("probe weight only present when active");
                    if arrived >= config.warmup_time {
                        sojourn_sum += t - arrived;
                        sojourn_count += 1;
                    }
                }
            }
        }
    }
    sojourn_sum / sojourn_count as f64
}

/// Estimate the stationary sojourn of a tagged job holding weight `beta` against the
/// population profile: rare Poisson probes join the dynamics (one at a time), and
/// their completed sojourns average to the tagged-job time.
pub fn simulate_tagged(
    params: &SystemParams,
    priorities: &PriorityVector,
    beta: f64,
    config: &SimConfig,
) -> Result<SimEstimate> {
    config.validate()?;
    if priorities.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!("probe weight {beta} must be positive")));
    }
    let per_rep: Vec<f64> = (0..config.replications)
        .into_par_iter()
        .map(|r| tagged_replication(params, priorities, beta, config, r))
        .collect();
    Ok(SimEstimate::aggregate("V(beta)".into(), &per_rep))
}

fn strict_priority_replication(
    params: &SystemParams,
    config: &SimConfig,
    replication: usize,
) -> Vec<f64> {
    let k = params.num_classes();
    let lambda = params.arrival_rates();
    let total_arrival = params.total_arrival_rate();
    let mu = params.service_rate();
    let horizon = config.warmup_time + config.measurement_time;

    let mut rng = replication_rng(config.rng_seed, replication);
    let mut counts = vec![0usize; k];
    let mut areas = vec![0.0; k];
    let mut t = 0.0;

    loop {
        let serving = counts.iter().position(|&n| n > 0);
        let total_rate = total_arrival + if serving.is_some() { mu } else { 0.0 };
        let t_next = t + exponential(&mut rng, total_rate);
        for i in 0..k {
            areas[i] += counts[i] as f64 * measured_overlap(t, t_next, config.warmup_time, horizon);
        }
        if t_next >= horizon {
            break;
        }
        t = t_next;
        if rng.gen::<f64>() * total_rate < total_arrival {
            counts[pick_weighted(&mut rng, lambda, total_arrival)] += 1;
        } else {
            // Preemptive priority with one server: the completion belongs to the
            // highest class present (classes are stored in descending cost order).
            counts[serving.expect("busy server has a class in system")] -= 1;
        }
    }
    areas.iter().map(|a| a / config.measurement_time).collect()
}

/// Estimate the benchmark cost rate under preemptive strict priority in descending
/// cost order: `sum_i c_i * (time-average count of class i)`.
pub fn simulate_strict_priority(params: &SystemParams, config: &SimConfig) -> Result<SimEstimate> {
    config.validate()?;
    let occupancies: Vec<Vec<f64>> = (0..config.replications)
        .into_par_iter()
        .map(|r| strict_priority_replication(params, config, r))
        .collect();
    let per_rep: Vec<f64> = occupancies
        .iter()
        .map(|n| n.iter().zip(params.cost_rates()).map(|(n_i, c)| n_i * c).sum())
        .collect();
    Ok(SimEstimate::aggregate("C_opt".into(), &per_rep))
}

fn ros_replication(
    params: &SystemParams,
    priorities: &PriorityVector,
    config: &SimConfig,
    replication: usize,
) -> ReplicationTotals {
    let k = params.num_classes();
    let lambda = params.arrival_rates();
    let total_arrival = params.total_arrival_rate();
    let beta = priorities.as_slice();
    let mu = params.service_rate();
    let horizon = config.warmup_time + config.measurement_time;

    let mut rng = replication_rng(config.rng_seed, replication);
    let mut waiting: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut in_service: Option<(usize, f64)> = None;
    let mut totals = ReplicationTotals::new(k);
    let mut t = 0.0;

    loop {
        let total_rate = total_arrival + if in_service.is_some() { mu } else { 0.0 };
        let t_next = t + exponential(&mut rng, total_rate);
        let overlap = measured_overlap(t, t_next, config.warmup_time, horizon);
        for (i, q) in waiting.iter().enumerate() {
            totals.occupancy_areas[i] += q.len() as f64 * overlap;
        }
        if let Some((class, _)) = in_service {
            totals.occupancy_areas[class] += overlap;
        }
        if t_next >= horizon {
            break;
        }
        t = t_next;

        if rng.gen::<f64>() * total_rate < total_arrival {
            let class = pick_weighted(&mut rng, lambda, total_arrival);
            if in_service.is_none() {
                // An arrival to an idle server starts service immediately,
                // whatever its weight.
                in_service = Some((class, t));
            } else {
                waiting[class].push(t);
            }
        } else {
            let (class, arrived) = in_service.take().expect("completion implies busy");
            if arrived >= config.warmup_time {
                totals.wait_sums[class] += t - arrived;
                totals.wait_counts[class] += 1;
            }
            // Next job drawn with probability proportional to its class weight
            // among every waiting job; member uniform within the class.
            let weights: Vec<f64> =
                waiting.iter().zip(beta).map(|(q, b)| q.len() as f64 * b).collect();
            let total_weight: f64 = weights.iter().sum();
            if total_weight > 0.0 {
                let next_class = pick_weighted(&mut rng, &weights, total_weight);
                let member = rng.gen_range(0..waiting[next_class].len());
                let stamp = waiting[next_class].swap_remove(member);
                in_service = Some((next_class, stamp));
            }
        }
    }
    totals
}

/// Estimate per-class mean sojourns under non-preemptive random order of service:
/// on each completion the next job is drawn with probability proportional to its
/// class weight among all waiting jobs.
pub fn simulate_ros(
    params: &SystemParams,
    priorities: &PriorityVector,
    config: &SimConfig,
) -> Result<Vec<SimEstimate>> {
    config.validate()?;
    if priorities.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
    }
    let totals: Vec<ReplicationTotals> = (0..config.replications)
        .into_par_iter()
        .map(|r| ros_replication(params, priorities, config, r))
        .collect();
    Ok((0..params.num_classes())
        .map(|i| {
            let per_rep: Vec<f64> = totals.iter().map(|t| t.mean_wait(i)).collect();
            SimEstimate::aggregate(format!("W_{i}"), &per_rep)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_waiting_times;
    use crate::heavy_traffic::w_ht_class;

    fn quick_config(params: &SystemParams, seed: u64, events: f64) -> SimConfig {
        SimConfig {
            measurement_time: events / (2.0 * params.total_arrival_rate()),
            replications: 4,
            ..SimConfig::defaults_for(params, seed, Policy::Dps)
        }
    }

    #[test]
    fn config_validation_rejects_degenerate_runs() {
        let params = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0).unwrap();
        let prio = PriorityVector::uniform(1, 1.0).unwrap();
        let mut config = quick_config(&params, 1, 1000.0);
        config.replications = 1;
        assert!(simulate_dps(&params, &prio, &config).is_err());
        config.replications = 2;
        config.measurement_time = 0.0;
        assert!(simulate_dps(&params, &prio, &config).is_err());
    }

    #[test]
    fn single_class_sojourn_matches_processor_sharing() {
        let params = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0).unwrap();
        let prio = PriorityVector::uniform(1, 1.0).unwrap();
        let config = quick_config(&params, 11, 6.0e4);
        let est = simulate_dps(&params, &prio, &config).unwrap();
        let exact = 1.0 / (2.0 * (1.0 - params.load()));
        assert!(
            est.waits[0].deviation_in_se(exact) < 3.0,
            "W {} +- {} vs exact {exact}",
            est.waits[0].mean,
            est.waits[0].std_error
        );
    }

    #[test]
    fn two_class_sojourns_match_the_balance_system_in_both_implementations() {
        let params = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![2.0, 1.0]).unwrap();
        let config = quick_config(&params, 12, 8.0e4);
        let exact = solve_waiting_times(&params, &prio).unwrap();

        let jump = simulate_dps(&params, &prio, &config).unwrap();
        let residual = simulate_dps_residual(&params, &prio, &config).unwrap();
        for i in 0..2 {
            let w = exact.waits()[i];
            assert!(
                jump.waits[i].deviation_in_se(w) < 3.0,
                "jump chain class {i}: {} +- {} vs {w}",
                jump.waits[i].mean,
                jump.waits[i].std_error
            );
            assert!(
                residual.waits[i].deviation_in_se(w) < 3.0,
                "residual tracker class {i}: {} +- {} vs {w}",
                residual.waits[i].mean,
                residual.waits[i].std_error
            );
            // The two dynamics agree with each other within combined noise.
            let gap = (jump.waits[i].mean - residual.waits[i].mean).abs();
            let se = (jump.waits[i].std_error.powi(2) + residual.waits[i].std_error.powi(2)).sqrt();
            assert!(gap < 3.0 * se, "implementations disagree: gap {gap} vs 3 se {se}");
        }
    }

    #[test]
    fn occupancy_closes_littles_law() {
        let params = SystemParams::new(vec![1.5, 0.5], vec![3.0, 1.0], 4.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![1.3, 0.6]).unwrap();
        let config = quick_config(&params, 13, 6.0e4);
        let est = simulate_dps(&params, &prio, &config).unwrap();
        for i in 0..2 {
            let lhs = params.arrival_rates()[i] * est.waits[i].mean;
            let se = (params.arrival_rates()[i] * est.waits[i].std_error).hypot(est.counts[i].std_error);
            assert!(
                (lhs - est.counts[i].mean).abs() < 3.0 * se,
                "class {i}: lambda W {lhs} vs N {} (se {se})",
                est.counts[i].mean
            );
        }
    }

    #[test]
    fn tagged_probe_reproduces_the_single_class_deviation_value() {
        // Population weight 1, probe weight 2: sojourn 0.8 by the closed form.
        let params = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0).unwrap();
        let prio = PriorityVector::uniform(1, 1.0).unwrap();
        let config = quick_config(&params, 14, 3.0e5);
        let est = simulate_tagged(&params, &prio, 2.0, &config).unwrap();
        assert!(
            est.deviation_in_se(0.8) < 3.0,
            "V {} +- {} vs 0.8",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn tagged_probe_at_a_class_weight_matches_that_class_sojourn() {
        let params = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![2.0, 1.0]).unwrap();
        let config = quick_config(&params, 15, 3.0e5);
        let exact = solve_waiting_times(&params, &prio).unwrap();
        let est = simulate_tagged(&params, &prio, 2.0, &config).unwrap();
        assert!(
            est.deviation_in_se(exact.waits()[0]) < 3.0,
            "V(beta_0) {} +- {} vs W_0 {}",
            est.mean,
            est.std_error,
            exact.waits()[0]
        );
    }

    #[test]
    fn tagged_sojourn_decreases_in_probe_weight_beyond_noise() {
        let params = SystemParams::new(vec![1.0], vec![1.0], 1.6, 1.0).unwrap();
        let prio = PriorityVector::uniform(1, 1.0).unwrap();
        let config = quick_config(&params, 16, 2.0e5);
        let estimates: Vec<SimEstimate> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&b| simulate_tagged(&params, &prio, b, &config).unwrap())
            .collect();
        for pair in estimates.windows(2) {
            let se = pair[0].std_error.hypot(pair[1].std_error);
            assert!(
                pair[0].mean - pair[1].mean > 3.0 * se,
                "sojourn must drop beyond noise: {} -> {}",
                pair[0].mean,
                pair[1].mean
            );
        }
    }

    #[test]
    fn strict_priority_matches_the_telescoped_benchmark() {
        let single = SystemParams::new(vec![1.0], vec![2.0], 2.0, 1.0).unwrap();
        let config = quick_config(&single, 17, 6.0e4);
        let est = simulate_strict_priority(&single, &config).unwrap();
        let rho = single.load();
        let exact = 2.0 * rho / (1.0 - rho);
        assert!(est.deviation_in_se(exact) < 3.0, "{} +- {} vs {exact}", est.mean, est.std_error);

        let pair = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0).unwrap();
        let config = quick_config(&pair, 18, 8.0e4);
        let est = simulate_strict_priority(&pair, &config).unwrap();
        assert!(
            est.deviation_in_se(4.0 / 3.0) < 3.0,
            "{} +- {} vs 4/3",
            est.mean,
            est.std_error
        );

        // Near-unit distinct costs turn the benchmark into total occupancy.
        let unit = SystemParams::new(
            vec![1.0, 1.0],
            vec![1.0 + 1e-9, 1.0],
            4.0,
            1.0,
        )
        .unwrap();
        let config = quick_config(&unit, 19, 8.0e4);
        let est = simulate_strict_priority(&unit, &config).unwrap();
        let backlog = unit.load() / (1.0 - unit.load());
        assert!(
            est.deviation_in_se(backlog) < 3.0,
            "{} +- {} vs {backlog}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn random_order_service_conserves_work_and_ignores_weights_when_alone() {
        let params = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![3.0, 1.0]).unwrap();
        let config = quick_config(&params, 20, 8.0e4);
        let est = simulate_ros(&params, &prio, &config).unwrap();
        let total: f64 = est
            .iter()
            .zip(params.arrival_rates())
            .map(|(e, l)| l * e.mean)
            .sum();
        let se: f64 = est
            .iter()
            .zip(params.arrival_rates())
            .map(|(e, l)| (l * e.std_error).powi(2))
            .sum::<f64>()
            .sqrt();
        let backlog = params.load() / (1.0 - params.load());
        assert!(
            (total - backlog).abs() < 3.0 * se,
            "sum lambda W {total} vs backlog {backlog} (se {se})"
        );

        // At light load jobs are served alone almost always, so a hundredfold
        // weight skew cannot separate the classes: both match the total-traffic
        // single-queue value 1/(mu - lambda).
        let light = SystemParams::new(vec![0.05, 0.05], vec![2.0, 1.0], 4.0, 1.0).unwrap();
        let skewed = PriorityVector::new(vec![100.0, 1.0]).unwrap();
        let config = quick_config(&light, 21, 3.0e4);
        let est = simulate_ros(&light, &skewed, &config).unwrap();
        let common = 1.0 / (4.0 - 0.1);
        for e in &est {
            assert!(
                e.deviation_in_se(common) < 3.0,
                "lone job should take {common}: {} +- {}",
                e.mean,
                e.std_error
            );
        }
        let gap = (est[0].mean - est[1].mean).abs();
        let se = est[0].std_error.hypot(est[1].std_error);
        assert!(gap < 3.0 * se, "weight skew separated uncontended classes: {gap} vs se {se}");
    }

    #[test]
    fn random_order_service_approaches_the_heavy_traffic_times() {
        let params = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0)
            .unwrap()
            .with_load(0.95)
            .unwrap();
        let prio = PriorityVector::new(vec![2.0, 1.0]).unwrap();
        let config = quick_config(&params, 22, 4.0e5);
        let est = simulate_ros(&params, &prio, &config).unwrap();
        let slack = 1.0 - params.load();
        for i in 0..2 {
            let limit = slack * w_ht_class(&params, &prio, i).unwrap();
            let scaled = slack * est[i].mean;
            let se = slack * est[i].std_error;
            assert!(
                (scaled - limit).abs() < 5.0 * se,
                "class {i}: scaled {scaled} +- {se} vs limit {limit}"
            );
        }
    }

    #[test]
    fn identical_seeds_reproduce_identical_estimates() {
        let params = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0).unwrap();
        let prio = PriorityVector::new(vec![2.0, 1.0]).unwrap();
        let config = quick_config(&params, 23, 2.0e4);
        let a = simulate_dps(&params, &prio, &config).unwrap();
        let b = simulate_dps(&params, &prio, &config).unwrap();
        for i in 0..2 {
            assert_eq!(a.waits[i].mean.to_bits(), b.waits[i].mean.to_bits());
            assert_eq!(a.counts[i].std_error.to_bits(), b.counts[i].std_error.to_bits());
        }
        let mut shifted = config.clone();
        shifted.rng_seed = 24;
        let c = simulate_dps(&params, &prio, &shifted).unwrap();
        assert_ne!(a.waits[0].mean.to_bits(), c.waits[0].mean.to_bits());
    }
}
