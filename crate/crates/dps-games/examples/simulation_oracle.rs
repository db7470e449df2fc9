//! The discrete-event oracle: every analytic quantity in the crate can be
//! replayed against a simulator that shares no formulas with it.
//!
//! Two independent implementations of weighted sharing are run side by side —
//! a rate-based jump chain that leans on exponential memorylessness, and a
//! per-job residual-work tracker that does not — plus preemptive strict
//! priority for the benchmark cost and random order of service for the
//! heavy-traffic universality check. Agreement is judged in standard-error
//! units (asymptotically a standard normal z-score), with the analytic value
//! as the reference.
//!
//! Run with `cargo run --example simulation_oracle`.

use dps_games::exact::{solve_waiting_times, PriorityVector, SystemParams};
use dps_games::heavy_traffic::w_ht_class;
use dps_games::metrics::optimal_cost_cmu;
use dps_games::sim::{
    simulate_dps, simulate_dps_residual, simulate_ros, simulate_strict_priority, simulate_tagged,
    Policy, SimConfig, RNG_ALGORITHM,
};
use dps_games::Result;

/// Defaults sized to the instance, with the measurement window resized to the
/// requested expected event count so every section states its budget.
fn config_for(params: &SystemParams, seed: u64, events: f64) -> SimConfig {
    SimConfig {
        measurement_time: events / (2.0 * params.total_arrival_rate()),
        ..SimConfig::defaults_for(params, seed, Policy::Dps)
    }
}

fn main() -> Result<()> {
    println!("generator: {RNG_ALGORITHM}");

    // Two classes, weights (2, 1): the balance system gives exactly (4/9, 5/9).
    let params = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0)?;
    let prio = PriorityVector::new(vec![2.0, 1.0])?;
    let exact = solve_waiting_times(&params, &prio)?;
    let config = config_for(&params, 101, 4.0e5);
    let jump = simulate_dps(&params, &prio, &config)?;
    let residual = simulate_dps_residual(&params, &prio, &config)?;
    println!();
    println!("two classes, weights (2, 1), load 0.5 — exact sojourns (4/9, 5/9):");
    println!(
        "  {:<7} {:>12} {:>22} {:>22} {:>8} {:>8}",
        "class", "exact", "jump chain", "residual tracker", "z jump", "z resid"
    );
    for i in 0..2 {
        let w = exact.waits()[i];
        let zj = jump.waits[i].deviation_in_se(w);
        let zr = residual.waits[i].deviation_in_se(w);
        println!(
            "  {:<7} {:>12.9} {:>14.6} +- {:.1e} {:>14.6} +- {:.1e} {:>8.2} {:>8.2}",
            i,
            w,
            jump.waits[i].mean,
            jump.waits[i].std_error,
            residual.waits[i].mean,
            residual.waits[i].std_error,
            zj,
            zr
        );
        assert!(zj < 3.0, "jump chain class {i} off by {zj} standard errors");
        assert!(zr < 3.0, "residual tracker class {i} off by {zr} standard errors");
        // The two dynamics must also agree with each other.
        let gap = (jump.waits[i].mean - residual.waits[i].mean).abs();
        let se = jump.waits[i].std_error.hypot(residual.waits[i].std_error);
        assert!(gap < 3.0 * se);
    }

    // Work conservation transfers to the simulated occupancies: the weighted
    // sharing discipline cannot change the total backlog.
    let simulated_backlog: f64 = jump.counts.iter().map(|e| e.mean).sum();
    let backlog_se: f64 =
        jump.counts.iter().map(|e| e.std_error.powi(2)).sum::<f64>().sqrt();
    let backlog = params.load() / (1.0 - params.load());
    let z = (simulated_backlog - backlog).abs() / backlog_se;
    println!();
    println!(
        "work conservation: simulated total occupancy {simulated_backlog:.6} \
         vs rho/(1-rho) = {backlog} (z = {z:.2})"
    );
    assert!(z < 3.0);

    // Tagged probe, single class: population weight 1, probe weight 2 has the
    // closed-form sojourn 0.8 at lambda = 1, mu = 2.
    let single = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0)?;
    let lone = PriorityVector::uniform(1, 1.0)?;
    let probe = simulate_tagged(&single, &lone, 2.0, &config_for(&single, 102, 4.0e5))?;
    let z = probe.deviation_in_se(0.8);
    println!();
    println!(
        "tagged probe at twice the population weight: {:.6} +- {:.1e} vs 0.8 (z = {z:.2})",
        probe.mean, probe.std_error
    );
    assert!(z < 3.0);

    // And at an existing class weight the probe must reproduce that class's
    // per-class sojourn — the self-consistency behind the equilibrium analysis.
    let at_class = simulate_tagged(&params, &prio, 2.0, &config_for(&params, 103, 4.0e5))?;
    let z = at_class.deviation_in_se(exact.waits()[0]);
    println!(
        "tagged probe at class 0's weight:          {:.6} +- {:.1e} vs {:.6} (z = {z:.2})",
        at_class.mean,
        at_class.std_error,
        exact.waits()[0]
    );
    assert!(z < 3.0);

    // Benchmark cost: preemptive strict priority in descending cost order,
    // simulated with no knowledge of the telescoped closed form.
    let bench = simulate_strict_priority(&params, &config_for(&params, 104, 4.0e5))?;
    let bench_exact = optimal_cost_cmu(&params);
    let z = bench.deviation_in_se(bench_exact);
    println!();
    println!(
        "strict-priority benchmark cost: {:.6} +- {:.1e} vs exact {:.6} (z = {z:.2})",
        bench.mean, bench.std_error, bench_exact
    );
    assert!(z < 3.0);
    assert!((bench_exact - 4.0 / 3.0).abs() < 1e-12);

    // Universality: random order of service shares no dynamics with weighted
    // sharing, yet near saturation its slack-scaled sojourns approach the same
    // heavy-traffic limit values.
    let loaded = params.with_load(0.95)?;
    let ros = simulate_ros(&loaded, &prio, &config_for(&loaded, 105, 8.0e5))?;
    let slack = 1.0 - loaded.load();
    println!();
    println!("random order of service at load 0.95 (slack-scaled, 5 se tolerance):");
    for i in 0..2 {
        let limit = slack * w_ht_class(&loaded, &prio, i)?;
        let scaled = slack * ros[i].mean;
        let se = slack * ros[i].std_error;
        let z = (scaled - limit).abs() / se;
        println!(
            "  class {i}: (1-rho) W = {scaled:.6} +- {se:.1e} vs limit {limit:.6} (z = {z:.2})"
        );
        assert!(z < 5.0, "class {i} off by {z} standard errors");
    }

    println!();
    println!("all oracle checks passed");
    Ok(())
}
