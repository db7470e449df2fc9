//! Solve the per-class sojourn system of a weighted processor-sharing queue.
//!
//! Two Poisson job classes share one exponential server. Under weights
//! `beta = (2, 1)`, arrival rates `(1, 1)`, and service rate 4, the stationary
//! mean sojourn times come out to exactly `(4/9, 5/9)`. This walkthrough prints
//! the solved profile and then checks the structural facts every weighted-sharing
//! queue must satisfy: work conservation (total occupancy equals the M/M/1 value
//! regardless of weights), scale invariance (only weight ratios matter), and the
//! consistency of the tagged-job sojourn with the per-class solution.
//!
//! Run with `cargo run --example exact_waiting_times`.

use dps_games::exact::{
    closed_form_k1, solve_waiting_times, tagged_job_time, PriorityVector, SystemParams,
};
use dps_games::Result;

fn main() -> Result<()> {
    let params = SystemParams::new(vec![1.0, 1.0], vec![2.0, 1.0], 4.0, 1.0)?;
    let priorities = PriorityVector::new(vec![2.0, 1.0])?;
    let profile = solve_waiting_times(&params, &priorities)?;

    println!("two classes, lambda = (1, 1), mu = 4, weights = (2, 1)");
    println!("load rho = {:.4}", params.load());
    println!();
    println!("{:<8} {:>10} {:>18} {:>18}", "class", "weight", "mean sojourn W_i", "mean count E[N_i]");
    for i in 0..params.num_classes() {
        println!(
            "{:<8} {:>10.4} {:>18.12} {:>18.12}",
            i,
            priorities.as_slice()[i],
            profile.waits()[i],
            profile.expected_counts()[i]
        );
    }

    // The exact solution of this instance is W = (4/9, 5/9).
    assert!((profile.waits()[0] - 4.0 / 9.0).abs() < 1e-12);
    assert!((profile.waits()[1] - 5.0 / 9.0).abs() < 1e-12);

    // Work conservation: weights redistribute waiting between classes but cannot
    // change the total amount of work in the system, so the occupancy always
    // telescopes to the M/M/1 value rho / (1 - rho).
    let rho = params.load();
    let occupancy = profile.total_expected_count();
    println!();
    println!("total occupancy      = {occupancy:.12}");
    println!("M/M/1 value rho/(1-rho) = {:.12}", rho / (1.0 - rho));
    assert!((occupancy - rho / (1.0 - rho)).abs() < 1e-12);

    // Scale invariance: the service split depends on weight ratios only, so
    // multiplying every weight by the same factor changes nothing.
    let scaled = solve_waiting_times(&params, &priorities.scaled(7.0)?)?;
    for i in 0..params.num_classes() {
        assert!((scaled.waits()[i] - profile.waits()[i]).abs() < 1e-14);
    }
    println!("scaling all weights by 7 leaves every sojourn unchanged");

    // Tagged-job consistency: a probe job carrying exactly the weight of class k
    // experiences that class's sojourn.
    for i in 0..params.num_classes() {
        let tagged = tagged_job_time(&params, &priorities, priorities.as_slice()[i])?;
        assert!((tagged.value() - profile.waits()[i]).abs() < 1e-12);
    }
    println!("tagged job at a class weight reproduces that class's sojourn");

    // Single-class closed form: with population weight 1 and probe weight 2 at
    // lambda = 1, mu = 2, the tagged sojourn is exactly 0.8 (the probe receives a
    // double share while the queue's own load is unchanged).
    let single = SystemParams::new(vec![1.0], vec![1.0], 2.0, 1.0)?;
    let v = closed_form_k1(&single, 2.0, 1.0)?;
    println!("single-class probe value V(2; 1) = {v:.12} (exact: 0.8)");
    assert!((v - 0.8).abs() < 1e-12);

    println!();
    println!("all exact-solver checks passed");
    Ok(())
}
