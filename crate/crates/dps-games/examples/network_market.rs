//! A network of independent resource markets: each resource runs its own
//! weighted-sharing market, a class holds one bid per resource it uses, and its
//! jobs pay waiting cost on the *slowest* of their resources.
//!
//! The key structural fact: at resource `j` a bid `beta` buys time `A_j / beta`,
//! so the bid attaining a target time `V` is the convex decreasing curve
//! `b_j(V) = A_j / V`. A best response therefore equalizes the class's times
//! across its resources and reduces to one scalar search; at a fixed point the
//! envelope identity `sum_j (-b_j'(V_i)) = c_i` certifies optimality. This
//! walkthrough solves a three-class bridge topology, verifies both
//! certificates, checks the analytic bid slope against finite differences,
//! confirms the single-resource network collapses to the one-market
//! equilibrium, and evaluates the anarchy bound.
//!
//! Run with `cargo run --example network_market`.

use dps_games::equilibrium::SolverConfig;
use dps_games::exact::SystemParams;
use dps_games::heavy_traffic::hte_job_level;
use dps_games::network::{
    inverse_bid, inverse_bid_derivative, solve_network_hte, v_ht_resource, NetworkSpec,
};
use dps_games::Result;

fn main() -> Result<()> {
    let solver = SolverConfig::default();

    // Bridge topology: classes 0 and 1 each live on their own resource, class 2
    // uses both, so its bids couple the two markets. Equal arrival rates keep
    // the anarchy bound applicable.
    let spec = NetworkSpec::new(
        vec![1.0, 1.0, 1.0],
        vec![4.0, 2.0, 3.0],
        vec![vec![0], vec![1], vec![0, 1]],
        vec![4.0, 4.0],
    )?;
    let report = solve_network_hte(&spec, &solver)?;
    println!("bridge topology: 3 classes, 2 resources, class 2 on both");
    println!(
        "  loads: resource 0 = {:.3}, resource 1 = {:.3}",
        spec.resource_load(0),
        spec.resource_load(1)
    );
    println!(
        "  converged = {} after {} sweeps (residual {:.2e})",
        report.converged, report.iterations, report.residual
    );
    assert!(report.converged);

    println!();
    println!("  {:<7} {:>6} {:>22} {:>16}", "class", "cost", "bids (per resource)", "equalized time");
    for i in 0..spec.num_classes() {
        let bids: Vec<String> = report.bids.row(i).iter().map(|b| format!("{b:.6}")).collect();
        println!(
            "  {:<7} {:>6} {:>22} {:>16.8}",
            i,
            spec.cost_rates()[i],
            bids.join("  "),
            report.equalized_waits[i]
        );
    }

    // Certificate 1 — equalization: the bridging class sees the same time at
    // both of its resources.
    let bridge_times: Vec<f64> = spec
        .resource_set(2)
        .iter()
        .zip(report.bids.row(2))
        .map(|(&j, &b)| v_ht_resource(&spec, &report.bids, j, b))
        .collect::<Result<_>>()?;
    let equalization_gap =
        (bridge_times[0] - bridge_times[1]).abs() / report.equalized_waits[2];
    println!();
    println!(
        "  equalization: bridge times ({:.10}, {:.10}), relative gap {:.2e}",
        bridge_times[0], bridge_times[1], equalization_gap
    );
    assert!(equalization_gap < 1e-8);

    // Certificate 2 — envelope identity: per class, the negated bid slopes sum
    // to the waiting cost rate.
    println!("  envelope identity sum_j(-b') = c:");
    for i in 0..spec.num_classes() {
        let slope_sum: f64 = report.bid_derivatives[i].iter().map(|s| -s).sum();
        let c = spec.cost_rates()[i];
        let defect = (slope_sum - c).abs() / c;
        println!("    class {i}: slope sum = {slope_sum:.10}, cost = {c}, defect = {defect:.2e}");
        assert!(defect < 1e-8);
    }

    // The anarchy bound (valid because arrival rates are equal):
    // (K - 1) * max_j sqrt(slope spread at j) + 1.
    let bound = report.poa_bound.expect("equal arrival rates");
    println!("  anarchy bound = {bound:.6}");
    assert!(bound >= 1.0);

    // Bid-curve sanity on the final population: b_j(V) round-trips through the
    // time formula and its analytic slope matches a centered difference.
    println!();
    println!("bid curve at resource 0 of the converged population:");
    for target in [0.5, 1.0, 2.0] {
        let bid = inverse_bid(&spec, &report.bids, 0, target)?;
        let round_trip = v_ht_resource(&spec, &report.bids, 0, bid)?;
        let analytic = inverse_bid_derivative(&spec, &report.bids, 0, target)?;
        let h = 1e-6 * target;
        let fd = (inverse_bid(&spec, &report.bids, 0, target + h)?
            - inverse_bid(&spec, &report.bids, 0, target - h)?)
            / (2.0 * h);
        println!(
            "  V = {target}: b(V) = {bid:.8}, b(b^-1 round trip) = {round_trip:.8}, \
             b'(V) = {analytic:.8} (finite difference {fd:.8})"
        );
        assert!((round_trip - target).abs() < 1e-12 * target);
        assert!((analytic - fd).abs() < 1e-6 * analytic.abs());
    }

    // Single-resource special case: with one shared resource the network game
    // *is* the single-market game, and the bids must match its equilibrium.
    let single_resource = NetworkSpec::new(
        vec![1.0, 1.0],
        vec![4.0, 1.0],
        vec![vec![0], vec![0]],
        vec![4.0],
    )?;
    let network_eq = solve_network_hte(&single_resource, &solver)?;
    assert!(network_eq.converged);
    let params = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0)?;
    let market_eq = hte_job_level(&params)?;
    println!();
    println!("single-resource reduction (2 classes on 1 resource):");
    let mut worst = 0.0f64;
    for (i, want) in market_eq.priorities().as_slice().iter().enumerate() {
        let got = network_eq.bids.row(i)[0];
        let gap = (got - want).abs() / want;
        worst = worst.max(gap);
        println!("  class {i}: network bid {got:.10} vs single-market weight {want:.10}");
    }
    println!("  worst relative gap = {worst:.2e}");
    assert!(worst < 1e-8);

    // Disjoint classes decouple completely: each bid solves its own one-class
    // market, so coupling is genuinely driven by shared resources.
    let disjoint = NetworkSpec::new(
        vec![1.0, 2.0],
        vec![3.0, 5.0],
        vec![vec![0], vec![1]],
        vec![4.0, 6.0],
    )?;
    let decoupled = solve_network_hte(&disjoint, &solver)?;
    assert!(decoupled.converged);
    for (i, (lambda, c, mu)) in [(1.0, 3.0, 4.0), (2.0, 5.0, 6.0)].into_iter().enumerate() {
        let isolated = SystemParams::new(vec![lambda], vec![c], mu, 1.0)?;
        let want = hte_job_level(&isolated)?.priorities().as_slice()[0];
        let got = decoupled.bids.row(i)[0];
        assert!((got - want).abs() < 1e-8 * want);
    }
    println!();
    println!("disjoint topology decouples into isolated one-class markets");

    println!();
    println!("all network checks passed");
    Ok(())
}
