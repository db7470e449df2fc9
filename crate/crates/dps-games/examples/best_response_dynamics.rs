//! Exact equilibria of the pricing game, computed by best-response sweeps.
//!
//! Away from saturation the closed-form weights are only approximate; the exact
//! equilibrium comes from iterating best responses (each class re-optimizes its
//! weight against the current profile) until a fixed point, then re-verifying
//! every coordinate. This walkthrough solves a single-class instance where an
//! independent closed form exists, demonstrates warm starts and convergence
//! reporting, and measures how fast the closed-form approximation approaches the
//! exact equilibrium as the load grows — and how wide cost spreads break it.
//!
//! Run with `cargo run --example best_response_dynamics`.

use dps_games::equilibrium::{solve_job_ne, SolverConfig};
use dps_games::exact::SystemParams;
use dps_games::heavy_traffic::hte_job_level;
use dps_games::numeric::max_rel_diff;
use dps_games::Result;

fn main() -> Result<()> {
    let solver = SolverConfig::default();

    // Single class: the equilibrium fixed point has the closed form
    // beta* = [c rho / (mu (1-rho) (2-rho) alpha)]^(1/alpha), an independent
    // oracle for the iterative solver.
    let (c, lambda, mu, alpha) = (3.0, 1.0, 2.0, 1.5);
    let single = SystemParams::new(vec![lambda], vec![c], mu, alpha)?;
    let rho = single.load();
    let reference = (c * rho / (mu * (1.0 - rho) * (2.0 - rho) * alpha)).powf(1.0 / alpha);
    let solved = solve_job_ne(&single, &solver, None)?;
    println!("single class, c = {c}, lambda = {lambda}, mu = {mu}, alpha = {alpha}");
    println!("  solver:      beta = {:.12}", solved.priorities().as_slice()[0]);
    println!("  closed form: beta = {reference:.12}");
    println!("  iterations = {}, residual = {:.2e}, converged = {}",
             solved.iterations(), solved.residual(), solved.converged());
    assert!(solved.converged());
    assert!((solved.priorities().as_slice()[0] - reference).abs() / reference < 1e-8);

    // Two asymmetric classes at moderate load.
    let params = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0)?;
    let equilibrium = solve_job_ne(&params, &solver, None)?;
    println!();
    println!("two classes, c = (4, 1), lambda = (1, 1), mu = 4:");
    println!("  weights = {:?}", equilibrium.priorities().as_slice());
    println!("  iterations = {}, converged = {}", equilibrium.iterations(), equilibrium.converged());
    assert!(equilibrium.converged());

    // Warm start: initializing at the returned profile terminates immediately
    // with bitwise-identical weights — the result really is a fixed point.
    let warm = solve_job_ne(&params, &solver, Some(equilibrium.priorities().clone()))?;
    assert_eq!(warm.priorities().as_slice(), equilibrium.priorities().as_slice());
    assert!(warm.iterations() <= 2);
    println!("  warm start reproduces the profile bitwise in {} sweep(s)", warm.iterations());

    // The closed-form approximation converges to the exact equilibrium as the
    // load approaches one.
    println!();
    println!("{:<8} {:>26}", "load", "max rel gap approx vs exact");
    let mut previous = f64::INFINITY;
    for rho in [0.6, 0.9, 0.99] {
        let instance = params.with_load(rho)?;
        let approx = hte_job_level(&instance)?;
        let exact = solve_job_ne(&instance, &solver, None)?;
        assert!(exact.converged());
        let gap = max_rel_diff(approx.priorities().as_slice(), exact.priorities().as_slice());
        println!("{:<8} {:>26.12}", rho, gap);
        assert!(gap < previous, "the approximation must sharpen with the load");
        previous = gap;
    }

    // The error is not uniformly small: widening the cost and arrival-rate
    // spread between two classes at a fixed load makes it arbitrarily large.
    println!();
    println!("{:<8} {:>26}", "ratio", "max rel gap at load 0.99");
    let mut previous = 0.0;
    for ratio in [1.0, 10.0, 100.0, 1000.0] {
        let instance = spread_instance(ratio, 0.99)?;
        let approx = hte_job_level(&instance)?;
        let exact = solve_job_ne(&instance, &solver, None)?;
        assert!(exact.converged());
        let gap = max_rel_diff(approx.priorities().as_slice(), exact.priorities().as_slice());
        println!("{:<8} {:>26.12}", ratio, gap);
        assert!(gap > previous, "the gap must grow with the spread");
        previous = gap;
    }

    // At lower loads the same family ends even more drastically: once the spread
    // is wide enough, the cheap class's best response is to buy no priority at
    // all, so the interior equilibrium disappears while the closed form still
    // assigns the class substantial weight. The solver reports the boundary
    // instead of inventing an interior answer.
    let exit = solve_job_ne(&spread_instance(1000.0, 0.9)?, &solver, None);
    println!();
    println!("same family at load 0.9, ratio 1000: {}", exit.unwrap_err());

    println!();
    println!("all best-response checks passed");
    Ok(())
}

/// Two classes whose cost and arrival-rate ratios both equal `ratio`, with total
/// arrival rate 2 at the given load.
fn spread_instance(ratio: f64, load: f64) -> Result<SystemParams> {
    let arrivals = vec![2.0 * ratio / (ratio + 1.0), 2.0 / (ratio + 1.0)];
    SystemParams::new(arrivals, vec![ratio, 1.0], 2.0 / load, 1.0)
}
