//! Class-level (atomic) games: a whole class picks one weight for all its jobs.
//!
//! Unlike an individual job — which is measure zero and takes the population as
//! given — a class that moves its weight drags its own jobs' congestion along.
//! This internalized externality makes class equilibria differ from job
//! equilibria on asymmetric instances. This walkthrough solves both and compares
//! them, shows the degenerate single-class case (weights are pure cost there, so
//! the class pins to the cheapest allowed weight), solves the class game under
//! the heavy-traffic waiting approximation with a first-order-condition
//! certificate, and follows the many-small-classes limit down to its continuum
//! strategy function.
//!
//! Run with `cargo run --example class_level_games`.

use dps_games::distribution::Distribution;
use dps_games::equilibrium::{
    class_hte_foc_residual, solve_class_hte, solve_class_ne, solve_job_ne, SolverConfig,
};
use dps_games::exact::SystemParams;
use dps_games::heavy_traffic::{hte_job_level, limiting_hte, sample_finite_game, LimitingGameSpec};
use dps_games::numeric::max_rel_diff;
use dps_games::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let solver = SolverConfig::default();

    // Asymmetric two-class instance at moderate load: job-level and class-level
    // equilibria are genuinely different profiles.
    let params = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0)?;
    let job = solve_job_ne(&params, &solver, None)?;
    let class = solve_class_ne(&params, &solver, None)?;
    assert!(job.converged() && class.converged());
    println!("c = (4, 1), lambda = (1, 1), mu = 4, alpha = 1");
    println!("  job-level equilibrium:   {:?}", job.priorities().as_slice());
    println!("  class-level equilibrium: {:?}", class.priorities().as_slice());
    let gap = max_rel_diff(job.priorities().as_slice(), class.priorities().as_slice());
    println!("  max relative gap = {gap:.6}");
    assert!(gap > 1e-4, "atomic classes behave differently from individual jobs");

    // Single class: every job shares the one weight, so the sojourn is
    // weight-independent and the class objective reduces to the payment alone.
    // The optimum is the smallest allowed weight, reported as a boundary pin.
    let single = SystemParams::new(vec![1.0], vec![3.0], 2.0, 1.0)?;
    let pinned = solve_class_ne(&single, &solver, None)?;
    println!();
    println!("single class: weight = {:.1e}, pinned classes = {:?}",
             pinned.priorities().as_slice()[0], pinned.bracket_pinned());
    assert_eq!(pinned.bracket_pinned(), &[0]);
    assert!((pinned.priorities().as_slice()[0] - solver.bracket.0).abs() < 1e-20);

    // Class game under the heavy-traffic waiting approximation: each best
    // response is a scalar root-find on the first-order condition, and the
    // solved profile carries an explicit stationarity certificate.
    let wide = SystemParams::new(vec![2.0, 1.0, 0.5], vec![9.0, 4.0, 1.0], 3.5 / 0.9, 1.0)?;
    let class_ht = solve_class_hte(&wide, &solver, None)?;
    let residual = class_hte_foc_residual(&wide, class_ht.priorities(), class_ht.bracket_pinned())?;
    println!();
    println!("three classes at load 0.9 under the limiting waiting formula:");
    println!("  weights = {:?}", class_ht.priorities().as_slice());
    println!("  first-order-condition residual = {residual:.3e}");
    assert!(class_ht.converged());
    assert!(residual < 1e-8);

    // Many small classes: split the population into n classes with costs drawn
    // from F = Uniform[1, 11] and per-class arrival share drawn from
    // G = Uniform[0.5, 1.5] scaled by 1/n. As n grows, the finite equilibrium
    // concentrates on the continuum strategy function B(c).
    let spec = LimitingGameSpec::new(
        Distribution::uniform(1.0, 11.0)?,
        Distribution::uniform(0.5, 1.5)?,
        1.0 / 0.9,
        solver.bracket,
    )?;
    let strategy = limiting_hte(&spec, 1.0)?;
    println!();
    println!("continuum limit, costs Uniform[1,11], load {:.2}:", spec.load());
    println!("  strategy function: B(1) = {:.6}, B(6) = {:.6}, B(11) = {:.6}",
             strategy.priority(1.0), strategy.priority(6.0), strategy.priority(11.0));
    println!();
    println!("{:<12} {:>22}", "classes", "max |beta_i - B(c_i)|");
    let mut previous = f64::INFINITY;
    for n in [10usize, 100, 1000] {
        // A fresh generator per count on the same stream makes the games nested
        // prefixes of one i.i.d. sequence, so the gap shrinks as the sample grows.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let finite = sample_finite_game(&spec, n, 1.0, &mut rng)?;
        let eq = hte_job_level(&finite)?;
        let gap = eq
            .priorities()
            .as_slice()
            .iter()
            .zip(finite.cost_rates())
            .map(|(&beta, &c)| (beta - strategy.priority(c)).abs())
            .fold(0.0, f64::max);
        println!("{:<12} {:>22.9}", n, gap);
        assert!(gap < previous, "the finite game must concentrate on the limit");
        previous = gap;
    }

    println!();
    println!("all class-level checks passed");
    Ok(())
}
