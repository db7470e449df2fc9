//! The closed-form equilibrium of the priority-pricing game near saturation.
//!
//! When a job pays `beta^alpha` for weight `beta` and the system is close to
//! full load, the equilibrium weights have a closed form: each class buys
//! priority proportional to `c^(1/(alpha+1))`, with a common normalizer set by
//! the load. This walkthrough computes those weights, verifies the first-order
//! conditions of the limiting game, demonstrates the two scaling laws (cost
//! ratio and uniform cost scaling), shows the approximation error of the
//! heavy-traffic sojourn vanishing as the load approaches one, and checks that
//! unilateral deviations stop paying off in the same limit.
//!
//! Run with `cargo run --example heavy_traffic_equilibrium`.

use dps_games::exact::{tagged_job_time, SystemParams};
use dps_games::heavy_traffic::{deviation_check, hte_foc_residual, hte_job_level, v_ht};
use dps_games::Result;

fn main() -> Result<()> {
    // Worked instance: c = (4, 1), lambda = (1, 1), mu = 4, alpha = 1. The
    // closed form gives weights (4/3, 2/3): the expensive class buys twice the
    // priority because weights scale with the square root of cost at alpha = 1.
    let params = SystemParams::new(vec![1.0, 1.0], vec![4.0, 1.0], 4.0, 1.0)?;
    let equilibrium = hte_job_level(&params)?;
    let weights = equilibrium.priorities().as_slice();
    println!("c = (4, 1), lambda = (1, 1), mu = 4, alpha = 1");
    println!("equilibrium weights   = ({:.12}, {:.12})", weights[0], weights[1]);
    println!("closed-form reference = ({:.12}, {:.12})", 4.0 / 3.0, 2.0 / 3.0);
    assert!((weights[0] - 4.0 / 3.0).abs() < 1e-12);
    assert!((weights[1] - 2.0 / 3.0).abs() < 1e-12);

    // Stationarity: each weight satisfies the first-order condition of
    // minimizing c * V_ht(beta) + beta^alpha against the equilibrium population.
    let residual = hte_foc_residual(&params, equilibrium.priorities())?;
    println!("first-order-condition residual = {residual:.3e}");
    assert!(residual < 1e-12);

    // Ratio law: weights depend on costs only through c^(1/(alpha+1)).
    let alpha = 2.0;
    let skew = SystemParams::new(vec![2.0, 3.0, 1.0], vec![27.0, 8.0, 1.0], 9.0, alpha)?;
    let w = hte_job_level(&skew)?;
    let ratio = w.priorities().as_slice()[0] / w.priorities().as_slice()[2];
    let law = (27.0f64 / 1.0).powf(1.0 / (alpha + 1.0));
    println!();
    println!("ratio law at alpha = {alpha}: beta_0/beta_2 = {ratio:.12} vs (c_0/c_2)^(1/(alpha+1)) = {law:.12}");
    assert!((ratio - law).abs() < 1e-12);

    // Uniform cost scaling: multiplying every cost by zeta multiplies every
    // weight by zeta^(1/alpha) — prices translate one-for-one into priorities.
    let zeta = 5.0;
    let scaled = SystemParams::new(
        skew.arrival_rates().to_vec(),
        skew.cost_rates().iter().map(|c| c * zeta).collect(),
        skew.service_rate(),
        alpha,
    )?;
    let ws = hte_job_level(&scaled)?;
    for (a, b) in ws.priorities().as_slice().iter().zip(w.priorities().as_slice()) {
        assert!((a / b - zeta.powf(1.0 / alpha)).abs() < 1e-12);
    }
    println!("scaling all costs by {zeta} scales all weights by {zeta}^(1/alpha) = {:.12}", zeta.powf(1.0 / alpha));

    // Asymptotic exactness: the scaled gap between the limiting sojourn formula
    // and the exact tagged-job sojourn shrinks as the load rises.
    println!();
    println!("{:<10} {:>24}", "load", "(1-rho)|V_ht - V_exact|");
    let mut previous = f64::INFINITY;
    for rho in [0.9, 0.99, 0.999] {
        let instance = params.with_load(rho)?;
        let eq = hte_job_level(&instance)?;
        let beta = eq.priorities().as_slice()[0];
        let approx = v_ht(&instance, eq.priorities(), beta)?;
        let exact = tagged_job_time(&instance, eq.priorities(), beta)?.value();
        let gap = (1.0 - rho) * (approx - exact).abs();
        println!("{:<10} {:>24.12}", rho, gap);
        assert!(gap < previous, "the scaled gap must shrink with the load");
        previous = gap;
    }
    assert!(previous < 0.01);

    // Equilibrium property in the limit: scaling one's own weight by delta
    // (halving or doubling) must not yield a positive scaled gain as rho -> 1.
    let sequence: Vec<SystemParams> =
        [0.9, 0.99, 0.999].iter().map(|&rho| params.with_load(rho)).collect::<Result<_>>()?;
    println!();
    for delta in [0.5, 2.0] {
        let gains = deviation_check(&sequence, delta)?;
        let last = gains.last().unwrap();
        let worst = last.per_class.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("deviation delta = {delta}: largest scaled gain at rho = {} is {worst:.3e}", last.rho);
        assert!(worst <= 1e-3, "no class should gain from deviating near saturation");
    }

    println!();
    println!("all heavy-traffic checks passed");
    Ok(())
}
