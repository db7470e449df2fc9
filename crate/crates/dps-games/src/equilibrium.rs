//! Equilibrium solvers: best-response dynamics for the exact games and a fixed-point
//! iteration for the finite-class heavy-traffic game.
//!
//! Three games share one template. In the *job-level* game an individual job of class
//! `i` picks `beta` to minimize `c_i * V(beta; betas) + beta^alpha` while the class
//! profile stays put (one job is measure zero). In the *class-level* game the whole
//! class moves: the candidate weight replaces coordinate `i` inside the sojourn system,
//! so a class internalizes the congestion it inflicts on itself. The *class-level
//! heavy-traffic* game replaces the exact sojourn with its closed-form approximation,
//! which turns each best response into a scalar root-find on the first-order condition.
//!
//! All solvers run synchronous sweeps (every class best-responds to the pre-sweep
//! profile, ascending index, optional damping), terminate on a sup-norm relative
//! change below tolerance, and finish with a verification pass that re-minimizes every
//! coordinate against the final profile. Non-convergence is reported in the result,
//! not raised as an error: sweep dynamics carry no general convergence guarantee, and
//! experiment sweeps must record such samples and continue.
//!
//! The scalar minimizer is golden-section search on a log-spaced bracket (the
//! objectives are strictly convex in the weight for `alpha >= 1`; plateaus resolve
//! toward the cheaper weight), followed by a derivative-bisection polish that sharpens
//! the minimizer location from golden section's ~1e-8 relative resolution floor down
//! to ~1e-12 so verification and first-order residuals have headroom. For `alpha < 1`
//! convexity is not guaranteed: each bracket is split into `multistart_count` log-even
//! sub-brackets minimized independently (best-of selection), and results are flagged
//! as heuristic.

use crate::error::{Error, Result};
use crate::exact::{
    solve_waiting_times, tagged_job_time_with_profile, PriorityVector, SystemParams,
    WaitingProfile,
};
use crate::numeric::{bisect_root, golden_section_min, max_rel_diff};

/// Which game a result solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    JobNe,
    ClassNe,
    JobHte,
    ClassHte,
    LimitingHte,
}

impl EquilibriumKind {
    /// Stable lowercase label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            EquilibriumKind::JobNe => "job-ne",
            EquilibriumKind::ClassNe => "class-ne",
            EquilibriumKind::JobHte => "job-hte",
            EquilibriumKind::ClassHte => "class-hte",
            EquilibriumKind::LimitingHte => "limiting-hte",
        }
    }
}

/// Outcome of an equilibrium computation, with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    priorities: PriorityVector,
    kind: EquilibriumKind,
    iterations: usize,
    residual: f64,
    converged: bool,
    bracket_pinned: Vec<usize>,
    heuristic: bool,
}

impl EquilibriumResult {
    pub(crate) fn closed_form(priorities: PriorityVector, kind: EquilibriumKind, residual: f64) -> Self {
        EquilibriumResult {
            priorities,
            kind,
            iterations: 0,
            residual,
            converged: true,
            bracket_pinned: Vec::new(),
            heuristic: false,
        }
    }

    /// Equilibrium weight profile.
    pub fn priorities(&self) -> &PriorityVector {
        &self.priorities
    }

    pub fn kind(&self) -> EquilibriumKind {
        self.kind
    }

    /// Best-response sweeps performed (zero for closed forms).
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Sup-norm relative change at termination (first-order defect for closed forms).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// True when the residual beat the configured tolerance *and* the verification
    /// pass confirmed every coordinate is a best response.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Classes whose best response sat on a bracket endpoint (boundary optimum).
    pub fn bracket_pinned(&self) -> &[usize] {
        &self.bracket_pinned
    }

    /// True when a non-convex inner problem (`alpha < 1`) was handled by multistart
    /// search, which carries no optimality guarantee.
    pub fn heuristic(&self) -> bool {
        self.heuristic
    }
}

/// Tunables for the iterative solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Sweep termination threshold on the sup-norm relative profile change.
    pub br_tolerance: f64,
    /// Maximum number of sweeps before reporting non-convergence.
    pub max_iterations: usize,
    /// Weight search interval `[lo, hi]` for every scalar minimization.
    pub bracket: (f64, f64),
    /// Relative resolution of the scalar minimizer.
    pub inner_tolerance: f64,
    /// Step fraction in `(0, 1]`: `new = old + damping * (best_response - old)`.
    pub damping: f64,
    /// Sub-bracket count for the multistart heuristic used when `alpha < 1`.
    pub multistart_count: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            br_tolerance: 1e-10,
            max_iterations: 10_000,
            bracket: (1e-8, 1e8),
            inner_tolerance: 1e-12,
            damping: 1.0,
            multistart_count: 8,
        }
    }
}

impl SolverConfig {
    /// Reject out-of-range tunables (empty or non-positive bracket, zero
    /// tolerances, damping outside `(0, 1]`, zero iteration budgets).
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bracket;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::InvalidParameter(format!("bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        if !(self.br_tolerance > 0.0 && self.inner_tolerance > 0.0) {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!("damping {} must lie in (0, 1]", self.damping)));
        }
        if self.max_iterations == 0 || self.multistart_count == 0 {
            return Err(Error::InvalidParameter("iteration and multistart counts must be positive".into()));
        }
        Ok(())
    }
}

/// Relative defect below which the verification pass accepts a coordinate.
const VERIFY_TOL: f64 = 1e-8;
/// A minimizer within this many log-units of a bracket endpoint counts as pinned.
const PIN_MARGIN: f64 = 1e-6;

/// Result of one scalar minimization on the log bracket.
struct ScalarMin {
    arg: f64,
    pinned: Option<bool>, // Some(true) = floor, Some(false) = ceiling
}

/// Minimize `f` over `[lo, hi]` in log space. `multistart > 1` splits the bracket
/// into that many sub-brackets (for possibly non-convex objectives). When `deriv`
/// is provided and the minimizer is interior, a bisection on the derivative inside
/// a narrow window polishes the location.
fn minimize_log_bracket<F, D>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
    multistart: usize,
    deriv: Option<&D>,
) -> ScalarMin
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (t_lo, t_hi) = (lo.ln(), hi.ln());
    let g = |t: f64| f(t.exp());
    let mut best: Option<(f64, f64)> = None;
    for s in 0..multistart {
        let a = t_lo + (t_hi - t_lo) * s as f64 / multistart as f64;
        let b = t_lo + (t_hi - t_lo) * (s + 1) as f64 / multistart as f64;
        let (t, ft) = golden_section_min(&g, a, b, tol, 400);
        if best.map_or(true, |(_, fb)| ft < fb) {
            best = Some((t, ft));
        }
    }
    let (mut t_min, _) = best.unwrap();

    let pinned = if t_min - t_lo < PIN_MARGIN {
        t_min = t_lo;
        Some(true)
    } else if t_hi - t_min < PIN_MARGIN {
        t_min = t_hi;
        Some(false)
    } else {
        None
    };

    if pinned.is_none() {
        if let Some(d) = deriv {
            // Polish: bracket the derivative's sign change in a window that is wide
            // relative to golden section's resolution but narrow enough to stay in
            // the located basin, then bisect.
            let mut w = 1e-5;
            while w <= 1e-2 {
                let a = (t_min - w).max(t_lo);
                let b = (t_min + w).min(t_hi);
                let da = d(a.exp());
                let db = d(b.exp());
                if da < 0.0 && db > 0.0 {
                    if let Ok(root) = bisect_root(|t: f64| d(t.exp()), a, b, 1e-14) {
                        t_min = root;
                    }
                    break;
                }
                w *= 10.0;
            }
        }
    }
    ScalarMin { arg: t_min.exp(), pinned }
}

/// Objective of one job of class `i`: waiting cost plus payment, with the class
/// profile held fixed and the tagged weight outside the profile.
fn job_objective(
    params: &SystemParams,
    priorities: &PriorityVector,
    profile: &WaitingProfile,
    i: usize,
    beta: f64,
) -> f64 {
    let v = tagged_job_time_with_profile(params, priorities, profile, beta)
        .expect("validated inputs")
        .value();
    params.cost_rates()[i] * v + beta.powf(params.alpha())
}

/// Analytic derivative of the job objective in the tagged weight.
fn job_objective_deriv(
    params: &SystemParams,
    priorities: &PriorityVector,
    profile: &WaitingProfile,
    i: usize,
    beta: f64,
) -> f64 {
    let lambda = params.arrival_rates();
    let betas = priorities.as_slice();
    let counts = profile.expected_counts();
    let mu = params.service_rate();
    let alpha = params.alpha();

    let mut drain = mu; // D = mu - sum_j lambda_j beta_j / (beta_j + beta)
    let mut drain_d = 0.0; // dD/dbeta = sum_j lambda_j beta_j / (beta_j + beta)^2
    let mut t = 0.0; // T = sum_j beta_j n_j / (beta_j + beta)
    let mut t_d = 0.0; // dT/dbeta = -sum_j beta_j n_j / (beta_j + beta)^2
    for j in 0..betas.len() {
        let denom = betas[j] + beta;
        drain -= lambda[j] * betas[j] / denom;
        drain_d += lambda[j] * betas[j] / (denom * denom);
        t += betas[j] * counts[j] / denom;
        t_d -= betas[j] * counts[j] / (denom * denom);
    }
    let u0 = 1.0 / drain;
    let u0_d = -u0 * u0 * drain_d;
    let v_d = u0_d * (1.0 + t) + u0 * t_d;
    params.cost_rates()[i] * v_d + alpha * beta.powf(alpha - 1.0)
}

fn job_best_response_inner(
    params: &SystemParams,
    priorities: &PriorityVector,
    profile: &WaitingProfile,
    i: usize,
    config: &SolverConfig,
) -> ScalarMin {
    let f = |beta: f64| job_objective(params, priorities, profile, i, beta);
    let d = |beta: f64| job_objective_deriv(params, priorities, profile, i, beta);
    let multistart = if params.alpha() < 1.0 { config.multistart_count } else { 1 };
    minimize_log_bracket(&f, config.bracket.0, config.bracket.1, config.inner_tolerance, multistart, Some(&d))
}

/// Best response of a single class-`i` job to the current profile.
///
/// Errors with `BracketExhausted` when the minimizer lands on a bracket endpoint —
/// for an individual job that signals a mis-specified search interval, not a
/// legitimate boundary optimum.
pub fn best_response_job(
    params: &SystemParams,
    priorities: &PriorityVector,
    i: usize,
    config: &SolverConfig,
) -> Result<f64> {
    config.validate()?;
    if i >= params.num_classes() {
        return Err(Error::IndexOutOfRange { index: i, len: params.num_classes() });
    }
    let profile = solve_waiting_times(params, priorities)?;
    let m = job_best_response_inner(params, priorities, &profile, i, config);
    if let Some(floor) = m.pinned {
        return Err(Error::BracketExhausted {
            endpoint: if floor { config.bracket.0 } else { config.bracket.1 },
            floor,
        });
    }
    Ok(m.arg)
}

/// Shared sweep driver: `best_responses` maps the pre-sweep profile to every class's
/// candidate weight (plus pin flags); damping mixes candidates into the profile.
fn sweep_to_fixed_point<BR>(
    params: &SystemParams,
    config: &SolverConfig,
    init: PriorityVector,
    kind: EquilibriumKind,
    mut best_responses: BR,
) -> Result<EquilibriumResult>
where
    BR: FnMut(&PriorityVector) -> Result<Vec<ScalarMin>>,
{
    config.validate()?;
    if init.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: init.len() });
    }
    let mut current = init;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut pinned: Vec<usize> = Vec::new();
    while iterations < config.max_iterations {
        let responses = best_responses(&current)?;
        iterations += 1;
        let candidate: Vec<f64> = responses.iter().map(|m| m.arg).collect();
        residual = max_rel_diff(&candidate, current.as_slice());
        pinned = responses
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.pinned.map(|_| i))
            .collect();
        if residual < config.br_tolerance {
            // Keep the profile the responses certified (assigning the candidates
            // instead would break bitwise warm-start idempotence).
            break;
        }
        let mixed: Vec<f64> = current
            .as_slice()
            .iter()
            .zip(&candidate)
            .map(|(old, new)| old + config.damping * (new - old))
            .collect();
        current = PriorityVector::new(mixed)?;
    }

    // Verification: every coordinate must re-minimize to (almost) itself.
    let responses = best_responses(&current)?;
    let verify_defect = responses
        .iter()
        .zip(current.as_slice())
        .map(|(m, b)| (m.arg - b).abs() / b)
        .fold(0.0, f64::max);
    let converged = residual < config.br_tolerance && verify_defect < VERIFY_TOL;

    Ok(EquilibriumResult {
        priorities: current,
        kind,
        iterations,
        residual,
        converged,
        bracket_pinned: pinned,
        heuristic: params.alpha() < 1.0,
    })
}

/// Exact job-level equilibrium by synchronous best-response sweeps.
///
/// `init` seeds the dynamics; `None` warm-starts from the closed-form heavy-traffic
/// equilibrium. Non-convergence after `max_iterations` is reported via the result's
/// `converged` flag. A job-level best response pinned to the bracket is an error
/// (see [`best_response_job`]).
pub fn solve_job_ne(
    params: &SystemParams,
    config: &SolverConfig,
    init: Option<PriorityVector>,
) -> Result<EquilibriumResult> {
    config.validate()?;
    let init = match init {
        Some(v) => v,
        None => crate::heavy_traffic::hte_job_level(params)?.priorities().clone(),
    };
    let result = sweep_to_fixed_point(params, config, init, EquilibriumKind::JobNe, |profile| {
        let waits = solve_waiting_times(params, profile)?;
        (0..params.num_classes())
            .map(|i| {
                let m = job_best_response_inner(params, profile, &waits, i, config);
                if let Some(floor) = m.pinned {
                    Err(Error::BracketExhausted {
                        endpoint: if floor { config.bracket.0 } else { config.bracket.1 },
                        floor,
                    })
                } else {
                    Ok(m)
                }
            })
            .collect()
    })?;
    Ok(result)
}

/// Class-level objective: the candidate weight replaces coordinate `i` inside the
/// sojourn system (the class internalizes its own congestion).
fn class_objective(params: &SystemParams, priorities: &PriorityVector, i: usize, beta: f64) -> f64 {
    let moved = priorities.with_weight(i, beta).expect("validated index");
    let profile = solve_waiting_times(params, &moved).expect("validated inputs");
    params.cost_rates()[i] * profile.waits()[i] + beta.powf(params.alpha())
}

/// Analytic derivative of the class objective via the adjoint of the balance system:
/// differentiating `A(beta) W = 1` gives `dW = -A^{-1} (dA W)`, one extra linear
/// solve. A finite-difference derivative here would cap the best-response accuracy
/// near 1e-10 relative, too coarse for the sweep tolerance.
fn class_objective_deriv(params: &SystemParams, priorities: &PriorityVector, i: usize, beta: f64) -> f64 {
    let moved = priorities.with_weight(i, beta).expect("validated index");
    let profile = solve_waiting_times(params, &moved).expect("validated inputs");
    let w = profile.waits();
    let betas = moved.as_slice();
    let lambda = params.arrival_rates();
    let k = betas.len();

    // dA/dbeta_i: row i gains +lambda_j beta_j / (beta_j + beta)^2 on the diagonal
    // and each off-diagonal column j; every other row `r` gains
    // -lambda_i beta_r / (beta + beta_r)^2 on its diagonal and column i.
    let mut da = vec![vec![0.0; k]; k];
    for j in 0..k {
        if j == i {
            continue;
        }
        let q = lambda[j] * betas[j] / (betas[j] + beta).powi(2);
        da[i][j] = q;
        da[i][i] += q;
    }
    for r in 0..k {
        if r == i {
            continue;
        }
        let q = lambda[i] * betas[r] / (beta + betas[r]).powi(2);
        da[r][i] -= q;
        da[r][r] -= q;
    }
    let rhs: Vec<f64> = (0..k)
        .map(|r| -(0..k).map(|c| da[r][c] * w[c]).sum::<f64>())
        .collect();
    let a = crate::exact::balance_matrix(params, &moved);
    let dw = crate::numeric::solve_dense(a, rhs).expect("system already solved once");
    params.cost_rates()[i] * dw[i] + params.alpha() * beta.powf(params.alpha() - 1.0)
}

/// Exact class-level equilibrium by synchronous best-response sweeps.
///
/// Same mechanics as [`solve_job_ne`], but each inner minimization re-solves the
/// sojourn system with the candidate weight in place. Boundary optima are legitimate
/// here (a single class gains nothing from raising everyone's weight together), so
/// pinned coordinates are reported in diagnostics instead of erroring.
pub fn solve_class_ne(
    params: &SystemParams,
    config: &SolverConfig,
    init: Option<PriorityVector>,
) -> Result<EquilibriumResult> {
    config.validate()?;
    let init = match init {
        Some(v) => v,
        None => crate::heavy_traffic::hte_job_level(params)?.priorities().clone(),
    };
    let multistart = if params.alpha() < 1.0 { config.multistart_count } else { 1 };
    let result = sweep_to_fixed_point(params, config, init, EquilibriumKind::ClassNe, |profile| {
        (0..params.num_classes())
            .map(|i| {
                let f = |beta: f64| class_objective(params, profile, i, beta);
                let d = |beta: f64| class_objective_deriv(params, profile, i, beta);
                Ok(minimize_log_bracket(
                    &f,
                    config.bracket.0,
                    config.bracket.1,
                    config.inner_tolerance,
                    multistart,
                    Some(&d),
                ))
            })
            .collect()
    })?;
    Ok(result)
}

/// Class-level heavy-traffic equilibrium by fixed-point iteration on the per-class
/// first-order conditions.
///
/// With `D_i = sum_{j != i} rho_j / beta_j` held at the pre-sweep profile, class `i`
/// minimizes `c_i rho / ((1-rho) mu (beta D_i + rho_i)) + beta^alpha`; for
/// `alpha >= 1` the stationarity condition
///
/// ```text
/// alpha beta^(alpha-1) (beta D_i + rho_i)^2 = c_i rho D_i / ((1-rho) mu)
/// ```
///
/// has a monotone left side, so each inner step is a bisection root-find in log
/// space; when even the bracket floor satisfies first-order increase (in particular
/// whenever `K = 1`, where `D_i = 0`), the objective is increasing and the response
/// pins to the floor, reported in diagnostics.
pub fn solve_class_hte(
    params: &SystemParams,
    config: &SolverConfig,
    init: Option<PriorityVector>,
) -> Result<EquilibriumResult> {
    config.validate()?;
    let init = match init {
        Some(v) => v,
        None => crate::heavy_traffic::hte_job_level(params)?.priorities().clone(),
    };
    let rho = params.load();
    let slack_mu = (1.0 - rho) * params.service_rate();
    let alpha = params.alpha();
    let (lo, hi) = config.bracket;

    let respond = |profile: &PriorityVector| -> Result<Vec<ScalarMin>> {
        let betas = profile.as_slice();
        let inv_loads: Vec<f64> =
            (0..betas.len()).map(|j| params.class_load(j) / betas[j]).collect();
        let total_inv: f64 = inv_loads.iter().sum();
        (0..betas.len())
            .map(|i| {
                let d_i = total_inv - inv_loads[i];
                let rho_i = params.class_load(i);
                let c_i = params.cost_rates()[i];
                let rhs = c_i * rho * d_i / slack_mu;
                let foc = move |b: f64| alpha * b.powf(alpha - 1.0) * (b * d_i + rho_i).powi(2) - rhs;
                let objective =
                    move |b: f64| c_i * rho / (slack_mu * (b * d_i + rho_i)) + b.powf(alpha);
                if alpha >= 1.0 {
                    if foc(lo) >= 0.0 {
                        // Already increasing at the floor: boundary optimum.
                        return Ok(ScalarMin { arg: lo, pinned: Some(true) });
                    }
                    if foc(hi) <= 0.0 {
                        return Ok(ScalarMin { arg: hi, pinned: Some(false) });
                    }
                    let root = bisect_root(|t: f64| foc(t.exp()), lo.ln(), hi.ln(), 1e-14)?;
                    Ok(ScalarMin { arg: root.exp(), pinned: None })
                } else {
                    Ok(minimize_log_bracket(
                        &objective,
                        lo,
                        hi,
                        config.inner_tolerance,
                        config.multistart_count,
                        Some(&foc),
                    ))
                }
            })
            .collect()
    };

    let mut result = sweep_to_fixed_point(params, config, init, EquilibriumKind::ClassHte, respond)?;

    // Converged results must also satisfy the first-order conditions outright
    // (boundary-pinned classes excepted: their optimum is not stationary).
    if result.converged {
        let worst = class_hte_foc_residual(params, &result.priorities, &result.bracket_pinned)?;
        result.converged = worst < VERIFY_TOL;
    }
    Ok(result)
}

/// Worst normalized stationarity defect of a class-game profile under the
/// heavy-traffic waiting approximation: `max_i |alpha beta_i^{alpha-1} -
/// c_i rho D_i / ((1-rho) mu (beta_i D_i + rho_i)^2)| / (alpha beta_i^{alpha-1})`
/// with `D_i = sum_{j != i} rho_j / beta_j`. Classes listed in `pinned` sit on a
/// bracket boundary where the optimum is not stationary, so they are skipped.
pub fn class_hte_foc_residual(
    params: &SystemParams,
    priorities: &PriorityVector,
    pinned: &[usize],
) -> Result<f64> {
    if priorities.len() != params.num_classes() {
        return Err(Error::WrongArity { expected: params.num_classes(), got: priorities.len() });
    }
    let rho = params.load();
    let slack_mu = (1.0 - rho) * params.service_rate();
    let alpha = params.alpha();
    let betas = priorities.as_slice();
    let inv_loads: Vec<f64> = (0..betas.len()).map(|j| params.class_load(j) / betas[j]).collect();
    let total_inv: f64 = inv_loads.iter().sum();
    let mut worst = 0.0f64;
    for i in 0..betas.len() {
        if pinned.contains(&i) {
            continue;
        }
        let d_i = total_inv - inv_loads[i];
        let b = betas[i];
        let payment = alpha * b.powf(alpha - 1.0);
        let waiting = params.cost_rates()[i] * rho * d_i
            / (slack_mu * (b * d_i + params.class_load(i)).powi(2));
        worst = worst.max((payment - waiting).abs() / payment);
    }
    Ok(worst)
}
