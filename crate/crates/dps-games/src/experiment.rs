//! Config-driven experiment runner: JSON scenario in, deterministic CSV out.
//!
//! One config file describes one run. The `mode` field selects what the run does
//! (a solver surface, a simulation comparison, or a sampled sweep); `prepare`
//! validates the document against the invoked mode and resolves every default, and
//! `run` executes the prepared scenario and renders the output document.
//!
//! Output format: lines starting with `#` carry run metadata (tool version, SHA-256
//! of the config file, effective seed, RNG algorithm), followed by a strict CSV body
//! (UTF-8, LF line endings, no quoting needed because fields never contain commas).
//! Floats are printed with 17 significant digits so parsing them back is exact.
//! Per-class vectors are packed into a single field as `;`-separated values.
//!
//! Determinism contract: a fixed (config file, seed) pair produces byte-identical
//! output. Sampled instances draw from per-sample RNG substreams keyed by sample id
//! alone, so sweeps reuse common random numbers across sweep points and parallel
//! execution cannot reorder draws; rows are emitted sorted by (sweep point, sample).
//!
//! Sampled-instance model: costs `c_i ~ Uniform[0,10) + cost_offset` and arrival
//! rates `lambda_i ~ Uniform[0,10) + arrival_offset`, costs sorted descending with
//! exact ties split by the next draw times 1e-9; the service rate is set from the
//! requested load. Baseline defaults: 10 classes, offsets 1, alpha 1, load 0.9,
//! 100 samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::distribution::Distribution;
use crate::equilibrium::{
    class_hte_foc_residual, solve_class_hte, solve_class_ne, solve_job_ne, EquilibriumResult,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::exact::{solve_waiting_times, PriorityVector, SystemParams};
use crate::heavy_traffic::{
    hte_foc_residual, hte_job_level, limiting_hte, sample_finite_game, LimitingGameSpec,
};
use crate::metrics::poa_report;
use crate::network::{network_poa_bound, solve_network_hte, NetworkSpec};
use crate::numeric::five_number_summary;
use crate::sim::{
    simulate_dps, simulate_ros, simulate_strict_priority, Policy, SimConfig, RNG_ALGORITHM,
};

/// What a run does; must agree with the invoked subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Sampled sweep comparing heavy-traffic equilibria against exact ones.
    Compare,
    /// Efficiency, revenue, optimal cost, and price-of-anarchy table.
    Metrics,
    /// Analytic-vs-simulated comparison under a chosen service policy.
    Simulate,
    /// Job-level heavy-traffic equilibrium of one instance.
    Hte,
    /// Job-level exact equilibrium by best-response dynamics.
    ExactNe,
    /// Class-level exact equilibrium by best-response dynamics.
    ClassNe,
    /// Class-level equilibrium under the heavy-traffic waiting approximation.
    ClassHte,
    /// Limiting strategy function and finite-game concentration gaps.
    Limiting,
    /// Multi-resource bidding equilibrium.
    Network,
    /// Growing cost/arrival-ratio sequence demonstrating approximation divergence.
    DivergenceProbe,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Compare => "compare",
            Mode::Metrics => "metrics",
            Mode::Simulate => "simulate",
            Mode::Hte => "hte",
            Mode::ExactNe => "exact-ne",
            Mode::ClassNe => "class-ne",
            Mode::ClassHte => "class-hte",
            Mode::Limiting => "limiting",
            Mode::Network => "network",
            Mode::DivergenceProbe => "divergence-probe",
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_class_count() -> usize {
    10
}

fn default_offset() -> f64 {
    1.0
}

fn default_load() -> f64 {
    0.9
}

fn default_sample_count() -> usize {
    100
}

fn default_class_counts() -> Vec<usize> {
    vec![10, 100, 1000]
}

fn default_ratios() -> Vec<f64> {
    vec![1.0, 10.0, 100.0, 1000.0]
}

/// Probe default: high enough that the cheapest class still buys priority at
/// every default ratio (at lower loads it exits the game entirely once the
/// spread is wide, which ends the sequence in flags instead of growing values).
fn default_divergence_load() -> f64 {
    0.99
}

/// One queueing instance, stated explicitly.
///
/// Classes are indexed in descending-cost order throughout the tool, so
/// `cost_rates` must arrive strictly descending; exactly one of `service_rate`
/// or `load` fixes the server speed (`load` means `mu = sum(lambda) / load`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    arrival_rates: Vec<f64>,
    cost_rates: Vec<f64>,
    #[serde(default)]
    service_rate: Option<f64>,
    #[serde(default)]
    load: Option<f64>,
    #[serde(default = "one")]
    alpha: f64,
}

impl SystemSpec {
    fn build(&self) -> Result<SystemParams> {
        for pair in self.cost_rates.windows(2) {
            if !(pair[0] > pair[1]) {
                return Err(Error::Config(
                    "cost_rates must be strictly descending (classes are indexed in \
                     descending-cost order)"
                        .into(),
                ));
            }
        }
        let mu = match (self.service_rate, self.load) {
            (Some(mu), None) => mu,
            (None, Some(rho)) => {
                if !(rho.is_finite() && 0.0 < rho && rho < 1.0) {
                    return Err(Error::Config(format!("load {rho} must lie in (0, 1)")));
                }
                self.arrival_rates.iter().sum::<f64>() / rho
            }
            _ => {
                return Err(Error::Config(
                    "give exactly one of service_rate or load".into(),
                ))
            }
        };
        SystemParams::new(self.arrival_rates.clone(), self.cost_rates.clone(), mu, self.alpha)
            .map_err(|e| Error::Config(format!("system: {e}")))
    }
}

/// Random-instance generator settings (defaults are the baseline study point).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default = "default_class_count")]
    class_count: usize,
    #[serde(default = "default_offset")]
    cost_offset: f64,
    #[serde(default = "default_offset")]
    arrival_offset: f64,
    #[serde(default = "one")]
    alpha: f64,
    #[serde(default = "default_load")]
    load: f64,
    #[serde(default = "default_sample_count")]
    sample_count: usize,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            class_count: default_class_count(),
            cost_offset: default_offset(),
            arrival_offset: default_offset(),
            alpha: one(),
            load: default_load(),
            sample_count: default_sample_count(),
        }
    }
}

impl SamplingSpec {
    fn validate(&self) -> Result<()> {
        if self.class_count == 0 || self.sample_count == 0 {
            return Err(Error::Config("class_count and sample_count must be positive".into()));
        }
        validate_axis_value(SweepAxis::Load, self.load)?;
        validate_axis_value(SweepAxis::Alpha, self.alpha)?;
        validate_axis_value(SweepAxis::CostOffset, self.cost_offset)?;
        validate_axis_value(SweepAxis::ArrivalOffset, self.arrival_offset)
    }

    fn with_axis(&self, axis: SweepAxis, value: f64) -> SamplingSpec {
        let mut spec = self.clone();
        match axis {
            SweepAxis::Load => spec.load = value,
            SweepAxis::Alpha => spec.alpha = value,
            SweepAxis::CostOffset => spec.cost_offset = value,
            SweepAxis::ArrivalOffset => spec.arrival_offset = value,
            SweepAxis::ClassCount => spec.class_count = value as usize,
        }
        spec
    }
}

/// Which generator parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Load,
    Alpha,
    CostOffset,
    ArrivalOffset,
    ClassCount,
}

impl SweepAxis {
    fn label(&self) -> &'static str {
        match self {
            SweepAxis::Load => "load",
            SweepAxis::Alpha => "alpha",
            SweepAxis::CostOffset => "cost-offset",
            SweepAxis::ArrivalOffset => "arrival-offset",
            SweepAxis::ClassCount => "class-count",
        }
    }
}

fn validate_axis_value(axis: SweepAxis, value: f64) -> Result<()> {
    let ok = match axis {
        SweepAxis::Load => value.is_finite() && 0.0 < value && value < 1.0,
        SweepAxis::Alpha => value.is_finite() && value > 0.0,
        SweepAxis::CostOffset | SweepAxis::ArrivalOffset => value.is_finite() && value > 0.0,
        SweepAxis::ClassCount => value.fract() == 0.0 && value >= 1.0 && value <= 1e6,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("invalid {} value {value}", axis.label())))
    }
}

/// One swept generator parameter and the values it takes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    axis: SweepAxis,
    values: Vec<f64>,
}

/// Optional overrides of the equilibrium solver tunables.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    br_tolerance: Option<f64>,
    #[serde(default)]
    max_iterations: Option<usize>,
    #[serde(default)]
    bracket: Option<(f64, f64)>,
    #[serde(default)]
    inner_tolerance: Option<f64>,
    #[serde(default)]
    damping: Option<f64>,
    #[serde(default)]
    multistart_count: Option<usize>,
}

impl SolverSpec {
    fn build(&self) -> Result<SolverConfig> {
        let mut config = SolverConfig::default();
        if let Some(v) = self.br_tolerance {
            config.br_tolerance = v;
        }
        if let Some(v) = self.max_iterations {
            config.max_iterations = v;
        }
        if let Some(v) = self.bracket {
            config.bracket = v;
        }
        if let Some(v) = self.inner_tolerance {
            config.inner_tolerance = v;
        }
        if let Some(v) = self.damping {
            config.damping = v;
        }
        if let Some(v) = self.multistart_count {
            config.multistart_count = v;
        }
        config.validate().map_err(|e| Error::Config(format!("solver: {e}")))?;
        Ok(config)
    }
}

/// Optional overrides of the simulation run parameters.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default)]
    warmup_time: Option<f64>,
    #[serde(default)]
    measurement_time: Option<f64>,
    #[serde(default)]
    replications: Option<usize>,
    #[serde(default)]
    policy: Option<String>,
}

impl SimSpec {
    fn build(&self, params: &SystemParams, seed: u64) -> Result<SimConfig> {
        let policy = match self.policy.as_deref() {
            None => Policy::Dps,
            Some("dps") => Policy::Dps,
            Some("strict-priority") => Policy::StrictPriority,
            Some("ros") => Policy::Ros,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown policy {other:?} (expected dps, strict-priority, or ros)"
                )))
            }
        };
        let mut config = SimConfig::defaults_for(params, seed, policy);
        if let Some(v) = self.warmup_time {
            config.warmup_time = v;
        }
        if let Some(v) = self.measurement_time {
            config.measurement_time = v;
        }
        if let Some(v) = self.replications {
            config.replications = v;
        }
        config.validate().map_err(|e| Error::Config(format!("sim: {e}")))?;
        Ok(config)
    }
}

/// Multi-resource market description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    arrival_rates: Vec<f64>,
    cost_rates: Vec<f64>,
    resource_sets: Vec<Vec<usize>>,
    service_rates: Vec<f64>,
}

/// Serializable distribution: uniform interval or weighted point masses.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistSpec {
    Uniform { lo: f64, hi: f64 },
    PointMasses { points: Vec<(f64, f64)> },
}

impl DistSpec {
    fn build(&self) -> Result<Distribution> {
        match self {
            DistSpec::Uniform { lo, hi } => Distribution::uniform(*lo, *hi),
            DistSpec::PointMasses { points } => Distribution::point_masses(points.clone()),
        }
        .map_err(|e| Error::Config(format!("distribution: {e}")))
    }
}

/// Limiting-game description plus the finite sizes to check concentration at.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitingSection {
    cost_distribution: DistSpec,
    arrival_distribution: DistSpec,
    #[serde(default)]
    service_rate: Option<f64>,
    #[serde(default)]
    load: Option<f64>,
    #[serde(default = "one")]
    alpha: f64,
    #[serde(default = "default_class_counts")]
    class_counts: Vec<usize>,
    #[serde(default)]
    priority_bracket: Option<(f64, f64)>,
}

/// Settings for the widening-ratio divergence sequence.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceSection {
    #[serde(default = "default_ratios")]
    ratios: Vec<f64>,
    #[serde(default = "default_divergence_load")]
    load: f64,
    #[serde(default = "one")]
    alpha: f64,
}

impl Default for DivergenceSection {
    fn default() -> Self {
        DivergenceSection {
            ratios: default_ratios(),
            load: default_divergence_load(),
            alpha: one(),
        }
    }
}

/// A parsed scenario document. See the module documentation for field meanings;
/// `prepare` enforces which sections each mode accepts.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    mode: Mode,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    system: Option<SystemSpec>,
    #[serde(default)]
    priorities: Option<Vec<f64>>,
    #[serde(default)]
    sampling: Option<SamplingSpec>,
    #[serde(default)]
    sweep: Option<SweepSpec>,
    #[serde(default)]
    solver: Option<SolverSpec>,
    #[serde(default)]
    sim: Option<SimSpec>,
    #[serde(default)]
    network: Option<NetworkSection>,
    #[serde(default)]
    limiting: Option<LimitingSection>,
    #[serde(default)]
    divergence: Option<DivergenceSection>,
}

impl ScenarioConfig {
    /// Parse a JSON scenario document; unknown fields are rejected.
    pub fn from_json(bytes: &[u8]) -> Result<ScenarioConfig> {
        serde_json::from_slice(bytes).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// Hex SHA-256 digest of the raw config file, recorded in output metadata.
pub fn config_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolved limiting-game plan.
struct LimitingPlan {
    spec: LimitingGameSpec,
    alpha: f64,
    class_counts: Vec<usize>,
}

/// A validated scenario with every default resolved; `run` executes it.
pub struct PreparedScenario {
    mode: Mode,
    seed: u64,
    system: Option<SystemParams>,
    priorities: Option<PriorityVector>,
    sampling: Option<SamplingSpec>,
    sweep: Option<(SweepAxis, Vec<f64>)>,
    solver: SolverConfig,
    sim: Option<SimSpec>,
    network: Option<NetworkSpec>,
    limiting: Option<LimitingPlan>,
    divergence: Option<DivergenceSection>,
}

impl PreparedScenario {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Validate `config` against the invoked mode and resolve defaults.
///
/// Everything that can be rejected before any solving happens is rejected here,
/// so callers can map this function's errors to "bad configuration" and `run`'s
/// errors to "solver failure". The effective seed is `seed_override`, else the
/// config's `rng_seed`, else 0.
pub fn prepare(
    config: ScenarioConfig,
    invoked: Mode,
    seed_override: Option<u64>,
) -> Result<PreparedScenario> {
    if config.mode != invoked {
        return Err(Error::Config(format!(
            "config mode {:?} does not match invoked mode {:?}",
            config.mode.label(),
            invoked.label()
        )));
    }
    let allowed: &[&str] = match config.mode {
        Mode::Compare => &["sampling", "sweep", "solver"],
        Mode::Metrics => &["system", "sweep"],
        Mode::Simulate => &["system", "sim", "priorities"],
        Mode::Hte => &["system"],
        Mode::ExactNe | Mode::ClassNe | Mode::ClassHte => &["system", "solver", "priorities"],
        Mode::Limiting => &["limiting"],
        Mode::Network => &["network", "solver"],
        Mode::DivergenceProbe => &["divergence", "solver"],
    };
    let present: [(&str, bool); 9] = [
        ("system", config.system.is_some()),
        ("priorities", config.priorities.is_some()),
        ("sampling", config.sampling.is_some()),
        ("sweep", config.sweep.is_some()),
        ("sim", config.sim.is_some()),
        ("network", config.network.is_some()),
        ("limiting", config.limiting.is_some()),
        ("divergence", config.divergence.is_some()),
        ("solver", config.solver.is_some()),
    ];
    for (name, is_present) in present {
        if is_present && !allowed.contains(&name) {
            return Err(Error::Config(format!(
                "section {name:?} is not used in {} mode",
                config.mode.label()
            )));
        }
    }

    let seed = seed_override.or(config.rng_seed).unwrap_or(0);
    let solver = config.solver.clone().unwrap_or_default().build()?;

    let system = match config.mode {
        Mode::Metrics | Mode::Simulate | Mode::Hte | Mode::ExactNe | Mode::ClassNe
        | Mode::ClassHte => Some(
            config
                .system
                .as_ref()
                .ok_or_else(|| {
                    Error::Config(format!("{} mode needs a system section", config.mode.label()))
                })?
                .build()?,
        ),
        _ => None,
    };

    let priorities = match &config.priorities {
        None => None,
        Some(weights) => {
            let params = system.as_ref().expect("priorities allowed only with a system");
            if weights.len() != params.num_classes() {
                return Err(Error::Config(format!(
                    "priorities has {} entries for {} classes",
                    weights.len(),
                    params.num_classes()
                )));
            }
            let vector = PriorityVector::new(weights.clone())
                .map_err(|e| Error::Config(format!("priorities: {e}")))?;
            Some(vector)
        }
    };

    let sampling = match config.mode {
        Mode::Compare => {
            let spec = config.sampling.clone().unwrap_or_default();
            spec.validate()?;
            Some(spec)
        }
        _ => None,
    };

    let sweep = match &config.sweep {
        None => None,
        Some(spec) => {
            if config.mode == Mode::Metrics
                && !matches!(spec.axis, SweepAxis::Load | SweepAxis::Alpha)
            {
                return Err(Error::Config(format!(
                    "metrics mode sweeps only load or alpha, not {}",
                    spec.axis.label()
                )));
            }
            if config.mode == Mode::Compare && spec.values.is_empty() {
                return Err(Error::Config("compare sweep values must be nonempty".into()));
            }
            for &v in &spec.values {
                validate_axis_value(spec.axis, v)?;
            }
            Some((spec.axis, spec.values.clone()))
        }
    };

    let network = match &config.network {
        None => {
            if config.mode == Mode::Network {
                return Err(Error::Config("network mode needs a network section".into()));
            }
            None
        }
        Some(section) => Some(
            NetworkSpec::new(
                section.arrival_rates.clone(),
                section.cost_rates.clone(),
                section.resource_sets.clone(),
                section.service_rates.clone(),
            )
            .map_err(|e| Error::Config(format!("network: {e}")))?,
        ),
    };

    let limiting = match &config.limiting {
        None => {
            if config.mode == Mode::Limiting {
                return Err(Error::Config("limiting mode needs a limiting section".into()));
            }
            None
        }
        Some(section) => {
            let cost = section.cost_distribution.build()?;
            let arrival = section.arrival_distribution.build()?;
            let mean_arrival =
                arrival.mean().map_err(|e| Error::Config(format!("arrival mean: {e}")))?;
            let service_rate = match (section.service_rate, section.load) {
                (Some(mu), None) => mu,
                (None, Some(rho)) => {
                    if !(rho.is_finite() && 0.0 < rho && rho < 1.0) {
                        return Err(Error::Config(format!("load {rho} must lie in (0, 1)")));
                    }
                    mean_arrival / rho
                }
                _ => {
                    return Err(Error::Config(
                        "give exactly one of service_rate or load".into(),
                    ))
                }
            };
            if !(section.alpha.is_finite() && section.alpha > 0.0) {
                return Err(Error::Config(format!("alpha {} must be positive", section.alpha)));
            }
            if section.class_counts.is_empty() || section.class_counts.contains(&0) {
                return Err(Error::Config("class_counts must be nonempty and positive".into()));
            }
            let bracket = section.priority_bracket.unwrap_or(solver.bracket);
            let spec = LimitingGameSpec::new(cost, arrival, service_rate, bracket)
                .map_err(|e| Error::Config(format!("limiting: {e}")))?;
            Some(LimitingPlan {
                spec,
                alpha: section.alpha,
                class_counts: section.class_counts.clone(),
            })
        }
    };

    let divergence = match config.mode {
        Mode::DivergenceProbe => {
            let mut section = config.divergence.clone().unwrap_or_default();
            if section.ratios.is_empty() {
                return Err(Error::Config("divergence ratios must be nonempty".into()));
            }
            if section.ratios.iter().any(|r| !r.is_finite() || *r < 1.0) {
                return Err(Error::Config("divergence ratios must be finite and >= 1".into()));
            }
            validate_axis_value(SweepAxis::Load, section.load)?;
            validate_axis_value(SweepAxis::Alpha, section.alpha)?;
            section.ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Some(section)
        }
        _ => None,
    };

    Ok(PreparedScenario {
        mode: config.mode,
        seed,
        system,
        priorities,
        sampling,
        sweep,
        solver,
        sim: config.sim.clone(),
        network,
        limiting,
        divergence,
    })
}

/// Execute a prepared scenario and render its output document.
///
/// Errors out of this function mean a hard solver or simulation failure; all
/// configuration problems were already rejected by `prepare`.
pub fn run(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    match scenario.mode {
        Mode::Compare => run_compare(scenario, config_hash),
        Mode::Metrics => run_metrics(scenario, config_hash),
        Mode::Simulate => run_simulate(scenario, config_hash),
        Mode::Hte | Mode::ExactNe | Mode::ClassNe | Mode::ClassHte => {
            run_equilibrium(scenario, config_hash)
        }
        Mode::Limiting => run_limiting(scenario, config_hash),
        Mode::Network => run_network(scenario, config_hash),
        Mode::DivergenceProbe => run_divergence_probe(scenario, config_hash),
    }
}

/// 17-significant-digit float rendering; `s.parse::<f64>()` recovers the value.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f(x)).collect::<Vec<_>>().join(";")
}

fn fmt_bool(b: bool) -> String {
    if b { "true".into() } else { "false".into() }
}

/// CSV document accumulator: metadata comment lines, one header, data rows.
struct Csv {
    columns: usize,
    lines: Vec<String>,
}

impl Csv {
    fn new(header: &[&str], config_hash: &str, seed: u64) -> Csv {
        let lines = vec![
            format!("# tool_version: {}", env!("CARGO_PKG_VERSION")),
            format!("# config_sha256: {config_hash}"),
            format!("# seed: {seed}"),
            format!("# rng: {RNG_ALGORITHM}"),
            header.join(","),
        ];
        Csv { columns: header.len(), lines }
    }

    fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.columns);
        debug_assert!(fields
            .iter()
            .all(|f| !f.contains(',') && !f.contains('"') && !f.contains('\n')));
        self.lines.push(fields.join(","));
    }

    fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Draw one instance from the generator: interleaved cost/arrival uniforms on a
/// dedicated substream, costs sorted descending, exact ties split downward.
fn draw_sampled_params(spec: &SamplingSpec, seed: u64, sample_id: usize) -> Result<SystemParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_id as u64);
    let mut pairs: Vec<(f64, f64)> = (0..spec.class_count)
        .map(|_| {
            let c = rng.gen::<f64>() * 10.0 + spec.cost_offset;
            let l = rng.gen::<f64>() * 10.0 + spec.arrival_offset;
            (c, l)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for i in 1..pairs.len() {
        if pairs[i].0 >= pairs[i - 1].0 {
            pairs[i].0 = pairs[i - 1].0 - rng.gen::<f64>() * 1e-9;
        }
    }
    let (costs, arrivals): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let total: f64 = arrivals.iter().sum();
    SystemParams::new(arrivals, costs, total / spec.load, spec.alpha)
}

/// Largest per-class relative gap between the approximate and exact profiles.
fn profile_rel_error(approx: &[f64], exact: &[f64]) -> f64 {
    approx
        .iter()
        .zip(exact)
        .map(|(a, e)| (a - e).abs() / e.abs())
        .fold(0.0, f64::max)
}

/// Outcome of one compare/divergence sample; empty vectors mean "not available".
struct SampleOutcome {
    classes: usize,
    arrival_rates: Vec<f64>,
    cost_rates: Vec<f64>,
    beta_ht: Vec<f64>,
    beta_ne: Vec<f64>,
    converged: bool,
    iterations: Option<usize>,
    rel_error: Option<f64>,
}

/// Solve one sampled (or explicit) instance end to end, recording failures as
/// flags rather than raising them.
fn compare_outcome(params: Result<SystemParams>, solver: &SolverConfig) -> SampleOutcome {
    let mut outcome = SampleOutcome {
        classes: 0,
        arrival_rates: Vec::new(),
        cost_rates: Vec::new(),
        beta_ht: Vec::new(),
        beta_ne: Vec::new(),
        converged: false,
        iterations: None,
        rel_error: None,
    };
    let params = match params {
        Ok(p) => p,
        Err(_) => return outcome,
    };
    outcome.classes = params.num_classes();
    outcome.arrival_rates = params.arrival_rates().to_vec();
    outcome.cost_rates = params.cost_rates().to_vec();
    let hte = match hte_job_level(&params) {
        Ok(r) => r,
        Err(_) => return outcome,
    };
    outcome.beta_ht = hte.priorities().as_slice().to_vec();
    match solve_job_ne(&params, solver, None) {
        Ok(ne) => {
            outcome.beta_ne = ne.priorities().as_slice().to_vec();
            outcome.converged = ne.converged();
            outcome.iterations = Some(ne.iterations());
            outcome.rel_error = Some(profile_rel_error(&outcome.beta_ht, &outcome.beta_ne));
        }
        Err(_) => {}
    }
    outcome
}

const COMPARE_HEADER: [&str; 21] = [
    "row",
    "axis",
    "point",
    "sample",
    "classes",
    "load",
    "alpha",
    "cost_offset",
    "arrival_offset",
    "arrival_rates",
    "cost_rates",
    "beta_ht",
    "beta_ne",
    "converged",
    "iterations",
    "relative_error",
    "err_min",
    "err_q1",
    "err_median",
    "err_q3",
    "err_max",
];

fn run_compare(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    let base = scenario.sampling.as_ref().expect("compare always has a sampling plan");
    let points: Vec<(String, String, SamplingSpec)> = match &scenario.sweep {
        None => vec![("none".into(), String::new(), base.clone())],
        Some((axis, values)) => values
            .iter()
            .map(|&v| {
                let label = match axis {
                    SweepAxis::ClassCount => format!("{}", v as usize),
                    _ => fmt_f(v),
                };
                (axis.label().to_string(), label, base.with_axis(*axis, v))
            })
            .collect(),
    };

    let jobs: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(pi, (_, _, spec))| (0..spec.sample_count).map(move |s| (pi, s)))
        .collect();
    let outcomes: Vec<SampleOutcome> = jobs
        .par_iter()
        .map(|&(pi, s)| {
            let spec = &points[pi].2;
            compare_outcome(draw_sampled_params(spec, scenario.seed, s), &scenario.solver)
        })
        .collect();

    let mut csv = Csv::new(&COMPARE_HEADER, config_hash, scenario.seed);
    let mut cursor = 0;
    for (axis_label, point_label, spec) in &points {
        let point_fields = [
            fmt_f(spec.load),
            fmt_f(spec.alpha),
            fmt_f(spec.cost_offset),
            fmt_f(spec.arrival_offset),
        ];
        let slice = &outcomes[cursor..cursor + spec.sample_count];
        cursor += spec.sample_count;
        for (s, outcome) in slice.iter().enumerate() {
            csv.row(vec![
                "sample".into(),
                axis_label.clone(),
                point_label.clone(),
                s.to_string(),
                outcome.classes.to_string(),
                point_fields[0].clone(),
                point_fields[1].clone(),
                point_fields[2].clone(),
                point_fields[3].clone(),
                fmt_list(&outcome.arrival_rates),
                fmt_list(&outcome.cost_rates),
                fmt_list(&outcome.beta_ht),
                fmt_list(&outcome.beta_ne),
                fmt_bool(outcome.converged),
                outcome.iterations.map(|n| n.to_string()).unwrap_or_default(),
                outcome.rel_error.map(fmt_f).unwrap_or_default(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        let errors: Vec<f64> =
            slice.iter().filter(|o| o.converged).filter_map(|o| o.rel_error).collect();
        let stats = if errors.is_empty() {
            [const { String::new() }; 5]
        } else {
            five_number_summary(&errors).map(fmt_f)
        };
        let all_converged = slice.iter().all(|o| o.converged);
        csv.row(vec![
            "summary".into(),
            axis_label.clone(),
            point_label.clone(),
            String::new(),
            spec.class_count.to_string(),
            point_fields[0].clone(),
            point_fields[1].clone(),
            point_fields[2].clone(),
            point_fields[3].clone(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            fmt_bool(all_converged),
            String::new(),
            String::new(),
            stats[0].clone(),
            stats[1].clone(),
            stats[2].clone(),
            stats[3].clone(),
            stats[4].clone(),
        ]);
    }
    Ok(csv.finish())
}

const METRICS_HEADER: [&str; 12] = [
    "axis",
    "point",
    "classes",
    "load",
    "alpha",
    "system_cost",
    "revenue",
    "optimal_cost",
    "poa",
    "poa_bound_tight",
    "poa_bound_loose",
    "identity_gap",
];

fn run_metrics(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    let base = scenario.system.as_ref().expect("metrics always has a system");
    let points: Vec<(String, String, SystemParams)> = match &scenario.sweep {
        None => vec![("none".into(), String::new(), base.clone())],
        Some((axis, values)) => {
            let mut points = Vec::with_capacity(values.len());
            for &v in values {
                let params = match axis {
                    SweepAxis::Load => base.with_load(v)?,
                    SweepAxis::Alpha => base.with_alpha(v)?,
                    _ => unreachable!("prepare restricts metrics sweep axes"),
                };
                points.push((axis.label().to_string(), fmt_f(v), params));
            }
            points
        }
    };

    let mut csv = Csv::new(&METRICS_HEADER, config_hash, scenario.seed);
    for (axis_label, point_label, params) in &points {
        let report = poa_report(params);
        csv.row(vec![
            axis_label.clone(),
            point_label.clone(),
            params.num_classes().to_string(),
            fmt_f(params.load()),
            fmt_f(params.alpha()),
            fmt_f(report.system_cost),
            fmt_f(report.revenue),
            fmt_f(report.optimal_cost),
            fmt_f(report.poa),
            fmt_f(report.poa_bound_tight),
            fmt_f(report.poa_bound_loose),
            fmt_f(report.system_cost - params.alpha() * report.revenue),
        ]);
    }
    Ok(csv.finish())
}

const SIMULATE_HEADER: [&str; 8] =
    ["policy", "label", "class", "analytic", "simulated", "std_error", "z_score", "replications"];

fn run_simulate(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    let params = scenario.system.as_ref().expect("simulate always has a system");
    let sim_spec = scenario.sim.clone().unwrap_or_default();
    let config = sim_spec.build(params, scenario.seed)?;
    let priorities = match &scenario.priorities {
        Some(p) => p.clone(),
        None => hte_job_level(params)?.priorities().clone(),
    };

    let mut csv = Csv::new(&SIMULATE_HEADER, config_hash, scenario.seed);
    let push = |csv: &mut Csv, label: &str, class: String, analytic: f64, mean: f64,
                se: f64, reps: usize| {
        csv.row(vec![
            config.policy.label().into(),
            label.into(),
            class,
            fmt_f(analytic),
            fmt_f(mean),
            fmt_f(se),
            fmt_f((mean - analytic) / se),
            reps.to_string(),
        ]);
    };

    match config.policy {
        Policy::Dps => {
            let profile = solve_waiting_times(params, &priorities)?;
            let estimates = simulate_dps(params, &priorities, &config)?;
            for (i, est) in estimates.waits.iter().enumerate() {
                push(&mut csv, &est.label, i.to_string(), profile.waits()[i], est.mean,
                     est.std_error, est.replications);
            }
            for (i, est) in estimates.counts.iter().enumerate() {
                push(&mut csv, &est.label, i.to_string(), profile.expected_counts()[i],
                     est.mean, est.std_error, est.replications);
            }
        }
        Policy::StrictPriority => {
            let analytic = crate::metrics::optimal_cost_cmu(params);
            let est = simulate_strict_priority(params, &config)?;
            push(&mut csv, &est.label, String::new(), analytic, est.mean, est.std_error,
                 est.replications);
        }
        Policy::Ros => {
            let estimates = simulate_ros(params, &priorities, &config)?;
            for (i, est) in estimates.iter().enumerate() {
                // No exact finite-load formula is implemented for weighted
                // random-order sojourns; the reference is the heavy-traffic
                // limit, so large z-scores at moderate load are expected and
                // shrink as the load approaches one.
                let reference = crate::heavy_traffic::w_ht_class(params, &priorities, i)?;
                push(&mut csv, &est.label, i.to_string(), reference, est.mean, est.std_error,
                     est.replications);
            }
        }
    }
    Ok(csv.finish())
}

const EQUILIBRIUM_HEADER: [&str; 12] = [
    "row",
    "class",
    "arrival_rate",
    "cost_rate",
    "priority",
    "pinned",
    "kind",
    "converged",
    "iterations",
    "residual",
    "heuristic",
    "foc_residual",
];

fn run_equilibrium(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    let params = scenario.system.as_ref().expect("equilibrium modes always have a system");
    let init = scenario.priorities.clone();
    let (result, foc): (EquilibriumResult, Option<f64>) = match scenario.mode {
        Mode::Hte => {
            let r = hte_job_level(params)?;
            let foc = hte_foc_residual(params, r.priorities())?;
            (r, Some(foc))
        }
        Mode::ExactNe => (solve_job_ne(params, &scenario.solver, init)?, None),
        Mode::ClassNe => (solve_class_ne(params, &scenario.solver, init)?, None),
        Mode::ClassHte => {
            let r = solve_class_hte(params, &scenario.solver, init)?;
            let foc = class_hte_foc_residual(params, r.priorities(), r.bracket_pinned())?;
            (r, Some(foc))
        }
        _ => unreachable!("run_equilibrium handles only equilibrium modes"),
    };

    let mut csv = Csv::new(&EQUILIBRIUM_HEADER, config_hash, scenario.seed);
    for i in 0..params.num_classes() {
        csv.row(vec![
            "class".into(),
            i.to_string(),
            fmt_f(params.arrival_rates()[i]),
            fmt_f(params.cost_rates()[i]),
            fmt_f(result.priorities().as_slice()[i]),
            fmt_bool(result.bracket_pinned().contains(&i)),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    csv.row(vec![
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        result.kind().label().into(),
        fmt_bool(result.converged()),
        result.iterations().to_string(),
        fmt_f(result.residual()),
        fmt_bool(result.heuristic()),
        foc.map(fmt_f).unwrap_or_default(),
    ]);
    Ok(csv.finish())
}

const LIMITING_HEADER: [&str; 7] =
    ["row", "class_count", "cost", "priority", "max_abs_gap", "normalizing_constant", "gamma"];

fn run_limiting(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    let plan = scenario.limiting.as_ref().expect("limiting always has a plan");
    let strategy = limiting_hte(&plan.spec, plan.alpha)?;
    let (lo, hi) = strategy.cost_support();

    let mut csv = Csv::new(&LIMITING_HEADER, config_hash, scenario.seed);
    let grid: Vec<f64> = if hi - lo < 1e-12 {
        vec![lo]
    } else {
        (0..=10).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect()
    };
    for c in grid {
        csv.row(vec![
            "strategy".into(),
            String::new(),
            fmt_f(c),
            fmt_f(strategy.priority(c)),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for &count in &plan.class_counts {
        // A fresh generator per count on the same stream makes the sampled games
        // nested prefixes of one i.i.d. sequence, so the gap column is comparable
        // across rows and shrinks as the class count grows.
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let params = sample_finite_game(&plan.spec, count, plan.alpha, &mut rng)?;
        let finite = hte_job_level(&params)?;
        let gap = finite
            .priorities()
            .as_slice()
            .iter()
            .zip(params.cost_rates())
            .map(|(&beta, &c)| (beta - strategy.priority(c)).abs())
            .fold(0.0, f64::max);
        csv.row(vec![
            "finite".into(),
            count.to_string(),
            String::new(),
            String::new(),
            fmt_f(gap),
            String::new(),
            String::new(),
        ]);
    }
    csv.row(vec![
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt_f(strategy.normalizing_constant()),
        fmt_f(strategy.gamma()),
    ]);
    Ok(csv.finish())
}

const NETWORK_HEADER: [&str; 11] = [
    "row",
    "class",
    "resource",
    "bid",
    "bid_derivative",
    "equalized_wait",
    "envelope_defect",
    "converged",
    "iterations",
    "residual",
    "poa_bound",
];

fn run_network(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    let spec = scenario.network.as_ref().expect("network always has a spec");
    let report = solve_network_hte(spec, &scenario.solver)?;

    let mut csv = Csv::new(&NETWORK_HEADER, config_hash, scenario.seed);
    for i in 0..spec.num_classes() {
        for (slot, &j) in spec.resource_set(i).iter().enumerate() {
            csv.row(vec![
                "bid".into(),
                i.to_string(),
                j.to_string(),
                fmt_f(report.bids.row(i)[slot]),
                fmt_f(report.bid_derivatives[i][slot]),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
    }
    for i in 0..spec.num_classes() {
        let slope_sum: f64 = report.bid_derivatives[i].iter().map(|d| -d).sum();
        let c = spec.cost_rates()[i];
        csv.row(vec![
            "class".into(),
            i.to_string(),
            String::new(),
            String::new(),
            String::new(),
            fmt_f(report.equalized_waits[i]),
            fmt_f((slope_sum - c).abs() / c),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    let bound = report.poa_bound.or_else(|| network_poa_bound(&report, spec).ok());
    csv.row(vec![
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt_bool(report.converged),
        report.iterations.to_string(),
        fmt_f(report.residual),
        bound.map(fmt_f).unwrap_or_default(),
    ]);
    Ok(csv.finish())
}

const DIVERGENCE_HEADER: [&str; 11] = [
    "row",
    "ratio",
    "classes",
    "arrival_rates",
    "cost_rates",
    "beta_ht",
    "beta_ne",
    "converged",
    "iterations",
    "relative_error",
    "increasing",
];

/// Two-class family with cost and arrival ratios both equal to `ratio`, total
/// arrival rate 2, and the configured load. At ratio 1 the classes coincide and
/// canonicalization merges them, which is exactly the symmetric baseline.
fn divergence_instance(ratio: f64, load: f64, alpha: f64) -> Result<SystemParams> {
    let arrivals = vec![2.0 * ratio / (ratio + 1.0), 2.0 / (ratio + 1.0)];
    let costs = vec![ratio, 1.0];
    SystemParams::new(arrivals, costs, 2.0 / load, alpha)
}

fn run_divergence_probe(scenario: &PreparedScenario, config_hash: &str) -> Result<String> {
    let section = scenario.divergence.as_ref().expect("probe always has a section");
    let outcomes: Vec<SampleOutcome> = section
        .ratios
        .iter()
        .map(|&r| {
            compare_outcome(
                divergence_instance(r, section.load, section.alpha),
                &scenario.solver,
            )
        })
        .collect();

    let converged_errors: Vec<f64> =
        outcomes.iter().filter(|o| o.converged).filter_map(|o| o.rel_error).collect();
    let increasing = converged_errors.len() >= 2
        && converged_errors.windows(2).all(|pair| pair[1] > pair[0]);

    let mut csv = Csv::new(&DIVERGENCE_HEADER, config_hash, scenario.seed);
    for (outcome, &ratio) in outcomes.iter().zip(&section.ratios) {
        csv.row(vec![
            "step".into(),
            fmt_f(ratio),
            outcome.classes.to_string(),
            fmt_list(&outcome.arrival_rates),
            fmt_list(&outcome.cost_rates),
            fmt_list(&outcome.beta_ht),
            fmt_list(&outcome.beta_ne),
            fmt_bool(outcome.converged),
            outcome.iterations.map(|n| n.to_string()).unwrap_or_default(),
            outcome.rel_error.map(fmt_f).unwrap_or_default(),
            String::new(),
        ]);
    }
    csv.row(vec![
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        fmt_bool(increasing),
    ]);
    Ok(csv.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prep(json: &str, mode: Mode) -> Result<PreparedScenario> {
        prepare(ScenarioConfig::from_json(json.as_bytes())?, mode, None)
    }

    fn run_json(json: &str, mode: Mode) -> String {
        let hash = config_digest(json.as_bytes());
        run(&prep(json, mode).expect("prepare"), &hash).expect("run")
    }

    /// Header and data lines of a rendered document (metadata stripped).
    fn body(csv: &str) -> Vec<Vec<String>> {
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    fn column(rows: &[Vec<String>], name: &str) -> usize {
        rows[0].iter().position(|h| h == name).expect("column")
    }

    #[test]
    fn float_rendering_round_trips_exactly() {
        for &x in &[0.1 + 0.2, std::f64::consts::PI, 4.0 / 9.0, 1e-300, 12345.6789] {
            assert_eq!(fmt_f(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn config_digest_matches_known_answer() {
        assert_eq!(
            config_digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn config_rejects_unknown_fields_wrong_mode_and_misplaced_sections() {
        assert!(ScenarioConfig::from_json(br#"{"mode":"metrics","bogus":1}"#).is_err());
        let metrics = r#"{"mode":"metrics","system":{"arrival_rates":[1.0],"cost_rates":[1.0],"service_rate":2.0}}"#;
        assert!(prep(metrics, Mode::Compare).is_err());
        assert!(prep(r#"{"mode":"metrics"}"#, Mode::Metrics).is_err());
        let misplaced = r#"{"mode":"metrics","system":{"arrival_rates":[1.0],"cost_rates":[1.0],"service_rate":2.0},"sampling":{}}"#;
        assert!(prep(misplaced, Mode::Metrics).is_err());
        let ascending = r#"{"mode":"metrics","system":{"arrival_rates":[1.0,1.0],"cost_rates":[1.0,2.0],"service_rate":4.0}}"#;
        assert!(prep(ascending, Mode::Metrics).is_err());
        let both_speeds = r#"{"mode":"metrics","system":{"arrival_rates":[1.0],"cost_rates":[1.0],"service_rate":2.0,"load":0.5}}"#;
        assert!(prep(both_speeds, Mode::Metrics).is_err());
        let bad_solver = r#"{"mode":"exact-ne","system":{"arrival_rates":[1.0],"cost_rates":[1.0],"service_rate":2.0},"solver":{"damping":1.5}}"#;
        assert!(prep(bad_solver, Mode::ExactNe).is_err());
    }

    #[test]
    fn seed_resolution_prefers_the_override() {
        let json = r#"{"mode":"hte","rng_seed":7,"system":{"arrival_rates":[1.0],"cost_rates":[1.0],"service_rate":2.0}}"#;
        let config = ScenarioConfig::from_json(json.as_bytes()).unwrap();
        assert_eq!(prepare(config.clone(), Mode::Hte, None).unwrap().seed(), 7);
        assert_eq!(prepare(config, Mode::Hte, Some(99)).unwrap().seed(), 99);
    }

    #[test]
    fn metrics_reproduces_the_worked_instance_and_empty_sweep_is_header_only() {
        let json = r#"{"mode":"metrics","rng_seed":1,"system":{"arrival_rates":[1.0,1.0],"cost_rates":[2.0,1.0],"service_rate":4.0}}"#;
        let csv = run_json(json, Mode::Metrics);
        let rows = body(&csv);
        assert_eq!(rows.len(), 2);
        let get = |name: &str| rows[1][column(&rows, name)].parse::<f64>().unwrap();
        assert!((get("system_cost") - 2f64.sqrt()).abs() < 1e-12);
        assert!((get("revenue") - 2f64.sqrt()).abs() < 1e-12);
        assert!((get("optimal_cost") - 4.0 / 3.0).abs() < 1e-12);
        assert!((get("poa") - 3.0 * 2f64.sqrt() / 4.0).abs() < 1e-12);
        assert!(get("identity_gap").abs() < 1e-12);
        assert!(get("poa") < get("poa_bound_tight"));
        assert!(get("poa_bound_tight") < get("poa_bound_loose"));

        let empty = r#"{"mode":"metrics","system":{"arrival_rates":[1.0,1.0],"cost_rates":[2.0,1.0],"service_rate":4.0},"sweep":{"axis":"alpha","values":[]}}"#;
        let rows = body(&run_json(empty, Mode::Metrics));
        assert_eq!(rows.len(), 1, "empty sweep keeps only the header");
    }

    #[test]
    fn compare_emits_sorted_rows_failure_flags_and_identical_bytes_across_runs() {
        let json = r#"{"mode":"compare","rng_seed":5,"sampling":{"class_count":3,"sample_count":4},"sweep":{"axis":"load","values":[0.5,0.9]}}"#;
        let first = run_json(json, Mode::Compare);
        let second = run_json(json, Mode::Compare);
        assert_eq!(first, second, "same config and seed must give identical bytes");

        let rows = body(&first);
        assert_eq!(rows.len(), 1 + 2 * (4 + 1));
        let kind = column(&rows, "row");
        let sample = column(&rows, "sample");
        let costs = column(&rows, "cost_rates");
        let converged = column(&rows, "converged");
        let err = column(&rows, "relative_error");
        // Per sweep point: samples 0..3 in order, then one summary row.
        for point in 0..2 {
            let base = 1 + point * 5;
            for s in 0..4 {
                assert_eq!(rows[base + s][kind], "sample");
                assert_eq!(rows[base + s][sample], s.to_string());
            }
            assert_eq!(rows[base + 4][kind], "summary");
        }
        // In light traffic the cheapest class of sample 2 is not willing to buy
        // any priority (its best response pins to the bracket floor), so that
        // sample is recorded as a flagged row — with its sampled instance still
        // listed — and the sweep continues.
        assert_eq!(rows[3][converged], "false");
        assert_eq!(rows[3][err], "");
        assert!(!rows[3][costs].is_empty());
        assert_eq!(rows[5][converged], "false", "summary flags the failed point");
        for s in 0..4 {
            assert_eq!(rows[6 + s][converged], "true", "all samples solve at load 0.9");
        }
        assert_eq!(rows[10][converged], "true");
        // Common random numbers: the same sample id draws the same instance at
        // every sweep point.
        for s in 0..4 {
            assert_eq!(rows[1 + s][costs], rows[6 + s][costs]);
        }
        // The approximation sharpens toward heavy traffic, so the medians must
        // fall from load 0.5 to load 0.9 (computed over solved samples).
        let median = column(&rows, "err_median");
        let at_half = rows[5][median].parse::<f64>().unwrap();
        let at_nine = rows[10][median].parse::<f64>().unwrap();
        assert!(at_nine < at_half, "median error {at_nine} should be below {at_half}");
    }

    #[test]
    fn equilibrium_modes_emit_class_rows_and_a_summary() {
        let json = r#"{"mode":"hte","system":{"arrival_rates":[1.0,1.0],"cost_rates":[4.0,1.0],"service_rate":4.0}}"#;
        let rows = body(&run_json(json, Mode::Hte));
        assert_eq!(rows.len(), 4);
        let priority = column(&rows, "priority");
        assert!((rows[1][priority].parse::<f64>().unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((rows[2][priority].parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let foc = column(&rows, "foc_residual");
        assert!(rows[3][foc].parse::<f64>().unwrap() < 1e-10);
        assert_eq!(rows[3][column(&rows, "kind")], "job-hte");

        let json = r#"{"mode":"exact-ne","system":{"arrival_rates":[1.0,1.0],"cost_rates":[4.0,1.0],"service_rate":4.0}}"#;
        let rows = body(&run_json(json, Mode::ExactNe));
        assert_eq!(rows[3][column(&rows, "converged")], "true");
        assert_eq!(rows[3][column(&rows, "kind")], "job-ne");

        let json = r#"{"mode":"class-hte","system":{"arrival_rates":[1.0,1.0],"cost_rates":[4.0,1.0],"service_rate":4.0}}"#;
        let rows = body(&run_json(json, Mode::ClassHte));
        assert_eq!(rows[3][column(&rows, "converged")], "true");
        assert!(rows[3][column(&rows, "foc_residual")].parse::<f64>().unwrap() < 1e-8);
    }

    #[test]
    fn simulate_compares_analytic_and_estimated_values_deterministically() {
        let json = r#"{"mode":"simulate","rng_seed":3,"system":{"arrival_rates":[1.0],"cost_rates":[1.0],"service_rate":2.0},"sim":{"warmup_time":50.0,"measurement_time":2000.0,"replications":3}}"#;
        let first = run_json(json, Mode::Simulate);
        assert_eq!(first, run_json(json, Mode::Simulate));
        let rows = body(&first);
        assert_eq!(rows.len(), 3, "one wait row and one count row for a single class");
        let z = column(&rows, "z_score");
        for row in &rows[1..] {
            assert!(row[z].parse::<f64>().unwrap().abs() < 5.0);
        }

        let json = r#"{"mode":"simulate","rng_seed":3,"system":{"arrival_rates":[1.0,1.0],"cost_rates":[2.0,1.0],"service_rate":4.0},"sim":{"policy":"strict-priority","warmup_time":50.0,"measurement_time":2000.0,"replications":3}}"#;
        let rows = body(&run_json(json, Mode::Simulate));
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1][column(&rows, "label")], "C_opt");
        let analytic = column(&rows, "analytic");
        assert!((rows[1][analytic].parse::<f64>().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn limiting_point_mass_reproduces_the_single_class_closed_form() {
        let json = r#"{"mode":"limiting","limiting":{"cost_distribution":{"kind":"point-masses","points":[[1.0,1.0]]},"arrival_distribution":{"kind":"point-masses","points":[[0.5,1.0]]},"service_rate":1.0,"class_counts":[10,50]}}"#;
        let rows = body(&run_json(json, Mode::Limiting));
        let kind = column(&rows, "row");
        let strategy: Vec<_> = rows.iter().filter(|r| r[kind] == "strategy").collect();
        assert_eq!(strategy.len(), 1, "point support collapses the grid");
        let priority = column(&rows, "priority");
        // Single-cost continuum at load 1/2 and unit service rate buys weight
        // c / (mu * alpha * (1 - rho)) = 2.
        assert!((strategy[0][priority].parse::<f64>().unwrap() - 2.0).abs() < 1e-10);
        let finite: Vec<_> = rows.iter().filter(|r| r[kind] == "finite").collect();
        assert_eq!(finite.len(), 2);
    }

    #[test]
    fn network_rows_cover_bids_classes_and_summary() {
        let json = r#"{"mode":"network","network":{"arrival_rates":[1.0,1.0,1.0],"cost_rates":[4.0,2.0,3.0],"resource_sets":[[0],[1],[0,1]],"service_rates":[4.0,4.0]}}"#;
        let rows = body(&run_json(json, Mode::Network));
        let kind = column(&rows, "row");
        assert_eq!(rows.iter().filter(|r| r[kind] == "bid").count(), 4);
        assert_eq!(rows.iter().filter(|r| r[kind] == "class").count(), 3);
        let summary = rows.iter().find(|r| r[kind] == "summary").unwrap();
        assert_eq!(summary[column(&rows, "converged")], "true");
        assert!(!summary[column(&rows, "poa_bound")].is_empty());
        let defect = column(&rows, "envelope_defect");
        for row in rows.iter().filter(|r| r[kind] == "class") {
            assert!(row[defect].parse::<f64>().unwrap() < 1e-8);
        }
    }

    #[test]
    fn divergence_probe_reports_growing_error_without_aborting() {
        let json = r#"{"mode":"divergence-probe","divergence":{"ratios":[1.0,10.0,100.0]}}"#;
        let csv = run_json(json, Mode::DivergenceProbe);
        assert_eq!(csv, run_json(json, Mode::DivergenceProbe));
        let rows = body(&csv);
        let kind = column(&rows, "row");
        let err = column(&rows, "relative_error");
        let errors: Vec<f64> = rows
            .iter()
            .filter(|r| r[kind] == "step")
            .map(|r| r[err].parse::<f64>().unwrap())
            .collect();
        assert_eq!(errors.len(), 3);
        assert!(errors[0] < errors[1] && errors[1] < errors[2]);
        let summary = rows.iter().find(|r| r[kind] == "summary").unwrap();
        assert_eq!(summary[column(&rows, "increasing")], "true");
    }
}
