#![forbid(unsafe_code)]
//! Priority-pricing games on a shared-capacity queue: exact analysis, heavy-traffic
//! approximation, equilibrium computation, economic metrics, and a discrete-event
//! simulation oracle that cross-checks every analytic formula.
//!
//! The model is a single server shared by `K` Poisson job classes under weighted
//! processor sharing: each job bids a priority weight `beta`, pays `beta^alpha`, and
//! receives capacity in proportion to its weight. Classes differ in arrival rate and
//! waiting cost rate. The crate computes what selfish bidders do (exact and
//! heavy-traffic equilibria, at job and class granularity, single resource and
//! networks), what it costs (aggregate waiting cost, revenue, efficiency bounds), and
//! verifies the formulas against an independent event-driven simulation.
//!
//! Start with the runnable examples (`cargo run --example <name>`):
//!
//! - `exact_waiting_times` — solve the per-class sojourn system, tagged-job times,
//!   work conservation and scale invariance checks.
//! - `heavy_traffic_equilibrium` — closed-form heavy-traffic equilibrium weights,
//!   first-order-condition residuals, cost-ratio law, deviation payoffs.
//! - `best_response_dynamics` — exact equilibria via best-response sweeps, warm
//!   starts, and the accuracy of the heavy-traffic approximation away from saturation.
//! - `class_level_games` — class-level (atomic) equilibria, their heavy-traffic
//!   counterparts, and the continuum limit over sampled cost distributions.
//! - `economics` — aggregate cost, revenue, the scheduling lower bound, and
//!   price-of-anarchy bounds with their tightness regime.
//! - `network_market` — multi-resource bidding: per-resource marginal prices,
//!   waiting-time equalization, and the efficiency bound.
//! - `simulation_oracle` — the discrete-event oracle: weighted sharing two ways,
//!   tagged probes, preemptive priority, and random-order service.
//!
//! The same functionality is scriptable through the thin `dps-games` binary
//! (JSON config in, CSV out, deterministic for a fixed seed).

pub mod distribution;
pub mod equilibrium;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod heavy_traffic;
pub mod metrics;
pub mod network;
pub mod numeric;
pub mod sim;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
