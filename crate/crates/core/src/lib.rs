//! Security analysis of phase-reference sharing in continuous-variable QKD
//! with a locally generated local oscillator (LLO-CVQKD).
//!
//! The crate models the excess-noise budget of the link, the collective-attack
//! key rate, and the reference pulse attack, in which Eve reroutes the phase
//! reference pulses through a low-loss fibre and spends the resulting noise
//! margin attacking the signal. A pulse-level Monte Carlo simulator checks the
//! analytic noise model independently.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod countermeasure;
pub mod error;
pub mod figures;
pub mod keyrate;
pub mod montecarlo;
pub mod noise;
pub mod params;
pub mod plot;
pub mod roots;
pub mod sweep;
pub mod table;
pub mod validate;

pub use attack::{
    attack_report, critical_distance, noise_tolerance, null_key_distance, post_attack_budget,
    AttackReport, AttackState, Regions,
};
pub use countermeasure::{amplitude_monitor, conservative_key_rate, MonitorVerdict};
pub use error::{Error, Result};
pub use keyrate::{g_entropy, holevo_bound, key_rate, mutual_information, EigenSet, KeyRateReport};
pub use montecarlo::{estimate_excess_noise, simulate_batch, ExcessNoiseEstimate, PulseBatch, PulseSetup};
pub use noise::{drift_variance, phase_error_variance, solve_noise_budget, BudgetView, NoiseBudget};
pub use params::{
    effective_v, transmittance, AttackScenario, ChiTMode, Config, KeffDenominator, ModelOptions,
    SystemParams,
};
pub use table::{report_table, ReportRow, Table, REPORT_COLUMNS};
