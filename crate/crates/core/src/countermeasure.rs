//! Detecting the attack and bounding the key rate against it.
//!
//! Bob knows the reference amplitude Alice sent and the signal transmittance
//! from parameter estimation, so a rerouted reference arrives measurably too
//! bright. Independently, evaluating the Holevo bound on the uncompensated
//! budget yields a key rate that stays secure under the attack.

use serde::{Deserialize, Serialize};

use crate::attack::{attack_report, DISTANCE_BRACKET, DISTANCE_SCAN_STEP, DISTANCE_TOL};
use crate::error::{Error, Result};
use crate::montecarlo::{PulseBatch, SampleStats};
use crate::noise::solve_noise_budget;
use crate::params::{AttackScenario, ModelOptions, SystemParams};
use crate::roots::first_crossing;

pub const DEFAULT_THRESHOLD_SIGMA: f64 = 5.0;
pub const MIN_MONITOR_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorVerdict {
    /// Measured reference amplitude over `sqrt(eta / 2) * E_ref`.
    pub mean_ratio: f64,
    /// `sqrt(T_std)`.
    pub expected_ratio: f64,
    pub z_score: f64,
    pub alarm: bool,
    pub threshold_sigma: f64,
    pub samples: usize,
}

/// z-test of the received reference power against the power expected from
/// the signal transmittance.
///
/// The statistic is `|r|^2 - 2 sigma^2` per pulse, an unbiased estimate of
/// the squared mean amplitude given Bob's calibrated noise `sigma^2`.
pub fn amplitude_monitor(
    batch: &PulseBatch,
    params: &SystemParams,
    scenario: &AttackScenario,
    options: &ModelOptions,
    threshold_sigma: f64,
) -> Result<MonitorVerdict> {
    if batch.n < MIN_MONITOR_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_MONITOR_SAMPLES,
            got: batch.n,
        });
    }
    let t_std = scenario.t_std(params)?;
    let chi_t = solve_noise_budget(params, scenario.length_km, options.chi_t_mode, None)?.chi_total;
    let gain_sq = params.eta * t_std / 2.0;
    let noise_var = gain_sq * (chi_t + 1.0);
    let expected_power = gain_sq * params.e_ref_sq();

    let stats = SampleStats::of(
        batch
            .x_ref
            .iter()
            .zip(&batch.p_ref)
            .map(|(x, p)| x * x + p * p - 2.0 * noise_var),
    );
    let z_score = (stats.mean - expected_power) / stats.mean_std_error;
    let norm = (params.eta / 2.0 * params.e_ref_sq()).sqrt();
    Ok(MonitorVerdict {
        mean_ratio: stats.mean.max(0.0).sqrt() / norm,
        expected_ratio: t_std.sqrt(),
        z_score,
        alarm: z_score.abs() > threshold_sigma,
        threshold_sigma,
        samples: batch.n,
    })
}

/// `beta * I_AB - chi_BE^actual`: key rate with the tolerance charged to Eve.
pub fn conservative_key_rate(
    params: &SystemParams,
    scenario: &AttackScenario,
    options: &ModelOptions,
) -> Result<f64> {
    let report = attack_report(params, scenario, options)?;
    Ok(params.beta * report.keyrate_report.i_ab - report.chi_be_actual)
}

/// Shortest channel at which the conservative key rate reaches zero.
pub fn conservative_null_distance(
    params: &SystemParams,
    options: &ModelOptions,
    alpha_low: f64,
) -> Result<Option<f64>> {
    let (lo, hi) = DISTANCE_BRACKET;
    first_crossing(
        |length_km| Ok(-conservative_key_rate(params, &AttackScenario::new(length_km, alpha_low), options)?),
        lo,
        hi,
        DISTANCE_SCAN_STEP,
        DISTANCE_TOL,
    )
}
