//! Monte Carlo checks of the analytic model, summarised as JSON.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::countermeasure::{amplitude_monitor, MonitorVerdict, DEFAULT_THRESHOLD_SIGMA, MIN_MONITOR_SAMPLES};
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_excess_noise, reference_phase_error, signal_phase_error, simulate_batch, simulate_with_setup,
    ExcessNoiseEstimate, PulseSetup, MIN_ESTIMATOR_SAMPLES, RNG_ALGORITHM,
};
use crate::noise::solve_noise_budget;
use crate::params::{AttackScenario, Config, ModelOptions, SystemParams};

/// Relative tolerance of the phase-error variance check.
pub const PHASE_VARIANCE_REL_TOL: f64 = 0.05;
/// Reference powers, in units of `V_A`, used for the slope check.
pub const SLOPE_RATIOS: [f64; 3] = [100.0, 400.0, 1600.0];
pub const SLOPE_TOL: f64 = 0.05;
/// Combined standard errors allowed between attack-on and attack-off noise.
pub const INVISIBILITY_SIGMAS: f64 = 3.0;
/// Standard errors allowed for the signal variance check.
pub const SIGNAL_VARIANCE_SIGMAS: f64 = 5.0;
pub const BIAS_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub status: Status,
    pub measured: Option<f64>,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl PropertyCheck {
    fn judged(name: &'static str, ok: bool, measured: f64, expected: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            measured: Some(measured),
            expected: Some(expected),
            tolerance: Some(tolerance),
            detail,
        }
    }

    fn skipped(name: &'static str, reason: String) -> Self {
        Self {
            name,
            status: Status::Skipped,
            measured: None,
            expected: None,
            tolerance: None,
            detail: reason,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub rng: &'static str,
    pub seed: u64,
    pub samples: usize,
    /// Batch `k` of a run uses seed `seed + k` (wrapping).
    pub sub_seeds: &'static str,
    /// Not part of the reproducibility contract.
    pub generated_unix_s: u64,
    pub params: SystemParams,
    pub scenario: AttackScenario,
    pub options: ModelOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub metadata: RunMetadata,
    pub checks: Vec<PropertyCheck>,
    pub excess_noise_off: Option<ExcessNoiseEstimate>,
    pub excess_noise_on: Option<ExcessNoiseEstimate>,
    pub monitor_off: Option<MonitorVerdict>,
    pub monitor_on: Option<MonitorVerdict>,
    /// No check failed (skipped checks do not count as failures).
    pub passed: bool,
}

impl McSummary {
    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::from)
    }
}

fn insufficient(needed: usize, got: usize) -> String {
    format!("insufficient data: needs at least {needed} samples, got {got}")
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Simulate attack-off and attack-on batches of `n` pulses and check the
/// analytic predictions against them.
pub fn run_mc_validate(config: &Config, n: usize, seed: u64) -> Result<McSummary> {
    config.validate()?;
    let (params, scenario, options) = (&config.params, &config.scenario, &config.options);
    let off = simulate_batch(params, scenario, options, false, n, seed)?;
    let on = simulate_batch(params, scenario, options, true, n, seed.wrapping_add(1))?;
    let mut checks = Vec::new();

    const PHASE_VARIANCE: &str = "phase_error_variance";
    if n < MIN_ESTIMATOR_SAMPLES {
        checks.push(PropertyCheck::skipped(PHASE_VARIANCE, insufficient(MIN_ESTIMATOR_SAMPLES, n)));
    } else {
        let chi_t = solve_noise_budget(params, scenario.length_km, options.chi_t_mode, None)?.chi_total;
        let expected = (chi_t + 1.0) / params.e_ref_sq();
        let measured = signal_phase_error(&off).variance;
        let rel = (measured / expected - 1.0).abs();
        checks.push(PropertyCheck::judged(
            PHASE_VARIANCE,
            rel <= PHASE_VARIANCE_REL_TOL,
            measured,
            expected,
            PHASE_VARIANCE_REL_TOL,
            format!("var(phi_hat - phi_s) against (chi_t + 1) / E_ref^2; relative deviation {rel:.4}"),
        ));
    }

    const SLOPE: &str = "phase_error_slope";
    if n < MIN_ESTIMATOR_SAMPLES {
        checks.push(PropertyCheck::skipped(SLOPE, insufficient(MIN_ESTIMATOR_SAMPLES, n)));
    } else {
        let base = PulseSetup::new(params, scenario, options, false)?;
        let powers: Vec<f64> = SLOPE_RATIOS.iter().map(|r| r * params.v_a).collect();
        let mut variances = Vec::with_capacity(powers.len());
        for (k, &power) in powers.iter().enumerate() {
            let setup = PulseSetup {
                e_ref: power.sqrt(),
                ..base
            };
            let batch = simulate_with_setup(&setup, n, seed.wrapping_add(2 + k as u64))?;
            variances.push(reference_phase_error(&batch).variance);
        }
        let slope = log_log_slope(&powers, &variances);
        checks.push(PropertyCheck::judged(
            SLOPE,
            (slope + 1.0).abs() <= SLOPE_TOL,
            slope,
            -1.0,
            SLOPE_TOL,
            format!("log-log slope of var(phi_hat - phi_R) over E_ref^2 = {SLOPE_RATIOS:?} x V_A"),
        ));
    }

    const SIGNAL_VARIANCE: &str = "signal_variance";
    if n < MIN_ESTIMATOR_SAMPLES {
        checks.push(PropertyCheck::skipped(SIGNAL_VARIANCE, insufficient(MIN_ESTIMATOR_SAMPLES, n)));
    } else {
        let stats = crate::montecarlo::SampleStats::of(off.x_b.iter().copied());
        let expected = off.setup.predicted_signal_variance();
        let z = (stats.variance - expected) / stats.variance_std_error;
        checks.push(PropertyCheck::judged(
            SIGNAL_VARIANCE,
            z.abs() <= SIGNAL_VARIANCE_SIGMAS,
            stats.variance,
            expected,
            SIGNAL_VARIANCE_SIGMAS,
            format!("var(x_b) against (eta T / 2)(V_A + xi) + 1 + V_ele; z = {z:.2}"),
        ));
    }

    const BIAS: &str = "phase_estimate_unbiased";
    if n < MIN_ESTIMATOR_SAMPLES {
        checks.push(PropertyCheck::skipped(BIAS, insufficient(MIN_ESTIMATOR_SAMPLES, n)));
    } else {
        let stats = signal_phase_error(&off);
        let z = stats.mean / stats.mean_std_error;
        checks.push(PropertyCheck::judged(
            BIAS,
            z.abs() <= BIAS_SIGMAS,
            stats.mean,
            0.0,
            BIAS_SIGMAS,
            format!("mean(phi_hat - phi_s); z = {z:.2}"),
        ));
    }

    const INVISIBILITY: &str = "invisibility";
    let (mut excess_noise_off, mut excess_noise_on) = (None, None);
    match (estimate_excess_noise(&off, params, scenario), estimate_excess_noise(&on, params, scenario)) {
        (Ok(a), Ok(b)) => {
            let diff = b.xi_total - a.xi_total;
            let combined = a.std_error.hypot(b.std_error);
            checks.push(PropertyCheck::judged(
                INVISIBILITY,
                diff.abs() <= INVISIBILITY_SIGMAS * combined,
                diff,
                0.0,
                INVISIBILITY_SIGMAS * combined,
                format!("estimated xi_t with attack minus without; combined standard error {combined:.3e}"),
            ));
            excess_noise_off = Some(a);
            excess_noise_on = Some(b);
        }
        (Err(Error::InsufficientData { needed, got }), _) | (_, Err(Error::InsufficientData { needed, got })) => {
            checks.push(PropertyCheck::skipped(INVISIBILITY, insufficient(needed, got)));
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    }

    const MONITOR: &str = "amplitude_monitor";
    let (mut monitor_off, mut monitor_on) = (None, None);
    if n < MIN_MONITOR_SAMPLES {
        checks.push(PropertyCheck::skipped(MONITOR, insufficient(MIN_MONITOR_SAMPLES, n)));
    } else {
        let quiet = amplitude_monitor(&off, params, scenario, options, DEFAULT_THRESHOLD_SIGMA)?;
        let loud = amplitude_monitor(&on, params, scenario, options, DEFAULT_THRESHOLD_SIGMA)?;
        // Without a low-loss advantage there is nothing to detect.
        let attack_expected = loud.expected_ratio < on.setup.t_reference.sqrt();
        let ok = !quiet.alarm && (loud.alarm == attack_expected);
        checks.push(PropertyCheck::judged(
            MONITOR,
            ok,
            loud.z_score,
            DEFAULT_THRESHOLD_SIGMA,
            DEFAULT_THRESHOLD_SIGMA,
            format!(
                "z = {:.2} without attack, {:.2} with attack; alarm expected with attack: {attack_expected}",
                quiet.z_score, loud.z_score
            ),
        ));
        monitor_off = Some(quiet);
        monitor_on = Some(loud);
    }

    let passed = checks.iter().all(|c| c.status != Status::Fail);
    let generated_unix_s = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(McSummary {
        metadata: RunMetadata {
            rng: RNG_ALGORITHM,
            seed,
            samples: n,
            sub_seeds: "seed + 0 attack off, seed + 1 attack on, seed + 2.. slope batches",
            generated_unix_s,
            params: *params,
            scenario: *scenario,
            options: *options,
        },
        checks,
        excess_noise_off,
        excess_noise_on,
        monitor_off,
        monitor_on,
        passed,
    })
}
