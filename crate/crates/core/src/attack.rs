//! Reference pulse attack.
//!
//! Eve routes the reference pulses through a lower-loss fibre. They reach Bob
//! brighter, so his phase estimate improves and the phase estimation noise
//! drops by `xi_tole`. Eve spends that margin attacking the signal, leaving
//! the total excess noise Alice and Bob measure unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::keyrate::{key_rate, key_rate_for_budget, KeyRateReport};
use crate::noise::{solve_noise_budget, BudgetView, NoiseBudget};
use crate::params::{AttackScenario, ChiTMode, KeffDenominator, ModelOptions, SystemParams};
use crate::roots::first_crossing;

/// Search bracket for the distance solvers (km).
pub const DISTANCE_BRACKET: (f64, f64) = (0.0, 60.0);
/// Forward scan step before bisection (km).
pub const DISTANCE_SCAN_STEP: f64 = 0.05;
/// Bisection termination width (km).
pub const DISTANCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackState {
    /// Phase-noise margin freed by the low-loss reference leg.
    pub xi_tole: f64,
    /// Noise Eve adds to the signal; at most `xi_tole`.
    pub xi_e_rpa: f64,
    /// Phase estimation error noise with the brighter reference.
    pub xi_error_low: f64,
    pub t_std: f64,
    pub t_low: f64,
}

impl AttackState {
    /// Eve spends only `fraction` of the tolerance.
    pub fn with_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(domain(format!("attack fraction must lie in [0, 1], got {fraction}")));
        }
        self.xi_e_rpa = fraction * self.xi_tole;
        Ok(self)
    }
}

/// Split of the information axis at one operating point, bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    /// Key that stays secret even under the attack.
    pub truly_secure: f64,
    /// `chi_be_actual - chi_be`: key Eve reads without being noticed.
    pub attack_induced_insecure: f64,
    /// `chi_be`: information Alice and Bob already concede to Eve.
    pub estimated_insecure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub scenario: AttackScenario,
    pub state: AttackState,
    /// Key rate as Alice and Bob estimate it under attack.
    pub keyrate_report: KeyRateReport,
    /// Budget without the attack.
    pub baseline_noise: NoiseBudget,
    pub actual_noise: NoiseBudget,
    pub chi_be_actual: f64,
    /// Raw attack efficiency; `+inf` when Eve gains information but the
    /// denominator is not positive.
    pub k_eff: f64,
    pub k_eff_clamped: f64,
    pub keff_denominator: KeffDenominator,
    pub regions: Regions,
}

/// Tolerance Eve gains from the reference leg, with Eve at full tolerance.
pub fn noise_tolerance(
    params: &SystemParams,
    scenario: &AttackScenario,
    baseline: &NoiseBudget,
) -> Result<AttackState> {
    scenario.validate(params)?;
    let t_std = scenario.t_std(params)?;
    let t_low = scenario.t_low()?;
    let gap = 10f64.powf(-(params.alpha_std - scenario.alpha_low) * scenario.length_km / 10.0);
    let xi_tole = baseline.xi_error * (1.0 - gap);
    Ok(AttackState {
        xi_tole,
        xi_e_rpa: xi_tole,
        xi_error_low: baseline.xi_error * t_std / t_low,
        t_std,
        t_low,
    })
}

/// Estimated and actual budgets under attack, plus the attack state used.
pub fn post_attack_budget(
    params: &SystemParams,
    scenario: &AttackScenario,
    options: &ModelOptions,
) -> Result<(NoiseBudget, NoiseBudget, AttackState)> {
    let (_, estimated, actual, state) = attack_budgets(params, scenario, options)?;
    Ok((estimated, actual, state))
}

fn attack_budgets(
    params: &SystemParams,
    scenario: &AttackScenario,
    options: &ModelOptions,
) -> Result<(NoiseBudget, NoiseBudget, NoiseBudget, AttackState)> {
    options.validate()?;
    let baseline = solve_noise_budget(params, scenario.length_km, options.chi_t_mode, None)?;
    let state = noise_tolerance(params, scenario, &baseline)?.with_fraction(options.attack_fraction)?;
    let estimated = solve_noise_budget(
        params,
        scenario.length_km,
        options.chi_t_mode,
        Some((&state, BudgetView::Estimated)),
    )?;
    let actual = solve_noise_budget(
        params,
        scenario.length_km,
        options.chi_t_mode,
        Some((&state, BudgetView::Actual)),
    )?;
    Ok((baseline, estimated, actual, state))
}

pub fn attack_report(
    params: &SystemParams,
    scenario: &AttackScenario,
    options: &ModelOptions,
) -> Result<AttackReport> {
    let (baseline, estimated, actual, state) = attack_budgets(params, scenario, options)?;
    let keyrate_report = key_rate_for_budget(params, estimated)?;
    let chi_be_actual = key_rate_for_budget(params, actual)?.chi_be;

    let chi_be = keyrate_report.chi_be;
    let denominator = match options.keff_denominator {
        KeffDenominator::AsPrinted => keyrate_report.i_ab - chi_be,
        KeffDenominator::Reconciled => params.beta * keyrate_report.i_ab - chi_be,
    };
    let stolen = chi_be_actual - chi_be;
    let k_eff = if stolen <= 0.0 {
        0.0
    } else if denominator > 0.0 {
        stolen / denominator
    } else {
        f64::INFINITY
    };

    Ok(AttackReport {
        scenario: *scenario,
        state,
        keyrate_report,
        baseline_noise: baseline,
        actual_noise: actual,
        chi_be_actual,
        k_eff,
        k_eff_clamped: k_eff.min(1.0),
        keff_denominator: options.keff_denominator,
        regions: Regions {
            truly_secure: denominator - stolen,
            attack_induced_insecure: stolen,
            estimated_insecure: chi_be,
        },
    })
}

/// Shortest channel at which the attack efficiency reaches `target_keff`.
pub fn critical_distance(
    params: &SystemParams,
    options: &ModelOptions,
    alpha_low: f64,
    target_keff: f64,
) -> Result<Option<f64>> {
    let (lo, hi) = DISTANCE_BRACKET;
    first_crossing(
        |length_km| {
            let report = attack_report(params, &AttackScenario::new(length_km, alpha_low), options)?;
            Ok(report.k_eff - target_keff)
        },
        lo,
        hi,
        DISTANCE_SCAN_STEP,
        DISTANCE_TOL,
    )
}

/// Shortest channel at which the unattacked key rate drops to zero.
pub fn null_key_distance(params: &SystemParams, mode: ChiTMode) -> Result<Option<f64>> {
    let (lo, hi) = DISTANCE_BRACKET;
    first_crossing(
        |length_km| Ok(-key_rate(params, length_km, mode)?.key_rate),
        lo,
        hi,
        DISTANCE_SCAN_STEP,
        DISTANCE_TOL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn preset() -> SystemParams {
        SystemParams::paper2017()
    }

    #[test]
    fn no_low_loss_advantage_means_no_tolerance() {
        let p = preset();
        for l in [0.0, 7.0, 20.0] {
            let s = AttackScenario::new(l, p.alpha_std);
            let r = attack_report(&p, &s, &ModelOptions::default()).unwrap();
            assert_eq!(r.state.xi_tole, 0.0);
            assert_eq!(r.k_eff, 0.0);
            assert_eq!(r.chi_be_actual, r.keyrate_report.chi_be);
        }
    }

    #[test]
    fn tolerance_matches_error_reduction() {
        let p = preset();
        let s = AttackScenario::new(20.0, 0.0);
        let base = solve_noise_budget(&p, 20.0, ChiTMode::FixedPoint, None).unwrap();
        let st = noise_tolerance(&p, &s, &base).unwrap();
        assert_relative_eq!(st.xi_tole, base.xi_error - st.xi_error_low, max_relative = 1e-12);
        assert_relative_eq!(st.t_std / st.t_low, 10f64.powf(-0.4), max_relative = 1e-14);
        assert!(st.t_low >= st.t_std);
        assert_eq!(st.xi_e_rpa, st.xi_tole);
    }

    #[test]
    fn alpha_low_above_alpha_std_is_rejected() {
        let p = preset();
        let base = solve_noise_budget(&p, 20.0, ChiTMode::FixedPoint, None).unwrap();
        assert!(noise_tolerance(&p, &AttackScenario::new(20.0, 0.3), &base).is_err());
    }

    #[test]
    fn estimated_budget_is_invisible() {
        let p = preset();
        let s = AttackScenario::new(20.0, 0.0);
        let (est, act, st) = post_attack_budget(&p, &s, &ModelOptions::default()).unwrap();
        let base = solve_noise_budget(&p, 20.0, ChiTMode::FixedPoint, None).unwrap();
        assert!((est.xi_total - base.xi_total).abs() < 1e-10);
        assert!((est.chi_total - base.chi_total).abs() < 1e-10);
        assert_relative_eq!(act.chi_total - est.chi_total, st.xi_tole, max_relative = 1e-9);
    }

    #[test]
    fn idle_eve_lowers_noise() {
        let p = preset();
        let opts = ModelOptions {
            attack_fraction: 0.0,
            ..ModelOptions::default()
        };
        let (est, act, st) = post_attack_budget(&p, &AttackScenario::new(20.0, 0.0), &opts).unwrap();
        let base = solve_noise_budget(&p, 20.0, ChiTMode::FixedPoint, None).unwrap();
        assert_eq!(st.xi_e_rpa, 0.0);
        assert_relative_eq!(base.chi_total - est.chi_total, st.xi_tole, max_relative = 1e-9);
        assert_eq!(act.chi_total, base.chi_total);
    }

    #[test]
    fn report_identities() {
        let p = preset();
        let r = attack_report(&p, &AttackScenario::new(15.0, 0.05), &ModelOptions::default()).unwrap();
        assert_eq!(r.regions.attack_induced_insecure, r.chi_be_actual - r.keyrate_report.chi_be);
        let denom = p.beta * r.keyrate_report.i_ab - r.keyrate_report.chi_be;
        assert_relative_eq!(r.k_eff, r.regions.attack_induced_insecure / denom, max_relative = 1e-15);
        assert!(r.chi_be_actual > r.keyrate_report.chi_be);
    }

    #[test]
    fn saturated_efficiency_past_null_distance() {
        let p = preset();
        let r = attack_report(&p, &AttackScenario::new(45.0, 0.0), &ModelOptions::default()).unwrap();
        assert!(r.k_eff.is_infinite());
        assert_eq!(r.k_eff_clamped, 1.0);
    }

    #[test]
    fn no_crossing_without_advantage() {
        let p = preset();
        let d = critical_distance(&p, &ModelOptions::default(), p.alpha_std, 1.0).unwrap();
        assert!(d.is_none());
    }

    #[test]
    fn pure_loss_channel_never_loses_key() {
        let p = SystemParams {
            beta: 1.0,
            eta: 1.0,
            v_ele: 0.0,
            xi_e: 0.0,
            dnu_a: 0.0,
            dnu_b: 0.0,
            ref_amp_ratio: 1e12,
            ..preset()
        };
        assert!(null_key_distance(&p, ChiTMode::FixedPoint).unwrap().is_none());
    }

    #[test]
    fn vanishing_modulation_has_no_key() {
        let p = SystemParams {
            v_a: 1e-9,
            ..preset()
        };
        let d = null_key_distance(&p, ChiTMode::FixedPoint).unwrap().unwrap();
        assert!(d < 0.1, "{d}");
    }
}
